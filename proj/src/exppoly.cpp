#include "wfn/exppoly.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace wfn {

cplx ExpPolyTerm::evaluate(double v) const {
    cplx r = kappa * std::exp(-a * v);
    if (m > 0) r *= std::pow(v, m);
    return r;
}

cplx evaluate_terms(const std::vector<ExpPolyTerm>& terms, double v) {
    cplx acc{};
    for (const auto& t : terms) acc += t.evaluate(v);
    return acc;
}

std::vector<ExpPolyTerm> recenter(const ExpPolyTerm& t, double delta) {
    if (delta == 0.0) return {t};
    std::vector<ExpPolyTerm> out;
    const cplx base = t.kappa * std::exp(-t.a * delta);
    for (int j = 0; j <= t.m; ++j) {
        const cplx k = base * binomial(t.m, j) * std::pow(delta, t.m - j);
        if (k != cplx{}) out.push_back({k, j, t.a});
    }
    return out;
}

std::vector<ExpPolyTerm> recenter(const std::vector<ExpPolyTerm>& terms, double delta) {
    std::vector<ExpPolyTerm> out;
    for (const auto& t : terms) {
        auto r = recenter(t, delta);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

std::vector<ExpPolyTerm> canonical_terms(std::vector<ExpPolyTerm> terms) {
    for (auto& t : terms)
        if (std::abs(t.a.imag()) < 1e-12) t.a = {t.a.real(), 0.0};
    auto key_less = [](const ExpPolyTerm& x, const ExpPolyTerm& y) {
        if (x.a.real() != y.a.real()) return x.a.real() < y.a.real();
        if (x.a.imag() != y.a.imag()) return x.a.imag() < y.a.imag();
        return x.m < y.m;
    };
    std::stable_sort(terms.begin(), terms.end(), key_less);
    std::vector<ExpPolyTerm> out;
    for (const auto& t : terms) {
        if (!out.empty() && out.back().a == t.a && out.back().m == t.m) out.back().kappa += t.kappa;
        else out.push_back(t);
    }
    std::erase_if(out, [](const ExpPolyTerm& t) { return t.kappa == cplx{}; });
    return out;
}

cplx terms_derivative_at_zero(const std::vector<ExpPolyTerm>& terms, int k) {
    cplx acc{};
    for (const auto& t : terms) {
        if (k < t.m) continue;
        acc += t.kappa * binomial(k, t.m) * factorial(t.m) * std::pow(-t.a, k - t.m);
    }
    return acc;
}

cplx integral_term_value(const ExpPolyTerm& t, double v) { return t.kappa * power_exp_integral(t.m, t.a, v); }

std::vector<ExpPolyTerm> expand_integral_term(const ExpPolyTerm& t, cplx& constant) {
    if (t.a == cplx{}) return {{t.kappa / static_cast<double>(t.m + 1), t.m + 1, 0.0}};
    // m!/a^{m+1} (1 - e^{-a v} sum_{j<=m} (a v)^j / j!)
    const cplx lead = t.kappa * factorial(t.m) / std::pow(t.a, t.m + 1);
    constant += lead;
    std::vector<ExpPolyTerm> out;
    for (int j = 0; j <= t.m; ++j) out.push_back({-lead * std::pow(t.a, j) / factorial(j), j, t.a});
    return out;
}

namespace {

// kappa int_0^{v + delta} = kappa int_0^delta + kappa e^{-a delta} sum_j C(m,j) delta^{m-j} int_0^v t^j e^{-a t}
std::vector<ExpPolyTerm> recenter_integral(const ExpPolyTerm& t, double delta, cplx& constant) {
    if (delta == 0.0) return {t};
    constant += integral_term_value(t, delta);
    std::vector<ExpPolyTerm> out;
    const cplx base = t.kappa * std::exp(-t.a * delta);
    for (int j = 0; j <= t.m; ++j) out.push_back({base * binomial(t.m, j) * std::pow(delta, t.m - j), j, t.a});
    return out;
}

} // namespace

cplx Piece::value(double v) const {
    cplx acc = constant + evaluate_terms(terms, v);
    for (const auto& t : integrals) acc += integral_term_value(t, v);
    return acc;
}

Piece Piece::expanded() const {
    Piece p{lo, hi, terms, constant, {}};
    for (const auto& t : integrals) {
        auto e = expand_integral_term(t, p.constant);
        p.terms.insert(p.terms.end(), e.begin(), e.end());
    }
    p.terms = canonical_terms(std::move(p.terms));
    return p;
}

// ---------------------------------------------------------------------------

PiecewiseExpPoly::PiecewiseExpPoly() : pieces_{Piece{}} {}

PiecewiseExpPoly::PiecewiseExpPoly(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw DomainError("piecewise function needs at least one piece");
    if (pieces_.front().lo != 0.0) throw DomainError("first piece must start at 0");
    if (!std::isinf(pieces_.back().hi)) throw DomainError("last piece must extend to infinity");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (!(pieces_[i].lo < pieces_[i].hi)) throw DomainError("empty or reversed piece");
        if (i + 1 < pieces_.size() && pieces_[i].hi != pieces_[i + 1].lo)
            throw DomainError("pieces must be contiguous");
    }
}

PiecewiseExpPoly PiecewiseExpPoly::from_terms(std::vector<ExpPolyTerm> terms, cplx constant) {
    Piece p;
    p.terms = canonical_terms(std::move(terms));
    p.constant = constant;
    return PiecewiseExpPoly({p});
}

std::vector<double> PiecewiseExpPoly::breakpoints() const {
    std::vector<double> b;
    for (const auto& p : pieces_) b.push_back(p.lo);
    return b;
}

std::size_t PiecewiseExpPoly::locate(double u) const {
    if (!(u >= 0.0)) throw DomainError("piecewise function evaluated at a negative or NaN argument");
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), u,
                               [](double x, const Piece& p) { return x < p.lo; });
    return static_cast<std::size_t>(std::distance(pieces_.begin(), it)) - 1;
}

cplx PiecewiseExpPoly::evaluate(double u) const {
    const auto& p = pieces_[locate(u)];
    return p.value(u - p.lo);
}

cplx PiecewiseExpPoly::evaluate_left(double u) const {
    std::size_t i = locate(u);
    if (i > 0 && pieces_[i].lo == u) --i;
    const auto& p = pieces_[i];
    return p.value(u - p.lo);
}

PiecewiseExpPoly PiecewiseExpPoly::derivative() const {
    std::vector<Piece> out;
    for (const auto& p : pieces_) {
        Piece q{p.lo, p.hi, {}, {}};
        for (const auto& t : p.terms) {
            if (t.m > 0) q.terms.push_back({t.kappa * static_cast<double>(t.m), t.m - 1, t.a});
            if (t.a != cplx{}) q.terms.push_back({-t.a * t.kappa, t.m, t.a});
        }
        q.terms.insert(q.terms.end(), p.integrals.begin(), p.integrals.end());
        q.terms = canonical_terms(std::move(q.terms));
        out.push_back(std::move(q));
    }
    return PiecewiseExpPoly(std::move(out));
}

PiecewiseExpPoly PiecewiseExpPoly::antiderivative() const {
    std::vector<Piece> out;
    cplx start{};
    for (const auto& src : pieces_) {
        // Integral terms are integrated once more through their closed form.
        const Piece p = src.integrals.empty() ? src : src.expanded();
        Piece q{p.lo, p.hi, {}, start, {}};
        if (p.constant != cplx{}) q.terms.push_back({p.constant, 1, 0.0});
        for (const auto& t : p.terms) {
            if (t.a == cplx{}) q.terms.push_back({t.kappa / static_cast<double>(t.m + 1), t.m + 1, 0.0});
            else q.integrals.push_back(t);
        }
        q.terms = canonical_terms(std::move(q.terms));
        q.integrals = canonical_terms(std::move(q.integrals));
        if (!std::isinf(p.hi)) start = q.value(p.hi - p.lo);
        out.push_back(std::move(q));
    }
    return PiecewiseExpPoly(std::move(out));
}

PiecewiseExpPoly& PiecewiseExpPoly::operator+=(const PiecewiseExpPoly& o) {
    std::vector<double> cuts = breakpoints();
    for (double b : o.breakpoints()) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Piece> out;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        Piece q;
        q.lo = cuts[i];
        q.hi = i + 1 < cuts.size() ? cuts[i + 1] : std::numeric_limits<double>::infinity();
        for (const PiecewiseExpPoly* f : {static_cast<const PiecewiseExpPoly*>(this), &o}) {
            const auto& src = f->pieces_[f->locate(q.lo)];
            auto moved = recenter(src.terms, q.lo - src.lo);
            q.terms.insert(q.terms.end(), moved.begin(), moved.end());
            q.constant += src.constant;
            for (const auto& t : src.integrals) {
                auto r = recenter_integral(t, q.lo - src.lo, q.constant);
                q.integrals.insert(q.integrals.end(), r.begin(), r.end());
            }
        }
        q.terms = canonical_terms(std::move(q.terms));
        q.integrals = canonical_terms(std::move(q.integrals));
        out.push_back(std::move(q));
    }
    pieces_ = std::move(out);
    return *this;
}

PiecewiseExpPoly& PiecewiseExpPoly::scale(cplx s) {
    for (auto& p : pieces_) {
        p.constant *= s;
        for (auto& t : p.terms) t.kappa *= s;
        for (auto& t : p.integrals) t.kappa *= s;
        p.terms = canonical_terms(std::move(p.terms));
        p.integrals = canonical_terms(std::move(p.integrals));
    }
    return *this;
}

PiecewiseExpPoly& PiecewiseExpPoly::canonicalize() {
    for (auto& p : pieces_) {
        p.terms = canonical_terms(std::move(p.terms));
        p.integrals = canonical_terms(std::move(p.integrals));
    }
    return *this;
}

double PiecewiseExpPoly::continuity_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        const cplx left = p.value(p.hi - p.lo);
        const cplx right = pieces_[i + 1].value(0.0);
        worst = std::max(worst, std::abs(left - right));
    }
    return worst;
}

cplx PiecewiseExpPoly::expectation_under(const ServiceModel& model) const {
    if (model.is_deterministic()) return evaluate(model.det_value());
    const int q = model.shape();
    const double w = model.rate();
    const double norm = std::pow(w, q) / factorial(q - 1);
    cplx acc{};
    for (const auto& src : pieces_) {
        const Piece p = src.expanded();
        const double L = p.hi - p.lo;
        const double shift = std::exp(-w * p.lo);
        if (shift == 0.0) continue;
        std::vector<ExpPolyTerm> terms = p.terms;
        if (p.constant != cplx{}) terms.push_back({p.constant, 0, 0.0});
        for (const auto& t : terms) {
            for (int i = 0; i <= q - 1; ++i) {
                const double c = binomial(q - 1, i) * std::pow(p.lo, q - 1 - i);
                if (c == 0.0) continue;
                acc += norm * shift * c * t.kappa * power_exp_integral(t.m + i, t.a + w, L);
            }
        }
    }
    return acc;
}

std::string PiecewiseExpPoly::to_json() const {
    using nlohmann::json;
    json pieces = json::array();
    for (const auto& p : pieces_) {
        auto write = [](const std::vector<ExpPolyTerm>& list) {
            json terms = json::array();
            for (const auto& t : list)
                terms.push_back({{"kappa_re", t.kappa.real()},
                                 {"kappa_im", t.kappa.imag()},
                                 {"m", t.m},
                                 {"a_re", t.a.real()},
                                 {"a_im", t.a.imag()}});
            return terms;
        };
        json hi = std::isinf(p.hi) ? json(nullptr) : json(p.hi);
        pieces.push_back({{"tau_lo", p.lo},
                          {"tau_hi", hi},
                          {"terms", write(p.terms)},
                          {"integrals", write(p.integrals)},
                          {"const", json::array({p.constant.real(), p.constant.imag()})}});
    }
    return json{{"pieces", pieces}}.dump();
}

PiecewiseExpPoly PiecewiseExpPoly::from_json(const std::string& text) {
    using nlohmann::json;
    try {
        const json doc = json::parse(text);
        std::vector<Piece> pieces;
        for (const auto& jp : doc.at("pieces")) {
            Piece p;
            p.lo = jp.at("tau_lo").get<double>();
            p.hi = jp.at("tau_hi").is_null() ? std::numeric_limits<double>::infinity()
                                             : jp.at("tau_hi").get<double>();
            auto read = [](const json& list, std::vector<ExpPolyTerm>& dst) {
                for (const auto& jt : list)
                    dst.push_back({{jt.at("kappa_re").get<double>(), jt.at("kappa_im").get<double>()},
                                   jt.at("m").get<int>(),
                                   {jt.at("a_re").get<double>(), jt.at("a_im").get<double>()}});
            };
            read(jp.at("terms"), p.terms);
            if (jp.contains("integrals")) read(jp.at("integrals"), p.integrals);
            const auto& c = jp.at("const");
            p.constant = {c.at(0).get<double>(), c.at(1).get<double>()};
            pieces.push_back(std::move(p));
        }
        return PiecewiseExpPoly(std::move(pieces));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed piecewise function record: ") + e.what());
    }
}

PiecewiseExpPoly operator+(PiecewiseExpPoly a, const PiecewiseExpPoly& b) { return a += b; }

PiecewiseExpPoly operator*(cplx s, PiecewiseExpPoly a) { return a.scale(s); }

} // namespace wfn
