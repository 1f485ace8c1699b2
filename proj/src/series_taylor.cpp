#include "wfn/series_taylor.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

namespace wfn {

GermSource germ_source(const Germ& g) {
    return [c = g.coeffs](int k) -> cplx {
        if (k < 0 || static_cast<std::size_t>(k) >= c.size()) return {};
        return c[static_cast<std::size_t>(k)];
    };
}

GermSource germ_source(const std::vector<ExpPolyTerm>& cost) {
    return [cost](int k) { return terms_derivative_at_zero(cost, k); };
}

namespace {

// Lazily grown table of a real sequence.
class LazySequence {
public:
    explicit LazySequence(std::function<std::vector<double>(int)> make) : make_(std::move(make)) {}
    double operator()(int k) {
        if (static_cast<std::size_t>(k) >= v_.size()) v_ = make_(std::max(2 * k, 64));
        return v_[static_cast<std::size_t>(k)];
    }

private:
    std::function<std::vector<double>(int)> make_;
    std::vector<double> v_;
};

// Sum of term(q), q = 0, 1, ... with geometric-majorant truncation and divergence detection.
cplx series_sum(const std::function<cplx(int)>& term, const SeriesOptions& opt, const char* what) {
    std::vector<double> mags;
    std::vector<double> partial;
    cplx S{};
    int zero_run = 0;
    for (int q = 0; q < opt.max_terms; ++q) {
        const cplx t = term(q);
        if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) break;
        S += t;
        mags.push_back(std::abs(t));
        partial.push_back(std::abs(S));
        zero_run = (t == cplx{}) ? zero_run + 1 : 0;
        if (q >= 8 && zero_run >= 2 * opt.divergence_window) return S;

        if (q < 8) continue;
        // Pairwise maxima tolerate germs with alternating zero entries.
        auto pair_max = [&](int i) { return std::max(mags[static_cast<std::size_t>(i)], mags[static_cast<std::size_t>(i - 1)]); };
        const double now = pair_max(q);
        const double before = pair_max(q - 4);
        const double r = before > 0.0 ? std::pow(now / before, 0.25) : (now == 0.0 ? 0.0 : 2.0);
        if (r < 1.0) {
            const double tail = 2.0 * now * r / (1.0 - r);
            if (tail <= opt.tail_tol * std::abs(S) || (now == 0.0 && std::abs(S) == 0.0)) return S;
        }
        if (q + 1 >= opt.min_terms && r >= 1.0) {
            bool growing = true;
            for (int i = q - opt.divergence_window + 1; i <= q; ++i)
                growing = growing && partial[static_cast<std::size_t>(i)] > partial[static_cast<std::size_t>(i - 1)];
            if (growing) {
                std::ostringstream os;
                os << what << " diverges: partial sums grow over indices " << q - opt.divergence_window << ".." << q;
                throw DivergentSeries(os.str(), partial);
            }
        }
    }
    std::ostringstream os;
    os << what << " did not converge within " << opt.max_terms << " terms";
    throw DivergentSeries(os.str(), partial);
}

} // namespace

Germ filter_germ(const QueueSpec& spec, const GermSource& cost, int n, const SeriesOptions& opt) {
    stability_check(spec);
    if (n < 1) throw DomainError("germ length must be >= 1");
    LazySequence y([&spec](int m) { return germ_at_zero(spec, m).y; });
    const double gain = spec.gain();
    Germ out;
    for (int k = 0; k < n; ++k) {
        auto term = [&](int q) { return y(q) * cost(k + q); };
        out.coeffs.push_back(gain * series_sum(term, opt, "w-germ series"));
    }
    return out;
}

GermSource filtered_source(const QueueSpec& spec, GermSource cost, const SeriesOptions& opt) {
    auto memo = std::make_shared<std::map<int, cplx>>();
    return [spec, cost = std::move(cost), opt, memo](int k) -> cplx {
        if (auto it = memo->find(k); it != memo->end()) return it->second;
        auto shifted = [&cost, k](int j) { return cost(k + j); };
        const cplx v = filter_germ(spec, shifted, 1, opt).coeffs[0];
        memo->emplace(k, v);
        return v;
    };
}

Germ inverse_filter_germ(const QueueSpec& spec, const GermSource& wgerm, int n, const SeriesOptions& opt) {
    stability_check(spec);
    if (n < 1) throw DomainError("germ length must be >= 1");
    const auto& model = spec.model();
    LazySequence x([&model](int m) {
        std::vector<double> v(static_cast<std::size_t>(m + 1));
        for (int j = 0; j <= m; ++j) v[static_cast<std::size_t>(j)] = model.moment(j) / factorial(j);
        return v;
    });
    Germ out;
    for (int k = 0; k < n; ++k) {
        auto term = [&](int t) { return x(t + 1) * wgerm(t + k); };
        out.coeffs.push_back(wgerm(k) / spec.lambda() - series_sum(term, opt, "inverse germ series"));
    }
    return out;
}

Eigen::MatrixXd filter_matrix(const QueueSpec& spec, int n) {
    const auto y = germ_at_zero(spec, n).y;
    const double gain = spec.gain();
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) Y(i, j) = gain * y[static_cast<std::size_t>(j - i)];
    return Y;
}

Eigen::MatrixXd moment_matrix(const QueueSpec& spec, int n) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) M(i, j) = spec.model().moment(j - i + 1) / factorial(j - i + 1);
    return M;
}

IntervalFn polynomial_bounds(const QueueSpec& spec, const Germ& cost_germ, int n, const DerivativeBounds& db) {
    stability_check(spec);
    if (n < 0) throw DomainError("order must be >= 0");
    if (static_cast<std::size_t>(n) >= db.alpha.size()) throw DomainError("no derivative bound for this order");
    if (spec.has_setup()) throw UnsupportedModel("polynomial bounds assume the setup service equals the service");
    const auto y = germ_at_zero(spec, n + 1).y;
    const double gain = spec.gain();
    auto c = [&](int k) {
        return static_cast<std::size_t>(k) < cost_germ.coeffs.size() ? cost_germ.coeffs[static_cast<std::size_t>(k)].real()
                                                                     : 0.0;
    };
    const Interval alpha = db.alpha[static_cast<std::size_t>(n)];

    std::vector<ExpPolyTerm> poly;
    for (int k = 0; k <= n; ++k) {
        double s = 0.0;
        for (int t = 0; t <= n - k; ++t) s += y[static_cast<std::size_t>(t)] * c(k + t);
        poly.push_back({gain * s / factorial(k + 1), k + 1, 0.0});
    }
    std::vector<ExpPolyTerm> rem;
    for (int k = 0; k <= n + 1; ++k)
        rem.push_back({gain * y[static_cast<std::size_t>(n - k + 1)] / factorial(k + 1), k + 1, 0.0});

    auto with_remainder = [&](double a) {
        auto terms = poly;
        for (auto t : rem) {
            t.kappa *= a;
            terms.push_back(t);
        }
        return PiecewiseExpPoly::from_terms(std::move(terms));
    };

    double mean = 0.0;
    for (int k = 0; k <= n; ++k) mean += c(k) * y[static_cast<std::size_t>(k)];
    const double yr = y[static_cast<std::size_t>(n + 1)];
    return {with_remainder(alpha.lo), with_remainder(alpha.hi), Interval(mean + alpha.lo * yr, mean + alpha.hi * yr)};
}

DerivativeBounds exp_saturation_bounds(double a, int n_max) {
    if (!(a > 0.0)) throw DomainError("saturation rate must be > 0");
    DerivativeBounds db;
    for (int n = 0; n <= n_max; ++n) {
        const double m = std::pow(a, n + 1);
        db.alpha.push_back(n % 2 == 0 ? Interval(0.0, m) : Interval(-m, 0.0));
        db.beta.push_back(Interval(0.0));
    }
    return db;
}

const char* to_string(Convergence c) {
    switch (c) {
    case Convergence::Converges: return "converges";
    case Convergence::Diverges: return "diverges";
    case Convergence::Marginal: return "marginal";
    }
    return "?";
}

Convergence convergence_classify(const QueueSpec& spec, const GrowthClass& g, bool use_service_pole) {
    if (g.order < 0 || g.type < 0) throw DomainError("growth order and type must be >= 0");
    double radius;
    if (use_service_pole) {
        radius = spec.model().is_deterministic() ? std::numeric_limits<double>::infinity() : spec.model().rate();
    } else {
        radius = std::abs(dominant_pole(spec));
    }
    if (std::isinf(radius)) return Convergence::Converges;
    if (g.order < 1.0) return Convergence::Converges;
    if (g.order > 1.0) return Convergence::Diverges;
    if (std::abs(g.type - radius) <= 1e-9) return Convergence::Marginal;
    return g.type < radius ? Convergence::Converges : Convergence::Diverges;
}

double estimate_growth_type(const Germ& g) {
    const auto& c = g.coeffs;
    double acc = 0.0;
    int cnt = 0;
    for (std::size_t k = c.size() > 6 ? c.size() - 6 : 1; k < c.size(); ++k) {
        if (std::abs(c[k - 1]) == 0.0) continue;
        acc += std::abs(c[k]) / std::abs(c[k - 1]);
        ++cnt;
    }
    return cnt ? acc / cnt : 0.0;
}

} // namespace wfn
