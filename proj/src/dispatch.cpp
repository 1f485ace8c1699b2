#include "wfn/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace wfn {

namespace {

constexpr int gauss_nodes = 40;
constexpr double max_chunk = 1.0;

struct GaussRule {
    std::vector<double> x, w;
};

// Gauss-Legendre on [-1, 1] by Newton iteration on P_N.
const GaussRule& gauss_rule() {
    static const GaussRule rule = [] {
        GaussRule r;
        const int N = gauss_nodes;
        r.x.resize(N);
        r.w.resize(N);
        for (int i = 0; i < N; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= N; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N * (z * p1 - p0) / (z * z - 1.0);
                const double step = p1 / dp;
                z -= step;
                if (std::abs(step) < 1e-16) break;
            }
            r.x[static_cast<std::size_t>(i)] = z;
            r.w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        return r;
    }();
    return rule;
}

// int_a^b g, chunked Gauss-Legendre.
template <class F>
double integrate(F&& g, double a, double b) {
    if (!(b > a)) return 0.0;
    const auto& rule = gauss_rule();
    const int chunks = std::max(1, static_cast<int>(std::ceil((b - a) / max_chunk)));
    const double h = (b - a) / chunks;
    double acc = 0.0;
    for (int c = 0; c < chunks; ++c) {
        const double lo = a + c * h;
        const double mid = lo + 0.5 * h;
        double s = 0.0;
        for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * g(mid + 0.5 * h * rule.x[i]);
        acc += 0.5 * h * s;
    }
    return acc;
}

// int_L^inf of the terms (global variable), every exponent with Re a > 0 or zero term.
double integrate_tail(const std::vector<ExpPolyTerm>& terms, double L) {
    cplx acc{};
    for (const auto& t : recenter(terms, L)) {
        if (t.kappa == cplx{}) continue;
        if (!(t.a.real() > 0.0)) throw DomainError("tail integral does not converge");
        acc += t.kappa * factorial(t.m) / std::pow(t.a, t.m + 1);
    }
    return acc.real();
}

std::vector<ExpPolyTerm> product(const std::vector<ExpPolyTerm>& f, const std::vector<ExpPolyTerm>& g) {
    std::vector<ExpPolyTerm> out;
    for (const auto& x : f)
        for (const auto& y : g) out.push_back({x.kappa * y.kappa, x.m + y.m, x.a + y.a});
    return out;
}

class BandEval {
public:
    BandEval(const BandCost& c) : c_(c) {
        auto G = PiecewiseExpPoly::from_terms(c.tail).antiderivative();
        const auto piece = G.pieces().front().expanded();
        g_terms_ = piece.terms;
        g_const_ = piece.constant;
        g_tau_ = G.real(c.tau);
        C_tau_ = interior_integral(c.tau);
    }

    double cost(double x) const {
        if (x < c_.tau) return (c_.poly ? c_.poly->evaluate(x) : 0.0) + c_.shift;
        return evaluate_terms(c_.tail, x).real();
    }

    // int_0^x of the cost.
    double C(double x) const {
        if (x < c_.tau) return interior_integral(x);
        return C_tau_ + (evaluate_terms(g_terms_, x) + g_const_).real() - g_tau_;
    }

    // G(t + delta) as terms in t, constant dropped.
    std::vector<ExpPolyTerm> shifted_antiderivative(double delta) const { return recenter(g_terms_, delta); }

    const BandCost& band() const { return c_; }

private:
    double interior_integral(double x) const { return (c_.poly ? c_.poly->integral(x) : 0.0) + c_.shift * x; }

    const BandCost& c_;
    std::vector<ExpPolyTerm> g_terms_;
    cplx g_const_;
    double g_tau_ = 0.0;
    double C_tau_ = 0.0;
};

void require_band_model(const QueueSpec& spec) {
    stability_check(spec);
    if (spec.model().is_deterministic()) throw UnsupportedModel("band evaluation needs exponential or Erlang service");
    if (spec.has_setup()) throw UnsupportedModel("band evaluation assumes the setup service equals the service");
}

} // namespace

double band_increment(const QueueSpec& spec, const std::vector<ExpPolyTerm>& density, const BandCost& cost, double u,
                      double d) {
    require_band_model(spec);
    if (u < 0.0 || d < 0.0) throw DomainError("backlog and service time must be >= 0");
    const BandEval b(cost);
    const double tau = cost.tau;
    double acc = (1.0 - spec.rho()) * (b.C(u + d) - b.C(u));

    // t in [0, tau]: split where u + t or u + d + t crosses tau.
    std::vector<double> cuts{0.0, tau};
    for (double c : {tau - u - d, tau - u})
        if (c > 0.0 && c < tau) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    auto h = [&](double t) { return evaluate_terms(density, t).real() * (b.C(u + d + t) - b.C(u + t)); };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) acc += integrate(h, cuts[i], cuts[i + 1]);

    // t >= tau: both arguments sit in the tail.
    auto diff = b.shifted_antiderivative(u + d);
    for (auto t : b.shifted_antiderivative(u)) {
        t.kappa = -t.kappa;
        diff.push_back(t);
    }
    acc += integrate_tail(product(density, canonical_terms(std::move(diff))), tau);
    return spec.gain() * acc;
}

double band_increment(const QueueSpec& spec, const BandCost& cost, double u, double d) {
    require_band_model(spec);
    return band_increment(spec, waiting_density_terms(spec), cost, u, d);
}

double band_mean_cost(const QueueSpec& spec, const std::vector<ExpPolyTerm>& density, const BandCost& cost) {
    require_band_model(spec);
    const BandEval b(cost);
    double acc = (1.0 - spec.rho()) * b.cost(0.0);
    acc += integrate([&](double t) { return evaluate_terms(density, t).real() * b.cost(t); }, 0.0, cost.tau);
    acc += integrate_tail(product(density, cost.tail), cost.tau);
    return acc;
}

double band_mean_cost(const QueueSpec& spec, const BandCost& cost) {
    require_band_model(spec);
    return band_mean_cost(spec, waiting_density_terms(spec), cost);
}

ServerSpec ServerSpec::exact(std::string id, QueueSpec q, std::vector<ExpPolyTerm> cost) {
    ServerSpec s{std::move(id), std::move(q), std::move(cost), {}, {}, {}, ApproxMethod::NearBest};
    s.cost = [terms = *s.exact_cost](double u) { return evaluate_terms(terms, u).real(); };
    return s;
}

ServerSpec ServerSpec::example7(std::string id, QueueSpec q, double a) {
    ServerSpec s{std::move(id), std::move(q), std::nullopt, {}, {}, {}, ApproxMethod::NearBest};
    s.cost = example7_cost(a, 1.0).f;
    s.modulus = [a](double tau, double delta) { return example7_modulus(a, tau, delta); };
    s.tail = [a](double tau) { return example7_tail(a, tau); };
    return s;
}

AdmissionEvaluator::AdmissionEvaluator(ServerSpec server) : server_(std::move(server)) {
    stability_check(server_.queue);
    if (!is_exact()) {
        if (!server_.cost) throw DomainError("server " + server_.id + " has no cost");
        if (!server_.tail) throw DomainError("server " + server_.id + " has no tail envelope");
        if (!server_.queue.model().is_deterministic()) density_ = waiting_density_terms(server_.queue);
    }
}

double AdmissionEvaluator::omega(double tau, double delta) const {
    if (server_.modulus) return server_.modulus(tau, std::min(delta, tau));
    return modulus_estimate(SampledCost{server_.cost, tau, {}}, delta);
}

double AdmissionEvaluator::eta(double tau, int n) {
    if (is_exact()) return 0.0;
    const auto key = std::make_pair(tau, n);
    if (auto it = eta_cache_.find(key); it != eta_cache_.end()) return it->second;
    const double e = server_.method == ApproxMethod::Bernstein ? 1.5 * omega(tau, tau / std::sqrt(double(n)))
                                                               : 6.0 * omega(tau, tau / (2.0 * n));
    eta_cache_.emplace(key, e);
    return e;
}

const PolyApprox& AdmissionEvaluator::approx(double tau, int n) {
    const auto key = std::make_pair(tau, n);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    SampledCost c{server_.cost, tau, {}};
    if (server_.modulus) c.exact_modulus = [m = server_.modulus, tau](double delta) { return m(tau, delta); };
    auto p = server_.method == ApproxMethod::Bernstein ? bernstein(c, n) : near_best(c, n);
    return cache_.emplace(key, std::move(p)).first->second;
}

Interval AdmissionEvaluator::exact_admission(double u, double d) {
    if (!exact_w_) exact_w_ = w_for_exp_poly_cost(server_.queue, *server_.exact_cost);
    return Interval(admission_cost(*exact_w_, u, d).real());
}

std::pair<double, double> AdmissionEvaluator::band(const BandCost& cost, double u, double d) {
    const auto& q = server_.queue;
    if (!q.model().is_deterministic())
        return {band_increment(q, density_, cost, u, d), band_mean_cost(q, density_, cost)};
    // Cellwise construction through the monomial form.
    PiecewiseCostSpec spec;
    spec.tau = cost.tau;
    if (cost.poly) spec = PiecewiseCostSpec::polynomial(cost.poly->coeffs, cost.tau);
    if (cost.shift != 0.0) spec.interior.push_back({cost.shift, 0, 0.0});
    spec.interior = canonical_terms(std::move(spec.interior));
    spec.tail = cost.tail;
    const auto r = w_piecewise(q, spec);
    return {(r.w.evaluate(u + d) - r.w.evaluate(u)).real(), r.mean_cost.real()};
}

namespace {

Interval ordered(double lo, double hi) {
    if (lo > hi) {
        if (lo - hi > 1e-9 * (1.0 + std::abs(lo))) throw Error("admission bounds out of order");
        std::swap(lo, hi);
    }
    return Interval(lo, hi);
}

} // namespace

Interval AdmissionEvaluator::admission(double u, double d, double tau, int n) {
    if (is_exact()) return exact_admission(u, d);
    const auto& p = approx(tau, n);
    const auto tail = server_.tail(tau);
    const auto [dw_lo, cbar_lo] = band(BandCost{&p, -p.eta, tau, tail.lower}, u, d);
    const auto [dw_hi, cbar_hi] = band(BandCost{&p, p.eta, tau, tail.upper}, u, d);
    // w(u + d) - w(u) is monotone in the cost, so the increment itself is bracketed.
    const double k = server_.queue.gain() * d;
    return ordered(dw_lo - k * cbar_hi, dw_hi - k * cbar_lo);
}

double AdmissionEvaluator::tail_width(double u, double d, double tau) {
    if (is_exact()) return 0.0;
    const auto tail = server_.tail(tau);
    const auto [dw_lo, cbar_lo] = band(BandCost{nullptr, 0.0, tau, tail.lower}, u, d);
    const auto [dw_hi, cbar_hi] = band(BandCost{nullptr, 0.0, tau, tail.upper}, u, d);
    return (dw_hi - dw_lo) + server_.queue.gain() * d * (cbar_hi - cbar_lo);
}

double AdmissionEvaluator::indicator_magnitude(double u, double d, double tau) {
    const auto [dw, cbar] = band(BandCost{nullptr, 1.0, tau, {}}, u, d);
    return std::abs(dw) + server_.queue.gain() * d * std::abs(cbar);
}

Interval admission_interval(const ServerSpec& server, double u, double d, double tau, int n) {
    AdmissionEvaluator ev(server);
    return ev.admission(u, d, tau, n);
}

std::vector<std::size_t> undominated(const std::vector<Interval>& iv) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < iv.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < iv.size() && !dominated; ++j) dominated = j != i && iv[j].hi < iv[i].lo;
        if (!dominated) out.push_back(i);
    }
    return out;
}

namespace {

double choose_tau(AdmissionEvaluator& ev, double u, double d, double target, const DispatchOptions& opt) {
    double tau = opt.tau_min;
    while (tau < opt.tau_max && ev.tail_width(u, d, tau) > target) tau = std::min(2.0 * tau, opt.tau_max);
    if (tau == opt.tau_min || ev.tail_width(u, d, tau) > target) return tau;
    double bad = tau / 2.0, good = tau;
    for (int i = 0; i < opt.tau_bisections; ++i) {
        const double mid = 0.5 * (bad + good);
        (ev.tail_width(u, d, mid) <= target ? good : bad) = mid;
    }
    return good;
}

int choose_n(AdmissionEvaluator& ev, double u, double d, double tau, double target, const DispatchOptions& opt) {
    const double mag = ev.indicator_magnitude(u, d, tau);
    auto ok = [&](int n) { return ev.eta(tau, n) * mag <= target; };
    int n = 1;
    while (n < opt.n_max && !ok(n)) n = std::min(2 * n, opt.n_max);
    if (n == 1 || !ok(n)) return n;
    int bad = n / 2, good = n;
    while (good - bad > 1) {
        const int mid = (bad + good) / 2;
        (ok(mid) ? good : bad) = mid;
    }
    return good;
}

} // namespace

DecisionRecord dispatch_decide(std::vector<AdmissionEvaluator>& fleet, const std::vector<double>& u,
                               const std::vector<double>& d, const DispatchOptions& opt) {
    const std::size_t k = fleet.size();
    if (k == 0) throw DomainError("empty fleet");
    if (u.size() != k || d.size() != k) throw DomainError("backlog and service vectors must match the fleet");
    if (opt.t_max < 1 || !(opt.eps0 > 0.0)) throw DomainError("tolerance schedule must be positive and finite");

    DecisionRecord rec;
    rec.intervals.assign(k, Interval());
    rec.taus.assign(k, 0.0);
    rec.ns.assign(k, 0);
    std::vector<std::size_t> alive(k);
    for (std::size_t i = 0; i < k; ++i) alive[i] = i;

    for (int t = 0; t < opt.t_max; ++t) {
        const double eps = opt.eps0 * std::ldexp(1.0, -t);
        bool changed = t == 0;
        int n_round = 0;
        for (std::size_t i : alive) {
            auto& ev = fleet[i];
            double tau = 0.0;
            int n = 0;
            if (!ev.is_exact()) {
                tau = choose_tau(ev, u[i], d[i], eps / 2.0, opt);
                n = choose_n(ev, u[i], d[i], tau, eps / 4.0, opt);
            }
            changed = changed || tau != rec.taus[i] || n != rec.ns[i];
            rec.taus[i] = tau;
            rec.ns[i] = n;
            const Interval fresh = ev.admission(u[i], d[i], tau, n);
            // Every round's interval is valid, so keep their intersection.
            rec.intervals[i] = t == 0 ? fresh
                                      : Interval(std::max(fresh.lo, rec.intervals[i].lo),
                                                 std::max(std::max(fresh.lo, rec.intervals[i].lo),
                                                          std::min(fresh.hi, rec.intervals[i].hi)));
            rec.trace.push_back({t, eps, i, tau, n, fresh});
            n_round = std::max(n_round, n);
        }
        if (!changed) break;
        rec.rounds = t + 1;
        rec.n_star = n_round;

        std::vector<Interval> live;
        for (std::size_t i : alive) live.push_back(rec.intervals[i]);
        std::vector<std::size_t> next;
        for (std::size_t j : undominated(live)) next.push_back(alive[j]);
        alive = std::move(next);
        if (alive.size() == 1) {
            rec.winner = alive.front();
            break;
        }
    }
    rec.survivors = alive;
    return rec;
}

DecisionRecord dispatch_decide(const std::vector<ServerSpec>& fleet, const std::vector<double>& u,
                               const std::vector<double>& d, const DispatchOptions& opt) {
    std::vector<AdmissionEvaluator> ev;
    for (const auto& s : fleet) ev.emplace_back(s);
    return dispatch_decide(ev, u, d, opt);
}

std::vector<PolicyPoint> policy_map(const std::vector<ServerSpec>& fleet, const std::vector<double>& grid_u1,
                                    const std::vector<double>& grid_u2, const std::vector<double>& d,
                                    const DispatchOptions& opt) {
    if (fleet.size() != 2) throw DomainError("policy map needs exactly two servers");
    std::vector<AdmissionEvaluator> ev;
    for (const auto& s : fleet) ev.emplace_back(s);
    std::vector<PolicyPoint> out;
    for (double u1 : grid_u1)
        for (double u2 : grid_u2) {
            const auto rec = dispatch_decide(ev, {u1, u2}, d, opt);
            out.push_back({u1, u2, rec.winner, rec.n_star, rec.rounds});
        }
    return out;
}

std::string policy_csv(const std::vector<ServerSpec>& fleet, const std::vector<PolicyPoint>& points) {
    std::ostringstream os;
    os.precision(10);
    os << "u1,u2,winner,n_star,rounds\n";
    for (const auto& p : points)
        os << p.u1 << ',' << p.u2 << ',' << (p.winner ? fleet[*p.winner].id : std::string("none")) << ',' << p.n_star
           << ',' << p.rounds << '\n';
    return os.str();
}

} // namespace wfn
