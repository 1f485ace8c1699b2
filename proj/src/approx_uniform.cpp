#include "wfn/approx_uniform.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

namespace wfn {

namespace {

constexpr int modulus_grid = 4096;
constexpr double modulus_inflation = 1.05;
constexpr int roundoff_grid = 1000;

void require_degree(int n) {
    if (n < 1) throw DomainError("approximation order must be >= 1");
}

void require_cost(const SampledCost& c) {
    if (!c.f) throw DomainError("cost evaluator missing");
    if (!(c.tau > 0.0) || !std::isfinite(c.tau)) throw DomainError("approximation range must be finite and > 0");
}

double horner(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
}

double de_casteljau(std::vector<double> b, double t) {
    for (std::size_t r = 1; r < b.size(); ++r)
        for (std::size_t i = 0; i + r < b.size(); ++i) b[i] = (1.0 - t) * b[i] + t * b[i + 1];
    return b.empty() ? 0.0 : b[0];
}

// sum_k g_k T_k(x)
double clenshaw(const std::vector<double>& g, double x) {
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = g.size(); k-- > 1;) {
        const double b0 = g[k] + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return (g.empty() ? 0.0 : g[0]) + x * b1 - b2;
}

// Chebyshev coefficients of an antiderivative of sum_k g_k T_k.
std::vector<double> chebyshev_integral(const std::vector<double>& g) {
    const std::size_t n = g.size();
    std::vector<double> A(n + 1, 0.0);
    auto at = [&](std::size_t k) { return k < n ? g[k] : 0.0; };
    for (std::size_t k = 1; k <= n; ++k) {
        const double prev = (k == 1) ? 2.0 * at(0) : at(k - 1);
        A[k] = (prev - at(k + 1)) / (2.0 * static_cast<double>(k));
    }
    return A;
}

// Sup over |i - j| <= w of |y_i - y_j| (sliding max - min).
double sliding_oscillation(const std::vector<double>& y, std::size_t w) {
    std::deque<std::size_t> hi, lo;
    double best = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        while (!hi.empty() && y[hi.back()] <= y[i]) hi.pop_back();
        while (!lo.empty() && y[lo.back()] >= y[i]) lo.pop_back();
        hi.push_back(i);
        lo.push_back(i);
        while (hi.front() + w < i) hi.pop_front();
        while (lo.front() + w < i) lo.pop_front();
        best = std::max(best, y[hi.front()] - y[lo.front()]);
    }
    return best;
}

void measure_roundoff(PolyApprox& p) {
    double r = 0.0;
    for (int i = 0; i < roundoff_grid; ++i) {
        const double u = p.tau * i / (roundoff_grid - 1);
        r = std::max(r, std::abs(p.evaluate(u) - p.evaluate_monomial(u)));
    }
    p.roundoff = r;
}

} // namespace

const char* to_string(ApproxMethod m) { return m == ApproxMethod::Bernstein ? "bernstein" : "near_best"; }

double PolyApprox::evaluate(double u) const {
    if (method == ApproxMethod::Bernstein) return de_casteljau(basis, u / tau);
    return clenshaw(basis, 2.0 * u / tau - 1.0);
}

double PolyApprox::evaluate_monomial(double u) const { return horner(coeffs, u); }

double PolyApprox::integral(double u) const {
    if (method == ApproxMethod::Bernstein) {
        const std::size_t n = basis.size() - 1;
        std::vector<double> S(n + 2, 0.0);
        for (std::size_t j = 1; j <= n + 1; ++j) S[j] = S[j - 1] + basis[j - 1];
        return tau / static_cast<double>(n + 1) * de_casteljau(std::move(S), u / tau);
    }
    const auto A = chebyshev_integral(basis);
    double at_minus_one = 0.0;
    for (std::size_t k = 0; k < A.size(); ++k) at_minus_one += (k % 2 == 0 ? 1.0 : -1.0) * A[k];
    return 0.5 * tau * (clenshaw(A, 2.0 * u / tau - 1.0) - at_minus_one);
}

PolyApprox bernstein(const SampledCost& cost, int n) {
    require_degree(n);
    require_cost(cost);
    PolyApprox p;
    p.method = ApproxMethod::Bernstein;
    p.tau = cost.tau;
    for (int k = 0; k <= n; ++k) p.basis.push_back(cost.f(cost.tau * k / n));
    // Forward differences: coefficient of (u/tau)^k is C(n,k) Delta^k b_0.
    auto d = p.basis;
    for (int k = 0; k <= n; ++k) {
        p.coeffs.push_back(binomial(n, k) * d[0] / std::pow(cost.tau, k));
        for (std::size_t i = 0; i + 1 < d.size() - static_cast<std::size_t>(k); ++i) d[i] = d[i + 1] - d[i];
    }
    p.eta = 1.5 * modulus(cost, cost.tau / std::sqrt(static_cast<double>(n)));
    measure_roundoff(p);
    return p;
}

std::vector<double> korovkin_weights(int n) {
    require_degree(n);
    const double h = std::numbers::pi / (n + 2);
    double den = 0.0;
    for (int q = 0; q <= n; ++q) den += std::pow(std::sin((q + 1) * h), 2);
    std::vector<double> rho(static_cast<std::size_t>(n + 1));
    rho[0] = 1.0;
    rho[1] = std::cos(h);
    for (int k = 2; k <= n; ++k) {
        double num = 0.0;
        for (int q = 0; q <= n - k; ++q) num += std::sin((q + 1) * h) * std::sin((q + k + 1) * h);
        rho[static_cast<std::size_t>(k)] = num / den;
    }
    return rho;
}

std::vector<double> cos_poly(int k) {
    if (k < 0) throw DomainError("cosine polynomial index must be >= 0");
    std::vector<double> prev{1.0}, cur{0.0, 1.0};
    if (k == 0) return prev;
    for (int j = 1; j < k; ++j) {
        std::vector<double> next(cur.size() + 1, 0.0);
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += 2.0 * cur[i];
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

double cos_poly_coeff(int k, int q) {
    if (k < 0 || q < 0) throw DomainError("indices must be >= 0");
    if (k == 0) return q == 0 ? 1.0 : 0.0;
    if (q > k || (k - q) % 2 != 0) return 0.0;
    const int j = (k - q) / 2;
    const double sign = j % 2 == 0 ? 1.0 : -1.0;
    return 0.5 * k * sign * factorial(k - j - 1) / (factorial(j) * factorial(k - 2 * j)) * std::pow(2.0, k - 2 * j);
}

std::vector<double> fourier_coeffs(const SampledCost& cost, int n) {
    return fourier_coeffs(cost, n, std::max(512, 16 * n));
}

std::vector<double> fourier_coeffs(const SampledCost& cost, int n, int nodes) {
    require_cost(cost);
    if (n < 0) throw DomainError("order must be >= 0");
    std::vector<double> values(static_cast<std::size_t>(nodes)), theta(values.size());
    for (int j = 0; j < nodes; ++j) {
        theta[static_cast<std::size_t>(j)] = (j + 0.5) * std::numbers::pi / nodes;
        values[static_cast<std::size_t>(j)] = cost.f(0.5 * cost.tau * (1.0 + std::cos(theta[static_cast<std::size_t>(j)])));
    }
    std::vector<double> alpha(static_cast<std::size_t>(n + 1), 0.0);
    for (int k = 0; k <= n; ++k) {
        double s = 0.0;
        for (int j = 0; j < nodes; ++j)
            s += values[static_cast<std::size_t>(j)] * std::cos(k * theta[static_cast<std::size_t>(j)]);
        alpha[static_cast<std::size_t>(k)] = s / nodes;
    }
    return alpha;
}

PolyApprox near_best(const SampledCost& cost, int n) {
    require_degree(n);
    require_cost(cost);
    const auto alpha = fourier_coeffs(cost, n);
    const auto rho = korovkin_weights(n);
    PolyApprox p;
    p.method = ApproxMethod::NearBest;
    p.tau = cost.tau;
    p.basis.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
        const auto K = static_cast<std::size_t>(k);
        p.basis[K] = rho[K] * (k == 0 ? alpha[K] : 2.0 * alpha[K]);
    }
    // Polynomial in x = cos t, then x = 2u/tau - 1.
    std::vector<double> in_x(static_cast<std::size_t>(n + 1), 0.0);
    for (int k = 0; k <= n; ++k) {
        const auto pk = cos_poly(k);
        for (std::size_t i = 0; i < pk.size(); ++i) in_x[i] += p.basis[static_cast<std::size_t>(k)] * pk[i];
    }
    const double s = 2.0 / cost.tau;
    p.coeffs.assign(static_cast<std::size_t>(n + 1), 0.0);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= i; ++j)
            p.coeffs[static_cast<std::size_t>(j)] +=
                in_x[static_cast<std::size_t>(i)] * binomial(i, j) * std::pow(s, j) * ((i - j) % 2 == 0 ? 1.0 : -1.0);
    p.eta = 6.0 * modulus(cost, cost.tau / (2.0 * n));
    measure_roundoff(p);
    return p;
}

double near_best_cosine_sum(const SampledCost& cost, int n, double u) {
    const auto alpha = fourier_coeffs(cost, n);
    const auto rho = korovkin_weights(n);
    const double t = std::acos(std::clamp(2.0 * u / cost.tau - 1.0, -1.0, 1.0));
    double s = alpha[0];
    for (int k = 1; k <= n; ++k)
        s += rho[static_cast<std::size_t>(k)] * 2.0 * alpha[static_cast<std::size_t>(k)] * std::cos(k * t);
    return s;
}

double modulus_estimate(const SampledCost& cost, double delta) {
    require_cost(cost);
    if (!(delta > 0.0)) throw DomainError("modulus step must be > 0");
    delta = std::min(delta, cost.tau);
    const double h = cost.tau / (modulus_grid - 1);
    std::vector<double> y(modulus_grid);
    for (int i = 0; i < modulus_grid; ++i) y[static_cast<std::size_t>(i)] = cost.f(i * h);
    const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(delta / h * (1.0 + 1e-12))));
    return modulus_inflation * sliding_oscillation(y, w);
}

double modulus(const SampledCost& cost, double delta) {
    if (cost.exact_modulus) return cost.exact_modulus(std::min(delta, cost.tau));
    return modulus_estimate(cost, delta);
}

double approximation_error(const SampledCost& cost, const PolyApprox& p, int grid) {
    double e = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double u = cost.tau * i / (grid - 1);
        e = std::max(e, std::abs(cost.f(u) - p.evaluate(u)));
    }
    return e;
}

SampledCost example7_cost(double a, double tau) {
    if (!(a > 0.0) || !(tau > 0.0)) throw DomainError("scale and range must be > 0");
    SampledCost c;
    c.f = [a](double u) { return u * u / (a * a + u * u); };
    c.tau = tau;
    c.exact_modulus = [a, tau](double delta) { return example7_modulus(a, tau, delta); };
    return c;
}

double example7_modulus(double a, double tau, double delta) {
    if (!(delta >= 0.0)) throw DomainError("modulus step must be >= 0");
    auto c = [a](double u) { return u * u / (a * a + u * u); };
    if (delta >= tau) return c(tau) - c(0.0);
    const double h2 = 0.25 * delta * delta;
    const double a2 = a * a;
    // Midpoint of the steepest window, clipped to the range.
    double mid = std::sqrt((h2 - a2 + 2.0 * std::sqrt(a2 * a2 + a2 * h2 + h2 * h2)) / 3.0);
    mid = std::clamp(mid, 0.5 * delta, tau - 0.5 * delta);
    return c(mid + 0.5 * delta) - c(mid - 0.5 * delta);
}

TailEnvelope example7_tail(double a, double tau) {
    const double ct = tau * tau / (a * a + tau * tau);
    const double k = 2.0 * tau / (a * a + tau * tau);
    TailEnvelope t;
    t.lower = {{ct, 0, 0.0}};
    // 1 - (1 - c(tau)) e^{k tau} e^{-k u}
    t.upper = {{1.0, 0, 0.0}, {-(1.0 - ct) * std::exp(k * tau), 0, k}};
    return t;
}

IntervalCost interval_cost(const SampledCost& cost, double tau, int n, const TailEnvelope& tail, ApproxMethod method) {
    SampledCost on_range = cost;
    on_range.tau = tau;
    IntervalCost out;
    out.approx = method == ApproxMethod::Bernstein ? bernstein(on_range, n) : near_best(on_range, n);
    auto shifted = [&](double by) {
        auto c = out.approx.coeffs;
        c[0] += by;
        return PiecewiseCostSpec::polynomial(c, tau);
    };
    out.lower = shifted(-out.approx.eta);
    out.lower.tail = tail.lower;
    out.upper = shifted(out.approx.eta);
    out.upper.tail = tail.upper;
    return out;
}

std::vector<cplx> periodic_fourier(const PeriodicCost& cost, int n) {
    if (!cost.f) throw DomainError("cost evaluator missing");
    if (!(cost.period > 0.0)) throw DomainError("period must be > 0");
    const int N = std::max(512, 16 * n);
    std::vector<double> y(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) y[static_cast<std::size_t>(j)] = cost.f(cost.period * j / N);
    std::vector<cplx> alpha(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
        cplx s{};
        for (int j = 0; j < N; ++j)
            s += y[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * std::numbers::pi * k * j / N);
        alpha[static_cast<std::size_t>(k)] = s / static_cast<double>(N);
    }
    return alpha;
}

double periodic_modulus(const PeriodicCost& cost, double delta) {
    if (cost.exact_modulus) return cost.exact_modulus(delta);
    if (!(delta > 0.0)) throw DomainError("modulus step must be > 0");
    // Two periods cover every window of width <= period.
    delta = std::min(delta, cost.period);
    const double h = cost.period / modulus_grid;
    std::vector<double> y(2 * modulus_grid + 1);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = cost.f(static_cast<double>(i) * h);
    const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(delta / h * (1.0 + 1e-12))));
    return modulus_inflation * sliding_oscillation(y, w);
}

IntervalFn periodic_bounds(const QueueSpec& spec, const PeriodicCost& cost, int n) {
    stability_check(spec);
    require_degree(n);
    if (spec.has_setup()) throw UnsupportedModel("periodic bounds assume the setup service equals the service");
    const auto alpha = periodic_fourier(cost, n);
    const auto rho = korovkin_weights(n);
    const double T = cost.period;
    std::vector<ExpPolyTerm> terms{{alpha[0], 0, 0.0}};
    for (int k = 1; k <= n; ++k) {
        const auto K = static_cast<std::size_t>(k);
        const cplx a(0.0, 2.0 * std::numbers::pi * k / T);
        terms.push_back({rho[K] * alpha[K], 0, -a});
        terms.push_back({rho[K] * std::conj(alpha[K]), 0, a});
    }
    const double eta = 6.0 * periodic_modulus(cost, T / (n * std::numbers::pi));
    const double gain = spec.gain();

    const auto r = w_for_exp_poly_cost(spec, terms);
    const cplx at_zero = evaluate_terms(terms, 0.0);
    const double mean = mean_cost_from_w(spec, r.w, r.wprime, -at_zero).real();
    auto with_slope = [&](double s) { return r.w + PiecewiseExpPoly::from_terms({{s, 1, 0.0}}); };
    const double slack = spec.rho() * eta;
    return {with_slope(-gain * eta), with_slope(gain * eta), Interval(mean - slack, mean + slack)};
}

} // namespace wfn
