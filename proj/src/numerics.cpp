#include "wfn/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace wfn {

StabilityViolation::StabilityViolation(double rho)
    : Error("stability violated: rho = " + std::to_string(rho) + " >= 1"), rho_(rho) {}

DivergentSeries::DivergentSeries(std::string what, std::vector<double> witness)
    : Error(std::move(what)), witness_(std::move(witness)) {}

// ---------------------------------------------------------------------------

Interval::Interval(double l, double h) : lo(l), hi(h) {
    if (!(l <= h)) {
        std::ostringstream os;
        os << "malformed interval [" << l << ", " << h << "]";
        throw DomainError(os.str());
    }
}

Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

Interval operator*(double s, const Interval& a) {
    if (s >= 0) return {s * a.lo, s * a.hi};
    return {s * a.hi, s * a.lo};
}

Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

// ---------------------------------------------------------------------------

Jet::Jet(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.resize(1);
}

Jet Jet::constant(cplx value, std::size_t order) {
    Jet j(order);
    j.c_[0] = value;
    return j;
}

Jet Jet::variable(cplx s0, std::size_t order) {
    Jet j(order);
    j.c_[0] = s0;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
}

Jet& Jet::operator+=(const Jet& o) {
    const std::size_t n = std::min(c_.size(), o.c_.size());
    c_.resize(n);
    for (std::size_t k = 0; k < n; ++k) c_[k] += o.c_[k];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    const std::size_t n = std::min(c_.size(), o.c_.size());
    c_.resize(n);
    for (std::size_t k = 0; k < n; ++k) c_[k] -= o.c_[k];
    return *this;
}

Jet& Jet::operator*=(cplx s) {
    for (auto& x : c_) x *= s;
    return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator*(Jet a, cplx s) { return a *= s; }
Jet operator*(cplx s, Jet a) { return a *= s; }
Jet operator*(const Jet& a, const Jet& b) { return jet_mul(a, b); }
Jet operator/(const Jet& a, const Jet& b) { return jet_div(a, b); }

Jet operator+(Jet a, cplx s) {
    a[0] += s;
    return a;
}

Jet jet_mul(const Jet& a, const Jet& b) {
    const std::size_t K = std::min(a.order(), b.order());
    Jet r(K);
    for (std::size_t i = 0; i <= K; ++i) {
        if (a[i] == cplx{}) continue;
        for (std::size_t j = 0; i + j <= K; ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

Jet jet_div(const Jet& a, const Jet& b) {
    if (b[0] == cplx{}) throw SingularExpansion("jet division by a series with zero constant term");
    const std::size_t K = std::min(a.order(), b.order());
    Jet r(K);
    const cplx inv = 1.0 / b[0];
    for (std::size_t k = 0; k <= K; ++k) {
        cplx acc = a[k];
        for (std::size_t j = 1; j <= k; ++j) acc -= b[j] * r[k - j];
        r[k] = acc * inv;
    }
    return r;
}

Jet jet_exp(const Jet& a) {
    const std::size_t K = a.order();
    Jet r(K);
    r[0] = std::exp(a[0]);
    for (std::size_t k = 1; k <= K; ++k) {
        cplx acc{};
        for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * a[j] * r[k - j];
        r[k] = acc / static_cast<double>(k);
    }
    return r;
}

Jet jet_pow(const Jet& a, int n) {
    if (n < 0) return jet_div(Jet::constant(1.0, a.order()), jet_pow(a, -n));
    Jet result = Jet::constant(1.0, a.order());
    Jet base = a;
    while (n > 0) {
        if (n & 1) result = jet_mul(result, base);
        n >>= 1;
        if (n > 0) base = jet_mul(base, base);
    }
    return result;
}

Jet jet_shift_pow(const Jet& a, std::size_t k) {
    Jet r(a.order());
    for (std::size_t i = 0; i + k <= a.order(); ++i) r[i + k] = a[i];
    return r;
}

Jet jet_of_rational(cplx p, int degree, cplx s0, std::size_t order) {
    const cplx delta = s0 - p;
    if (delta == cplx{}) throw SingularExpansion("rational jet expanded at its own pole");
    // (delta + h)^(-e) = delta^(-e) sum_k C(-e, k) (h/delta)^k
    Jet r(order);
    cplx term = std::pow(delta, -degree);
    for (std::size_t k = 0; k <= order; ++k) {
        r[k] = term;
        term *= -static_cast<double>(degree + static_cast<int>(k)) / (static_cast<double>(k + 1) * delta);
    }
    return r;
}

Jet jet_exp_linear(cplx c, cplx s0, std::size_t order) {
    Jet r(order);
    cplx term = std::exp(c * s0);
    for (std::size_t k = 0; k <= order; ++k) {
        r[k] = term;
        term *= c / static_cast<double>(k + 1);
    }
    return r;
}

cplx jet_residue(const Jet& regular, int degree) {
    if (degree <= 0) return {};
    if (static_cast<std::size_t>(degree - 1) > regular.order())
        throw SingularExpansion("jet order too low for the requested residue");
    return regular[static_cast<std::size_t>(degree - 1)];
}

cplx jet_eval(const Jet& a, cplx h) {
    cplx acc{};
    for (std::size_t k = a.order() + 1; k-- > 0;) acc = acc * h + a[k];
    return acc;
}

// ---------------------------------------------------------------------------

namespace {

const std::array<double, 171>& factorial_table() {
    static const std::array<double, 171> table = [] {
        std::array<double, 171> t{};
        t[0] = 1.0;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
        return t;
    }();
    return table;
}

} // namespace

double factorial(int n) {
    if (n < 0) throw DomainError("factorial of a negative integer");
    if (n > 170) return std::numeric_limits<double>::infinity();
    return factorial_table()[static_cast<std::size_t>(n)];
}

double binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r < 1e15 ? std::round(r) : r;
}

cplx upper_incomplete_gamma_int(int q, cplx x) {
    if (q < 0) throw DomainError("incomplete gamma needs q >= 0");
    cplx sum{};
    cplx term = 1.0;
    for (int j = 0; j <= q; ++j) {
        sum += term;
        term *= x / static_cast<double>(j + 1);
    }
    return factorial(q) * std::exp(-x) * sum;
}

cplx unit_power_exp_integral(int k, cplx b) {
    if (k < 0) throw DomainError("negative power in exponential moment");
    const double kk = static_cast<double>(k);
    const double ab = std::abs(b);
    if (ab == 0.0) return 1.0 / (kk + 1.0);
    if (ab > kk + 1.0 && ab > 2.0) {
        // k!/b^{k+1} (1 - e^{-b} sum_{j<=k} b^j/j!)
        cplx partial{};
        cplx term = 1.0;
        for (int j = 0; j <= k; ++j) {
            partial += term;
            term *= b / static_cast<double>(j + 1);
        }
        return factorial(k) / std::pow(b, k + 1) * (1.0 - std::exp(-b) * partial);
    }
    constexpr int max_terms = 4000;
    if (b.real() >= 0.0) {
        // e^{-b} sum_j b^j / ((k+1)(k+2)...(k+j+1)); term ratios are below one.
        cplx sum{};
        cplx term = 1.0 / (kk + 1.0);
        for (int j = 0; j < max_terms; ++j) {
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
            term *= b / (kk + static_cast<double>(j) + 2.0);
        }
        return std::exp(-b) * sum;
    }
    // sum_j (-b)^j / (j! (k+j+1)); positive terms for real negative b.
    cplx sum{};
    cplx pw = 1.0;
    for (int j = 0; j < max_terms; ++j) {
        const cplx term = pw / (kk + static_cast<double>(j) + 1.0);
        sum += term;
        if (j > ab && std::abs(term) < 1e-18 * std::abs(sum)) break;
        pw *= -b / static_cast<double>(j + 1);
    }
    return sum;
}

cplx power_exp_integral(int m, cplx b, double L) {
    if (L < 0) throw DomainError("negative integration length");
    if (std::isinf(L)) {
        if (!(b.real() > 0.0)) throw DomainError("divergent exponential moment on [0, inf)");
        return factorial(m) / std::pow(b, m + 1);
    }
    if (L == 0.0) return 0.0;
    return std::pow(L, m + 1) * unit_power_exp_integral(m, b * L);
}

double lambert_w_minus1(double x) {
    const double branch = -std::exp(-1.0);
    if (!(x >= branch - 1e-16 && x < 0.0))
        throw DomainError("lambert_w_minus1 defined on [-1/e, 0) only");
    if (x <= branch) return -1.0;
    // w e^w decreases from 0- to -1/e on (-inf, -1].
    auto f = [x](double w) { return w * std::exp(w) - x; };
    double lo = -50.0;
    double hi = -1.0;
    while (f(lo) < 0.0) lo *= 2.0; // tiny |x| needs a wider bracket
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::abs(lo); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    double w = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double ew = std::exp(w);
        const double d = ew * (w + 1.0);
        if (d == 0.0) break;
        const double next = w - (w * ew - x) / d;
        if (!(next <= -1.0) || std::abs(f(next)) >= std::abs(f(w))) break;
        w = next;
    }
    return w;
}

// ---------------------------------------------------------------------------

ScenarioTable::ScenarioTable(int m_max, int n_max, Scale scale)
    : m_max_(m_max), n_max_(n_max), scale_(scale),
      v_(static_cast<std::size_t>((m_max + 1) * (n_max + 1)), 0.0) {
    if (m_max < 1 || n_max < 2 * m_max)
        throw DomainError("scenario table needs m_max >= 1 and n_max >= 2 m_max");
}

double ScenarioTable::operator()(int m, int n) const {
    if (m < 1 || m > m_max_ || n < 2 * m || n > n_max_) return 0.0;
    return v_[static_cast<std::size_t>(m * (n_max_ + 1) + n)];
}

void ScenarioTable::set(int m, int n, double v) {
    v_.at(static_cast<std::size_t>(m * (n_max_ + 1) + n)) = v;
}

ScenarioTable scenario_counts(int m_max, int n_max) {
    ScenarioTable t(m_max, n_max, ScenarioTable::Scale::DividedByFactorial);
    for (int n = 2; n <= n_max; ++n) t.set(1, n, 1.0 / factorial(n));
    for (int m = 1; m < m_max; ++m) {
        for (int n = 2 * (m + 1); n <= n_max; ++n) {
            double acc = 0.0;
            for (int p = 2 * m; p <= n - 2; ++p) acc += t(m, p) / factorial(n - p);
            t.set(m + 1, n, acc);
        }
    }
    return t;
}

ScenarioTable scenario_counts_refined(int m_max, int n_max) {
    ScenarioTable t(m_max, n_max, ScenarioTable::Scale::DividedByFactorial);
    for (int n = 2; n <= n_max; ++n) t.set(1, n, 1.0 / factorial(n));
    for (int m = 2; m <= m_max; ++m) {
        for (int n = 2 * m; n <= n_max; ++n) {
            const double md = static_cast<double>(m);
            t.set(m, n, md / static_cast<double>(n) * (t(m, n - 1) + t(m - 1, n - 2)));
        }
    }
    return t;
}

ScenarioTable erlang_scenario_counts(int q, int m_max, int n_max) {
    if (q < 1) throw DomainError("Erlang shape must be >= 1");
    ScenarioTable t(m_max, n_max, ScenarioTable::Scale::Raw);
    for (int n = 2; n <= n_max; ++n) t.set(1, n, binomial(n + q - 1, q - 1));
    for (int m = 1; m < m_max; ++m) {
        for (int n = 2 * (m + 1); n <= n_max; ++n) {
            double acc = 0.0;
            for (int p = 2 * m; p <= n - 2; ++p) acc += binomial(q + n - p - 1, q - 1) * t(m, p);
            t.set(m + 1, n, acc);
        }
    }
    return t;
}

} // namespace wfn
