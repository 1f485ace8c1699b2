#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wfn {

using cplx = std::complex<double>;

// Error hierarchy. Every library failure derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SingularExpansion : public Error {
public:
    using Error::Error;
};

class PoleError : public Error {
public:
    using Error::Error;
};

class UnsupportedModel : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class StabilityViolation : public Error {
public:
    explicit StabilityViolation(double rho);
    double rho() const noexcept { return rho_; }

private:
    double rho_;
};

// Raised when a germ series has no finite sum. The witness holds |partial sum|
// for every truncation index that was tried.
class DivergentSeries : public Error {
public:
    DivergentSeries(std::string what, std::vector<double> witness);
    const std::vector<double>& witness() const noexcept { return witness_; }

private:
    std::vector<double> witness_;
};

// ---------------------------------------------------------------------------
// Intervals on the real line.

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    explicit Interval(double x) : lo(x), hi(x) {}
    Interval(double l, double h);

    double width() const noexcept { return hi - lo; }
    double mid() const noexcept { return 0.5 * (lo + hi); }
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(double s, const Interval& a);
Interval hull(const Interval& a, const Interval& b);

inline Interval iv_add(const Interval& a, const Interval& b) { return a + b; }
inline Interval iv_sub(const Interval& a, const Interval& b) { return a - b; }
inline Interval iv_scale(const Interval& a, double s) { return s * a; }
inline bool iv_contains(const Interval& a, double x) { return a.contains(x); }
inline double iv_width(const Interval& a) { return a.width(); }
// Strict dominance: every element of a is below every element of b.
inline bool iv_lt(const Interval& a, const Interval& b) { return a.hi < b.lo; }

// ---------------------------------------------------------------------------
// Truncated power series c_0 + c_1 h + ... + c_K h^K around an expansion point.

class Jet {
public:
    explicit Jet(std::size_t order = 0) : c_(order + 1) {}
    explicit Jet(std::vector<cplx> coeffs);

    static Jet constant(cplx value, std::size_t order);
    // The identity map s -> s expanded at s0.
    static Jet variable(cplx s0, std::size_t order);

    std::size_t order() const noexcept { return c_.size() - 1; }
    cplx operator[](std::size_t k) const { return c_[k]; }
    cplx& operator[](std::size_t k) { return c_[k]; }
    std::span<const cplx> coeffs() const noexcept { return c_; }

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(cplx s);

private:
    std::vector<cplx> c_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(Jet a);
Jet operator*(Jet a, cplx s);
Jet operator*(cplx s, Jet a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, cplx s);

Jet jet_mul(const Jet& a, const Jet& b);
// Throws SingularExpansion when the divisor has a zero constant term.
Jet jet_div(const Jet& a, const Jet& b);
Jet jet_exp(const Jet& a);
// Integer power; negative exponents go through jet_div.
Jet jet_pow(const Jet& a, int n);
// Multiply by h^k, truncating at the original order.
Jet jet_shift_pow(const Jet& a, std::size_t k);
// Jet of (s - p)^(-degree) expanded at s0 != p.
Jet jet_of_rational(cplx p, int degree, cplx s0, std::size_t order);
// Jet of e^(c s) expanded at s0.
Jet jet_exp_linear(cplx c, cplx s0, std::size_t order);
// Residue at s0 of g(s)/(s - s0)^degree where jet is the expansion of g at s0.
cplx jet_residue(const Jet& regular, int degree);
cplx jet_eval(const Jet& a, cplx h);

// ---------------------------------------------------------------------------
// Special functions.

// Gamma(q+1, x) = q! e^{-x} sum_{j<=q} x^j / j!
cplx upper_incomplete_gamma_int(int q, cplx x);

// int_0^1 t^k e^{-b t} dt, evaluated without cancellation for any complex b.
cplx unit_power_exp_integral(int k, cplx b);

// int_0^L v^m e^{-b v} dv, L may be +inf (then Re b > 0 is required).
cplx power_exp_integral(int m, cplx b, double L);

// Branch -1 of the product logarithm, defined for -1/e <= x < 0.
double lambert_w_minus1(double x);

double factorial(int n);
double binomial(int n, int k);

// ---------------------------------------------------------------------------
// Scenario counts for the deterministic and Erlang waiting-time germs.

class ScenarioTable {
public:
    enum class Scale { DividedByFactorial, Raw };

    ScenarioTable(int m_max, int n_max, Scale scale);

    int m_max() const noexcept { return m_max_; }
    int n_max() const noexcept { return n_max_; }
    Scale scale() const noexcept { return scale_; }

    // Zero when n < 2m or indices are out of range.
    double operator()(int m, int n) const;
    void set(int m, int n, double v);

private:
    int m_max_;
    int n_max_;
    Scale scale_;
    std::vector<double> v_;
};

// phi(m,n)/n! via the urn recursion.
ScenarioTable scenario_counts(int m_max, int n_max);
// phi(m,n)/n! via the refinement phi(m,n+1) = m phi(m,n) + m n phi(m-1,n-1).
ScenarioTable scenario_counts_refined(int m_max, int n_max);
// theta^(q)(m,n), raw counts.
ScenarioTable erlang_scenario_counts(int q, int m_max, int n_max);

} // namespace wfn
