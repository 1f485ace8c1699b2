#pragma once

#include "wfn/piecewise.hpp"
#include "wfn/series_taylor.hpp"

#include <functional>
#include <vector>

namespace wfn {

// Black-box continuous cost on [0, tau].
struct SampledCost {
    std::function<double(double)> f;
    double tau = 1.0;
    // Exact modulus of continuity delta -> omega(delta), when known.
    std::function<double(double)> exact_modulus;
};

// Bounds on the cost over (tau, inf), global variable u.
struct TailEnvelope {
    std::vector<ExpPolyTerm> lower;
    std::vector<ExpPolyTerm> upper;
};

enum class ApproxMethod { Bernstein, NearBest };
const char* to_string(ApproxMethod m);

struct PolyApprox {
    ApproxMethod method = ApproxMethod::Bernstein;
    double tau = 1.0;
    // Monomial coefficients in u.
    std::vector<double> coeffs;
    // Declared uniform error bound.
    double eta = 0.0;
    // Bernstein control values, or Chebyshev coefficients in x = 2u/tau - 1.
    std::vector<double> basis;
    // Largest gap between the monomial form and the stable form on a 1000-point grid.
    double roundoff = 0.0;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    // de Casteljau or Clenshaw.
    double evaluate(double u) const;
    double evaluate_monomial(double u) const;
    // int_0^u of the approximant, stable form.
    double integral(double u) const;
};

PolyApprox bernstein(const SampledCost& cost, int n);
// rho_{n,0..n}
std::vector<double> korovkin_weights(int n);
// Coefficients (ascending) of p_k with p_k(cos t) = cos k t, by recurrence.
std::vector<double> cos_poly(int k);
// The closed-form coefficient of x^q in p_k.
double cos_poly_coeff(int k, int q);
// Re alpha_0..alpha_n of c(tau (1 + cos t) / 2), Chebyshev-Gauss with max(512, 16 n) nodes.
std::vector<double> fourier_coeffs(const SampledCost& cost, int n);
std::vector<double> fourier_coeffs(const SampledCost& cost, int n, int nodes);
PolyApprox near_best(const SampledCost& cost, int n);
// sum_k rho_k beta_k cos(k t) at u = tau (1 + cos t) / 2, straight from the weighted cosine sum.
double near_best_cosine_sum(const SampledCost& cost, int n, double u);

// Grid estimate (4096 points, inflated by 1.05); never below the true modulus on the grid.
double modulus_estimate(const SampledCost& cost, double delta);
// Exact modulus if available, else the estimate.
double modulus(const SampledCost& cost, double delta);
// Sup of |c - approx| on a uniform grid of [0, tau].
double approximation_error(const SampledCost& cost, const PolyApprox& p, int grid = 1000);

// u^2 / (a^2 + u^2) on [0, tau] with its exact modulus.
SampledCost example7_cost(double a, double tau);
double example7_modulus(double a, double tau, double delta);
// [c(tau), 1 - (1 - c(tau)) e^{-k (u - tau)}], k = c'(tau) / (1 - c(tau)).
TailEnvelope example7_tail(double a, double tau);

struct IntervalCost {
    PiecewiseCostSpec lower;
    PiecewiseCostSpec upper;
    PolyApprox approx;
};
IntervalCost interval_cost(const SampledCost& cost, double tau, int n, const TailEnvelope& tail,
                           ApproxMethod method = ApproxMethod::NearBest);

// Continuous periodic cost; the job cost is f(u) for u > 0 and 0 at u = 0.
struct PeriodicCost {
    std::function<double(double)> f;
    double period = 1.0;
    std::function<double(double)> exact_modulus;
};

// alpha_0..alpha_n by the trapezoidal rule over one period (alpha_{-k} = conj alpha_k).
std::vector<cplx> periodic_fourier(const PeriodicCost& cost, int n);
double periodic_modulus(const PeriodicCost& cost, double delta);
IntervalFn periodic_bounds(const QueueSpec& spec, const PeriodicCost& cost, int n);

} // namespace wfn
