#pragma once

#include "wfn/exppoly.hpp"
#include "wfn/waiting_time.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace wfn {

// Unscaled derivatives at 0: coeffs[k] = f^{(k)}(0).
struct Germ {
    std::vector<cplx> coeffs;
};

// Supplies f^{(k)}(0) for any k; a finite germ is zero past its end.
using GermSource = std::function<cplx(int)>;

GermSource germ_source(const Germ& g);
GermSource germ_source(const std::vector<ExpPolyTerm>& cost);

struct SeriesOptions {
    double tail_tol = 1e-12;
    int max_terms = 300;
    int divergence_window = 10;
    // Terms are always computed at least this far before divergence is declared.
    int min_terms = 41;
};

// w'^{(k)}(0), k < n: gain * sum_q y_q c^{(k+q)}(0).
Germ filter_germ(const QueueSpec& spec, const GermSource& cost, int n, const SeriesOptions& opt = {});
// The filtered germ as an on-demand source (entries memoized).
GermSource filtered_source(const QueueSpec& spec, GermSource cost, const SeriesOptions& opt = {});
// c^{(k)}(0) = wg_k / lambda - sum_t x_{t+1} wg_{t+k}, x_j = E[D^j]/j!.
Germ inverse_filter_germ(const QueueSpec& spec, const GermSource& wgerm, int n, const SeriesOptions& opt = {});

// gain * Toeplitz(y) and Toeplitz(x_{j-i+1}), both upper triangular n x n.
Eigen::MatrixXd filter_matrix(const QueueSpec& spec, int n);
Eigen::MatrixXd moment_matrix(const QueueSpec& spec, int n);

// Uniform bounds on the real part of c^{(k+1)} over the evaluation range; alpha[n] is used at order n.
struct DerivativeBounds {
    std::vector<Interval> alpha;
    std::vector<Interval> beta;
};

struct IntervalFn {
    PiecewiseExpPoly lower;
    PiecewiseExpPoly upper;
    Interval mean_cost;
};

// Order-n Taylor polynomial of w with the Lagrange remainder bounded by alpha[n].
IntervalFn polynomial_bounds(const QueueSpec& spec, const Germ& cost_germ, int n, const DerivativeBounds& db);

// Derivative bounds for 1 - e^{-a u} with a > 0: c^{(k+1)} lies in [0, a^{k+1}] or [-a^{k+1}, 0].
DerivativeBounds exp_saturation_bounds(double a, int n_max);

struct GrowthClass {
    double order;
    double type;
};

enum class Convergence { Converges, Diverges, Marginal };

const char* to_string(Convergence c);

// Against |p_W| (filter) or, with use_service_pole, against |p_D| (inverse filter).
Convergence convergence_classify(const QueueSpec& spec, const GrowthClass& g, bool use_service_pole = false);

// Advisory only: exponential type from the ratios of the last germ entries.
double estimate_growth_type(const Germ& g);

} // namespace wfn
