#pragma once

#include "wfn/wfunction.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace wfn {

// Cost equal to `interior` on [0, tau) and to `tail` on [tau, inf). Both term
// lists are written in the global variable u.
struct PiecewiseCostSpec {
    double tau = 1.0;
    std::vector<ExpPolyTerm> interior;
    std::vector<ExpPolyTerm> tail;
    // c(0) when it differs from the right limit c(0+).
    std::optional<double> c0;

    static PiecewiseCostSpec polynomial(const std::vector<double>& sigma, double tau,
                                        std::vector<ExpPolyTerm> tail = {});
    // 1[tau, inf)
    static PiecewiseCostSpec step(double tau);

    cplx evaluate(double u) const;
};

// kappa / (s - pole)^order
struct PartialFraction {
    cplx coeff;
    cplx pole;
    int order;
};

// int_0^inf g(tau + r) e^{-s r} dr for g given by global exp-poly terms.
std::vector<PartialFraction> shifted_laplace(const std::vector<ExpPolyTerm>& g, double tau);

// e^{point x} sum_i poly[i] x^i: the residue at `point` of H(s) e^{s x} / (s - point)^order,
// where `regular` is the jet of H at point.
struct ChiExpansion {
    cplx point;
    std::vector<cplx> poly;

    cplx evaluate(double x) const;
};
ChiExpansion chi_expansion(const Jet& regular, int order, cplx point);

// Continuous part of the waiting-time law on (0, inf), finite-pole models only.
std::vector<ExpPolyTerm> waiting_density_terms(const QueueSpec& spec);

WResult w_piecewise_finite(const QueueSpec& spec, const PiecewiseCostSpec& cost);
WResult w_step_md1(const QueueSpec& spec, double tau);
WResult w_piecewise_md1(const QueueSpec& spec, const PiecewiseCostSpec& cost);
// Chooses the construction that fits the service model.
WResult w_piecewise(const QueueSpec& spec, const PiecewiseCostSpec& cost);

inline constexpr int max_cell_order = 2048;

} // namespace wfn
