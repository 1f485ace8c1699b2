#pragma once

#include "wfn/exppoly.hpp"
#include "wfn/waiting_time.hpp"

#include <vector>

namespace wfn {

struct WResult {
    PiecewiseExpPoly w;
    PiecewiseExpPoly wprime;
    cplx mean_cost;
    QueueSpec spec;
};

// gain * E[c(u + W)] for an exp-poly cost written in the global variable u.
std::vector<ExpPolyTerm> wprime_terms(const QueueSpec& spec, const std::vector<ExpPolyTerm>& cost);

// Cost u^n e^{-a u}.
WResult w_table1(const QueueSpec& spec, int n, cplx a);
WResult w_for_exp_poly_cost(const QueueSpec& spec, const std::vector<ExpPolyTerm>& cost);

// Mean cost per job from the w-function of the cost; jump = c(0) - c(0+).
cplx mean_cost_from_w(const QueueSpec& spec, const PiecewiseExpPoly& w, const PiecewiseExpPoly& wprime,
                      cplx jump = {});
cplx mean_cost_per_job(const QueueSpec& spec, const std::vector<ExpPolyTerm>& cost);

// w(u) - lambda cbar u / (1 - rho)
cplx relative_value(const WResult& r, double u);
// w(u + d) - w(u) - lambda cbar d / (1 - rho)
cplx admission_cost(const WResult& r, double u, double d);

// Throws DomainError unless every exponent lies right of the dominant pole.
void require_admissible(const QueueSpec& spec, const std::vector<ExpPolyTerm>& cost);

} // namespace wfn
