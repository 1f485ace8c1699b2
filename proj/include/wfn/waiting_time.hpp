#pragma once

#include "wfn/service_models.hpp"

#include <vector>

namespace wfn {

// Taylor coefficients of W*(-s) at 0: y_k = E[W^k]/k!.
struct WtGerm {
    std::vector<double> y;
};

// Taylor coefficients of W*(-s) in powers of (s + a): yhat_k = (-1)^k W*^{(k)}(a)/k!,
// so that E[W^k e^{-aW}] = k! yhat_k and yhat_0 = W*(a).
struct ShiftedWtGerm {
    cplx a;
    std::vector<cplx> y;
};

// A pole of W*(-s) sits at s = -p (p is a pole of W*). residues[j] is the
// j-th Taylor coefficient of (s + p)^degree W*(-s) at s = -p.
struct Pole {
    cplx p;
    int degree;
    std::vector<cplx> residues;
};

struct PoleSet {
    std::vector<Pole> poles;
};

// W*(s) = (1 - rho) s / (s - lambda (1 - D*(s))), with the removable point s = 0.
cplx pk_lst(const QueueSpec& spec, cplx s);
// The same transform evaluated literally as the quotient (not defined at 0).
cplx pk_lst_quotient(const QueueSpec& spec, cplx s);
// Transform of the waiting time seen by arrivals when the setup service differs.
cplx true_lst(const QueueSpec& spec, cplx s);

// Jet of W*(s) at s0.
Jet wstar_jet(const QueueSpec& spec, cplx s0, std::size_t order);
// Jet of s -> W*(-s) at s0.
Jet wstar_reflected_jet(const QueueSpec& spec, cplx s0, std::size_t order);

WtGerm germ_at_zero(const QueueSpec& spec, int n);
// Germ from the closed-form scenario-count series of the service model.
WtGerm germ_at_zero_series(const QueueSpec& spec, int n);
ShiftedWtGerm germ_at_point(const QueueSpec& spec, cplx a, int n);

// Rightmost pole of W* (real, negative).
double dominant_pole(const QueueSpec& spec);
PoleSet pole_set(const QueueSpec& spec);

// F_W(u) for exponential service.
double waiting_cdf_mm1(const QueueSpec& spec, double u);
// F_W(u) for deterministic service (finite alternating sum).
double waiting_cdf_md1(const QueueSpec& spec, double u);

// Cost exponent a is admissible when Re(a) > p_W.
bool admissible_exponent(const QueueSpec& spec, cplx a);

} // namespace wfn
