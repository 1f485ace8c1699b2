#pragma once

#include "wfn/service_models.hpp"

#include <limits>
#include <string>
#include <vector>

namespace wfn {

// kappa * v^m * e^{-a v}
struct ExpPolyTerm {
    cplx kappa;
    int m = 0;
    cplx a;

    cplx evaluate(double v) const;
    friend bool operator==(const ExpPolyTerm&, const ExpPolyTerm&) = default;
};

cplx evaluate_terms(const std::vector<ExpPolyTerm>& terms, double v);
// Rewrite kappa (v + delta)^m e^{-a (v + delta)} as terms in v.
std::vector<ExpPolyTerm> recenter(const ExpPolyTerm& t, double delta);
std::vector<ExpPolyTerm> recenter(const std::vector<ExpPolyTerm>& terms, double delta);
// Merge equal (m, a) after snapping tiny imaginary exponents; drop zero terms.
std::vector<ExpPolyTerm> canonical_terms(std::vector<ExpPolyTerm> terms);
// d^k/dv^k at v = 0.
cplx terms_derivative_at_zero(const std::vector<ExpPolyTerm>& terms, int k);

// kappa * int_0^v t^m e^{-a t} dt, evaluated without the cancellation of its closed form.
cplx integral_term_value(const ExpPolyTerm& t, double v);
// The closed form of an integral term as ordinary terms plus a constant.
std::vector<ExpPolyTerm> expand_integral_term(const ExpPolyTerm& t, cplx& constant);

// One piece on [lo, hi). Terms use the local variable v = u - lo.
struct Piece {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    std::vector<ExpPolyTerm> terms;
    cplx constant;
    // Integral terms, see integral_term_value.
    std::vector<ExpPolyTerm> integrals;

    cplx value(double v) const;
    // Same function with every integral term written in closed form.
    Piece expanded() const;

    friend bool operator==(const Piece&, const Piece&) = default;
};

class PiecewiseExpPoly {
public:
    // The zero function on [0, inf).
    PiecewiseExpPoly();
    explicit PiecewiseExpPoly(std::vector<Piece> pieces);
    // Single piece on [0, inf) in the global variable u.
    static PiecewiseExpPoly from_terms(std::vector<ExpPolyTerm> terms, cplx constant = {});

    const std::vector<Piece>& pieces() const noexcept { return pieces_; }
    std::vector<double> breakpoints() const;

    // Right-continuous evaluation; u must be >= 0.
    cplx evaluate(double u) const;
    double real(double u) const { return evaluate(u).real(); }
    // One-sided limit from the left at u > 0.
    cplx evaluate_left(double u) const;

    PiecewiseExpPoly derivative() const;
    // F(0) = 0 and F continuous across every breakpoint.
    PiecewiseExpPoly antiderivative() const;

    PiecewiseExpPoly& operator+=(const PiecewiseExpPoly& o);
    PiecewiseExpPoly& scale(cplx s);
    PiecewiseExpPoly& canonicalize();

    // max |F(b-) - F(b+)| over internal breakpoints.
    double continuity_defect() const;
    // E[F(X)] for X distributed as the service model.
    cplx expectation_under(const ServiceModel& model) const;

    std::string to_json() const;
    static PiecewiseExpPoly from_json(const std::string& text);

    friend bool operator==(const PiecewiseExpPoly&, const PiecewiseExpPoly&) = default;

private:
    std::size_t locate(double u) const;
    std::vector<Piece> pieces_;
};

PiecewiseExpPoly operator+(PiecewiseExpPoly a, const PiecewiseExpPoly& b);
PiecewiseExpPoly operator*(cplx s, PiecewiseExpPoly a);

} // namespace wfn
