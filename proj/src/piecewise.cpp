#include "wfn/piecewise.hpp"

#include <cmath>
#include <sstream>

namespace wfn {

PiecewiseCostSpec PiecewiseCostSpec::polynomial(const std::vector<double>& sigma, double tau,
                                                std::vector<ExpPolyTerm> tail) {
    PiecewiseCostSpec c;
    c.tau = tau;
    for (std::size_t j = 0; j < sigma.size(); ++j)
        if (sigma[j] != 0.0) c.interior.push_back({sigma[j], static_cast<int>(j), 0.0});
    c.tail = std::move(tail);
    return c;
}

PiecewiseCostSpec PiecewiseCostSpec::step(double tau) {
    PiecewiseCostSpec c;
    c.tau = tau;
    c.tail = {{1.0, 0, 0.0}};
    return c;
}

cplx PiecewiseCostSpec::evaluate(double u) const {
    if (u == 0.0 && c0) return *c0;
    return evaluate_terms(u < tau ? interior : tail, u);
}

std::vector<PartialFraction> shifted_laplace(const std::vector<ExpPolyTerm>& g, double tau) {
    std::vector<PartialFraction> out;
    for (const auto& t : g) {
        // kappa (tau + r)^j e^{-b (tau + r)}
        const cplx base = t.kappa * std::exp(-t.a * tau);
        for (int i = 0; i <= t.m; ++i) {
            const cplx c = base * binomial(t.m, i) * std::pow(tau, t.m - i) * factorial(i);
            if (c != cplx{}) out.push_back({c, -t.a, i + 1});
        }
    }
    return out;
}

cplx ChiExpansion::evaluate(double x) const {
    cplx acc{};
    for (std::size_t i = poly.size(); i-- > 0;) acc = acc * x + poly[i];
    return acc * std::exp(point * x);
}

ChiExpansion chi_expansion(const Jet& regular, int order, cplx point) {
    if (order < 1) return {point, {}};
    if (regular.order() + 1 < static_cast<std::size_t>(order))
        throw SingularExpansion("jet too short for the residue order");
    ChiExpansion chi{point, std::vector<cplx>(static_cast<std::size_t>(order))};
    for (int j = 0; j < order; ++j)
        chi.poly[static_cast<std::size_t>(j)] = regular[static_cast<std::size_t>(order - 1 - j)] / factorial(j);
    return chi;
}

namespace {

bool same_point(cplx x, cplx y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x)); }

// Highest pole order of the partial fractions at z.
int pole_order_at(const std::vector<PartialFraction>& pf, cplx z) {
    int P = 0;
    for (const auto& f : pf)
        if (same_point(f.pole, z)) P = std::max(P, f.order);
    return P;
}

// Jet at z of (s - z)^P * sum of partial fractions, P = pole_order_at(pf, z).
Jet partial_fraction_jet(const std::vector<PartialFraction>& pf, cplx z, std::size_t K) {
    const int P = pole_order_at(pf, z);
    Jet acc(K);
    for (const auto& f : pf) {
        if (same_point(f.pole, z)) {
            const auto idx = static_cast<std::size_t>(P - f.order);
            if (idx <= K) acc[idx] += f.coeff;
        } else {
            acc += jet_shift_pow(f.coeff * jet_of_rational(f.pole, f.order, z, K), static_cast<std::size_t>(P));
        }
    }
    return acc;
}

// Terms of chi in the local variable v = x - delta.
void append_chi(std::vector<ExpPolyTerm>& out, const ChiExpansion& chi, double delta, cplx scale) {
    for (std::size_t i = 0; i < chi.poly.size(); ++i) {
        auto moved = recenter(ExpPolyTerm{scale * chi.poly[i], static_cast<int>(i), -chi.point}, delta);
        out.insert(out.end(), moved.begin(), moved.end());
    }
}

std::vector<PartialFraction> negate(std::vector<PartialFraction> pf) {
    for (auto& f : pf) f.coeff = -f.coeff;
    return pf;
}

std::vector<PartialFraction> concat(std::vector<PartialFraction> a, const std::vector<PartialFraction>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

cplx jump_at_zero(const PiecewiseCostSpec& cost) {
    if (!cost.c0) return {};
    return *cost.c0 - evaluate_terms(cost.interior, 0.0);
}

void validate(const PiecewiseCostSpec& cost) {
    if (!(cost.tau > 0.0) || !std::isfinite(cost.tau)) throw DomainError("breakpoint tau must be finite and > 0");
}

Piece tail_piece(const QueueSpec& spec, const PiecewiseCostSpec& cost) {
    Piece tail{cost.tau, std::numeric_limits<double>::infinity(), {}, {}};
    tail.terms = canonical_terms(recenter(wprime_terms(spec, cost.tail), cost.tau));
    return tail;
}

WResult finish(const QueueSpec& spec, std::vector<Piece> pieces, const PiecewiseCostSpec& cost) {
    PiecewiseExpPoly wp(std::move(pieces));
    wp.canonicalize();
    auto w = wp.antiderivative();
    const cplx cbar = mean_cost_from_w(spec, w, wp, jump_at_zero(cost));
    return {std::move(w), std::move(wp), cbar, spec};
}

} // namespace

std::vector<ExpPolyTerm> waiting_density_terms(const QueueSpec& spec) {
    std::vector<ExpPolyTerm> out;
    for (const auto& pole : pole_set(spec).poles) {
        const int D = pole.degree;
        for (int k = 0; k < D; ++k) {
            const int j = D - 1 - k;
            const double sign = ((D + k) % 2 == 0) ? 1.0 : -1.0;
            out.push_back({sign * pole.residues[static_cast<std::size_t>(k)] / factorial(j), j, -pole.p});
        }
    }
    return canonical_terms(std::move(out));
}

WResult w_piecewise_finite(const QueueSpec& spec, const PiecewiseCostSpec& cost) {
    stability_check(spec);
    validate(cost);
    if (spec.model().is_deterministic())
        throw UnsupportedModel("finite-pole construction needs exponential or Erlang service");
    require_admissible(spec, cost.interior);
    require_admissible(spec, cost.tail);

    // On [0, tau): E[P(u+W)] plus residues at the poles of W*(-s) of W*(-s) (L_P - L_xi)(s) e^{s(u - tau)}.
    Piece head{0.0, cost.tau, wprime_terms(spec, cost.interior), {}};
    const auto G = concat(shifted_laplace(cost.interior, cost.tau), negate(shifted_laplace(cost.tail, cost.tau)));
    if (!G.empty()) {
        for (const auto& pole : pole_set(spec).poles) {
            const cplx z = -pole.p;
            const auto K = static_cast<std::size_t>(pole.degree - 1);
            const Jet R(pole.residues);
            const Jet H = jet_mul(R, partial_fraction_jet(G, z, K));
            append_chi(head.terms, chi_expansion(H, pole.degree, z), -cost.tau, spec.gain());
        }
    }
    head.terms = canonical_terms(std::move(head.terms));
    return finish(spec, {head, tail_piece(spec, cost)}, cost);
}

WResult w_piecewise_md1(const QueueSpec& spec, const PiecewiseCostSpec& cost) {
    stability_check(spec);
    validate(cost);
    if (!spec.model().is_deterministic()) throw UnsupportedModel("cellwise construction needs deterministic service");
    require_admissible(spec, cost.interior);
    require_admissible(spec, cost.tail);
    const double d = spec.model().det_value();
    const double lambda = spec.lambda();
    const double tau = cost.tau;
    const int M = static_cast<int>(std::ceil(tau / d - 1e-12));
    if (M > max_cell_order) {
        std::ostringstream os;
        os << "backlog cell order " << M << " exceeds the cap " << max_cell_order;
        throw DomainError(os.str());
    }

    const auto interior_wp = wprime_terms(spec, cost.interior);
    // Residues are taken of Upsilon^m W*(-s) (L_xi - L_P)(s) e^{s(u - tau)}, Upsilon = lambda e^{s d}/(s + lambda).
    const auto G = concat(shifted_laplace(cost.tail, tau), negate(shifted_laplace(cost.interior, tau)));
    std::vector<cplx> points{cplx(-lambda, 0.0)};
    for (const auto& f : G) {
        bool seen = false;
        for (const auto& p : points) seen = seen || same_point(p, f.pole);
        if (!seen) points.push_back(f.pole);
    }

    std::vector<Piece> pieces;
    for (int m = M; m >= 1; --m) {
        Piece cell;
        cell.lo = std::max(0.0, tau - m * d);
        cell.hi = tau - (m - 1) * d;
        if (!(cell.lo < cell.hi)) continue;
        cell.terms = recenter(interior_wp, cell.lo);
        for (const auto& z : points) {
            const bool at_arrival = same_point(z, cplx(-lambda, 0.0));
            const int PL = pole_order_at(G, z);
            const int P = PL + (at_arrival ? m : 0);
            if (P == 0) continue;
            const auto K = static_cast<std::size_t>(P - 1);
            Jet ups = std::pow(lambda, m) * jet_exp_linear(m * d, z, K);
            if (!at_arrival) ups = jet_mul(ups, jet_of_rational(-lambda, m, z, K));
            Jet H = jet_mul(ups, wstar_reflected_jet(spec, z, K));
            H = jet_mul(H, partial_fraction_jet(G, z, K));
            append_chi(cell.terms, chi_expansion(H, P, z), cell.lo - tau, spec.gain());
        }
        cell.terms = canonical_terms(std::move(cell.terms));
        pieces.push_back(std::move(cell));
    }
    pieces.push_back(tail_piece(spec, cost));
    return finish(spec, std::move(pieces), cost);
}

WResult w_step_md1(const QueueSpec& spec, double tau) {
    stability_check(spec);
    if (!spec.model().is_deterministic()) throw UnsupportedModel("step-cost closed form needs deterministic service");
    if (!(tau > 0.0)) throw DomainError("breakpoint tau must be > 0");
    const double d = spec.model().det_value();
    const double lambda = spec.lambda();
    const double slope = lambda / (1.0 - lambda * d);
    const int M = static_cast<int>(std::ceil(tau / d - 1e-12));
    if (M > max_cell_order) throw DomainError("backlog cell order exceeds the cap");

    // sum_{q<=k} (lambda x)^q / q! e^{-lambda x} as terms in x
    auto poisson_tail = [lambda](int k) {
        std::vector<ExpPolyTerm> t;
        for (int q = 0; q <= k; ++q) t.push_back({std::pow(lambda, q) / factorial(q), q, lambda});
        return t;
    };
    double w_tau = slope * tau + M;
    for (int k = 0; k < M; ++k) w_tau -= evaluate_terms(poisson_tail(k), k * d - tau).real();

    std::vector<Piece> pieces;
    for (int m = M; m >= 1; --m) {
        Piece cell;
        cell.lo = std::max(0.0, tau - m * d);
        cell.hi = tau - (m - 1) * d;
        if (!(cell.lo < cell.hi)) continue;
        cell.constant = w_tau - slope * tau - m + slope * cell.lo;
        cell.terms.push_back({slope, 1, 0.0});
        for (int k = 0; k < m; ++k) {
            // x = u + k d - tau = v + lo + k d - tau
            auto moved = recenter(poisson_tail(k), cell.lo + k * d - tau);
            cell.terms.insert(cell.terms.end(), moved.begin(), moved.end());
        }
        cell.terms = canonical_terms(std::move(cell.terms));
        pieces.push_back(std::move(cell));
    }
    pieces.push_back(Piece{tau, std::numeric_limits<double>::infinity(), {{slope, 1, 0.0}}, w_tau});
    PiecewiseExpPoly w(std::move(pieces));
    auto wp = w.derivative();
    const cplx cbar = mean_cost_from_w(spec, w, wp);
    return {std::move(w), std::move(wp), cbar, spec};
}

WResult w_piecewise(const QueueSpec& spec, const PiecewiseCostSpec& cost) {
    if (spec.model().is_deterministic()) return w_piecewise_md1(spec, cost);
    return w_piecewise_finite(spec, cost);
}

} // namespace wfn
