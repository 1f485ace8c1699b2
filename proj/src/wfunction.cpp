#include "wfn/wfunction.hpp"

#include <map>
#include <sstream>

namespace wfn {

void require_admissible(const QueueSpec& spec, const std::vector<ExpPolyTerm>& cost) {
    const double pw = dominant_pole(spec);
    for (const auto& t : cost) {
        if (t.kappa == cplx{}) continue;
        if (!(t.a.real() > pw)) {
            std::ostringstream os;
            os << "cost exponent a = " << t.a << " is not admissible: need Re(a) > " << pw;
            throw DomainError(os.str());
        }
    }
}

std::vector<ExpPolyTerm> wprime_terms(const QueueSpec& spec, const std::vector<ExpPolyTerm>& cost) {
    require_admissible(spec, cost);
    const double gain = spec.gain();
    // One shifted germ per distinct exponent, long enough for the largest power.
    std::map<std::pair<double, double>, ShiftedWtGerm> germs;
    std::map<std::pair<double, double>, int> need;
    for (const auto& t : cost) {
        auto key = std::make_pair(t.a.real(), t.a.imag());
        need[key] = std::max(need[key], t.m);
    }
    for (const auto& [key, n] : need) germs.emplace(key, germ_at_point(spec, cplx(key.first, key.second), n));

    std::vector<ExpPolyTerm> out;
    for (const auto& t : cost) {
        const auto& g = germs.at({t.a.real(), t.a.imag()});
        // E[(u+W)^n e^{-a(u+W)}] = e^{-a u} sum_j C(n,j) u^{n-j} j! yhat_j
        for (int j = 0; j <= t.m; ++j) {
            const cplx k = gain * t.kappa * binomial(t.m, j) * factorial(j) * g.y[static_cast<std::size_t>(j)];
            out.push_back({k, t.m - j, t.a});
        }
    }
    return canonical_terms(std::move(out));
}

cplx mean_cost_from_w(const QueueSpec& spec, const PiecewiseExpPoly& w, const PiecewiseExpPoly& wprime, cplx jump) {
    const double rho = spec.rho();
    const cplx ecw = wprime.evaluate(0.0) / spec.gain();
    cplx num = (1.0 - rho) * jump + ecw;
    double den = 1.0;
    if (spec.has_setup()) {
        num += (1.0 - rho) * (w.expectation_under(spec.model0()) - w.expectation_under(spec.model()));
        den = 1.0 - rho + spec.rho0();
    }
    return num / den;
}

WResult w_for_exp_poly_cost(const QueueSpec& spec, const std::vector<ExpPolyTerm>& cost) {
    stability_check(spec);
    auto wp = PiecewiseExpPoly::from_terms(wprime_terms(spec, cost));
    auto w = wp.antiderivative();
    const cplx cbar = mean_cost_from_w(spec, w, wp);
    return {std::move(w), std::move(wp), cbar, spec};
}

WResult w_table1(const QueueSpec& spec, int n, cplx a) {
    if (n < 0) throw DomainError("cost power must be >= 0");
    return w_for_exp_poly_cost(spec, {{1.0, n, a}});
}

cplx mean_cost_per_job(const QueueSpec& spec, const std::vector<ExpPolyTerm>& cost) {
    return w_for_exp_poly_cost(spec, cost).mean_cost;
}

cplx relative_value(const WResult& r, double u) {
    if (u < 0) throw DomainError("backlog must be >= 0");
    return r.w.evaluate(u) - r.spec.gain() * r.mean_cost * u;
}

cplx admission_cost(const WResult& r, double u, double d) {
    if (u < 0 || d < 0) throw DomainError("backlog and job size must be >= 0");
    if (d == 0.0) return 0.0;
    return r.w.evaluate(u + d) - r.w.evaluate(u) - r.spec.gain() * r.mean_cost * d;
}

} // namespace wfn
