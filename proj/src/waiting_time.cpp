#include "wfn/waiting_time.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wfn {

namespace {

cplx residual_lst(const ServiceModel& m, cplx s) {
    try {
        return m.residual_lst_jet(s, 0)[0];
    } catch (const SingularExpansion&) {
        throw PoleError("service transform evaluated at its pole");
    }
}

// Coefficients (ascending powers of s) of (w+s)^q - lambda sum_{j<q} w^j (w+s)^{q-1-j}.
std::vector<double> erlang_denominator(double lambda, double w, int q) {
    std::vector<double> c(static_cast<std::size_t>(q + 1), 0.0);
    for (int i = 0; i <= q; ++i) c[static_cast<std::size_t>(i)] += binomial(q, i) * std::pow(w, q - i);
    for (int j = 0; j < q; ++j) {
        const int m = q - 1 - j;
        for (int i = 0; i <= m; ++i)
            c[static_cast<std::size_t>(i)] -= lambda * std::pow(w, j) * binomial(m, i) * std::pow(w, m - i);
    }
    return c;
}

cplx poly_eval(const std::vector<double>& c, cplx s) {
    cplx acc{};
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * s + c[k];
    return acc;
}

cplx poly_deriv_eval(const std::vector<double>& c, cplx s) {
    cplx acc{};
    for (std::size_t k = c.size(); k-- > 1;) acc = acc * s + static_cast<double>(k) * c[k];
    return acc;
}

std::vector<cplx> erlang_roots(const QueueSpec& spec) {
    const auto c = erlang_denominator(spec.lambda(), spec.model().rate(), spec.model().shape());
    const int q = static_cast<int>(c.size()) - 1;
    std::vector<cplx> roots;
    if (q == 1) {
        roots.push_back(-c[0] / c[1]);
    } else {
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(q, q);
        for (int i = 1; i < q; ++i) comp(i, i - 1) = 1.0;
        for (int i = 0; i < q; ++i) comp(i, q - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(q)];
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
        for (int i = 0; i < q; ++i) roots.push_back(es.eigenvalues()[i]);
    }
    for (auto& r : roots) {
        for (int it = 0; it < 50; ++it) {
            const cplx d = poly_deriv_eval(c, r);
            if (d == cplx{}) break;
            const cplx step = poly_eval(c, r) / d;
            r -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(r))) break;
        }
        if (std::abs(r.imag()) < 1e-12 * (1.0 + std::abs(r))) r = {r.real(), 0.0};
    }
    return roots;
}

} // namespace

cplx pk_lst(const QueueSpec& spec, cplx s) {
    stability_check(spec);
    const cplx denom = 1.0 - spec.lambda() * residual_lst(spec.model(), s);
    if (std::abs(denom) < 1e-300) throw PoleError("W* evaluated at a pole");
    return (1.0 - spec.rho()) / denom;
}

cplx pk_lst_quotient(const QueueSpec& spec, cplx s) {
    stability_check(spec);
    const cplx denom = s - spec.lambda() * (1.0 - spec.model().lst(s));
    if (denom == cplx{}) throw PoleError("W* quotient evaluated at a zero of its denominator");
    return (1.0 - spec.rho()) * s / denom;
}

cplx true_lst(const QueueSpec& spec, cplx s) {
    stability_check(spec);
    const double rho = spec.rho();
    const cplx g = residual_lst(spec.model(), s);
    const cplx g0 = residual_lst(spec.model0(), s);
    const cplx denom = 1.0 - spec.lambda() * g;
    if (std::abs(denom) < 1e-300) throw PoleError("transform evaluated at a pole");
    return (1.0 - rho) / (1.0 - rho + spec.rho0()) * (1.0 - spec.lambda() * (g - g0)) / denom;
}

Jet wstar_jet(const QueueSpec& spec, cplx s0, std::size_t order) {
    stability_check(spec);
    Jet g;
    try {
        g = spec.model().residual_lst_jet(s0, order);
    } catch (const SingularExpansion&) {
        throw PoleError("W* expanded at the service pole");
    }
    Jet denom = -spec.lambda() * g;
    denom[0] += 1.0;
    if (std::abs(denom[0]) < 1e-300) throw PoleError("W* expanded at one of its poles");
    return jet_div(Jet::constant(1.0 - spec.rho(), order), denom);
}

Jet wstar_reflected_jet(const QueueSpec& spec, cplx s0, std::size_t order) {
    Jet j = wstar_jet(spec, -s0, order);
    for (std::size_t k = 1; k <= order; k += 2) j[k] = -j[k];
    return j;
}

WtGerm germ_at_zero(const QueueSpec& spec, int n) {
    stability_check(spec);
    if (n < 0) throw DomainError("germ length must be >= 0");
    const double gain = spec.gain();
    std::vector<double> x(static_cast<std::size_t>(n + 2));
    for (int k = 0; k <= n + 1; ++k) x[static_cast<std::size_t>(k)] = spec.model().moment(k) / factorial(k);
    WtGerm g;
    g.y.assign(static_cast<std::size_t>(n + 1), 0.0);
    g.y[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (int t = 0; t < k; ++t) acc += x[static_cast<std::size_t>(k - t + 1)] * g.y[static_cast<std::size_t>(t)];
        g.y[static_cast<std::size_t>(k)] = gain * acc;
    }
    return g;
}

WtGerm germ_at_zero_series(const QueueSpec& spec, int n) {
    stability_check(spec);
    WtGerm g;
    g.y.assign(static_cast<std::size_t>(n + 1), 0.0);
    g.y[0] = 1.0;
    if (n == 0) return g;
    const double lambda = spec.lambda();
    const auto& m = spec.model();
    if (m.is_deterministic()) {
        const double d = m.det_value();
        const double r = lambda * d / (1.0 - lambda * d);
        const auto phi = scenario_counts(n, 2 * n);
        for (int k = 1; k <= n; ++k) {
            double acc = 0.0;
            for (int t = 1; t <= k; ++t) acc += std::pow(r, t) * phi(t, k + t);
            g.y[static_cast<std::size_t>(k)] = acc * std::pow(d, k);
        }
        return g;
    }
    const int q = m.shape();
    const double w = m.rate();
    if (q == 1) {
        for (int k = 1; k <= n; ++k) g.y[static_cast<std::size_t>(k)] = lambda / (w * std::pow(w - lambda, k));
        return g;
    }
    const double r = lambda / (w - q * lambda);
    const auto theta = erlang_scenario_counts(q, n, 2 * n);
    for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (int t = 1; t <= k; ++t) acc += std::pow(r, t) * theta(t, k + t);
        g.y[static_cast<std::size_t>(k)] = acc / std::pow(w, k);
    }
    return g;
}

ShiftedWtGerm germ_at_point(const QueueSpec& spec, cplx a, int n) {
    if (n < 0) throw DomainError("germ length must be >= 0");
    ShiftedWtGerm g{a, {}};
    if (a == cplx{}) {
        for (double v : germ_at_zero(spec, n).y) g.y.emplace_back(v);
        return g;
    }
    const Jet j = wstar_jet(spec, a, static_cast<std::size_t>(n));
    g.y.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) g.y[static_cast<std::size_t>(k)] = (k % 2 ? -1.0 : 1.0) * j[static_cast<std::size_t>(k)];
    return g;
}

double dominant_pole(const QueueSpec& spec) {
    stability_check(spec);
    const auto& m = spec.model();
    const double lambda = spec.lambda();
    if (m.is_deterministic()) {
        const double d = m.det_value();
        const double rho = spec.rho();
        double p = lambda * (1.0 + lambert_w_minus1(-rho * std::exp(-rho)) / rho);
        for (int it = 0; it < 20; ++it) {
            const double f = p - lambda * (1.0 - std::exp(-p * d));
            const double df = 1.0 - lambda * d * std::exp(-p * d);
            if (df == 0.0) break;
            const double step = f / df;
            p -= step;
            if (std::abs(step) < 1e-16 * std::abs(p)) break;
        }
        return p;
    }
    if (m.shape() == 1) return lambda - m.rate();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : erlang_roots(spec))
        if (r.imag() == 0.0) best = std::max(best, r.real());
    if (!std::isfinite(best)) {
        std::ostringstream os;
        os << "no real pole found for " << m.name() << " lambda=" << lambda;
        throw Error(os.str());
    }
    return best;
}

PoleSet pole_set(const QueueSpec& spec) {
    stability_check(spec);
    const auto& m = spec.model();
    if (m.is_deterministic())
        throw UnsupportedModel("deterministic service has infinitely many poles; use the cellwise construction");
    const int q = m.shape();
    const double w = m.rate();
    auto roots = erlang_roots(spec);

    // Group coincident roots into poles of higher degree.
    std::vector<std::pair<cplx, int>> groups;
    for (const auto& r : roots) {
        bool merged = false;
        for (auto& [p, deg] : groups) {
            if (std::abs(p - r) < 1e-7 * (1.0 + std::abs(p))) {
                p = (p * static_cast<double>(deg) + r) / static_cast<double>(deg + 1);
                ++deg;
                merged = true;
                break;
            }
        }
        if (!merged) groups.emplace_back(r, 1);
    }

    PoleSet ps;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto [p, deg] = groups[i];
        const std::size_t order = static_cast<std::size_t>(deg - 1);
        const cplx at = -p;
        // (1-rho) (-1)^q (w - s)^q / prod_{other} (s + p_i)^{deg_i}
        Jet reg = jet_pow(Jet::constant(w, order) - Jet::variable(at, order), q);
        reg *= (1.0 - spec.rho()) * (q % 2 ? -1.0 : 1.0);
        for (std::size_t j = 0; j < groups.size(); ++j) {
            if (j == i) continue;
            reg = jet_mul(reg, jet_of_rational(-groups[j].first, groups[j].second, at, order));
        }
        Pole pole{p, deg, {}};
        for (std::size_t k = 0; k <= order; ++k) pole.residues.push_back(reg[k]);
        ps.poles.push_back(std::move(pole));
    }
    std::sort(ps.poles.begin(), ps.poles.end(), [](const Pole& a, const Pole& b) {
        if (a.p.real() != b.p.real()) return a.p.real() > b.p.real();
        return a.p.imag() > b.p.imag();
    });
    (void)q;
    return ps;
}

double waiting_cdf_mm1(const QueueSpec& spec, double u) {
    stability_check(spec);
    const auto& m = spec.model();
    if (m.is_deterministic() || m.shape() != 1) throw UnsupportedModel("closed-form CDF needs exponential service");
    if (u < 0) return 0.0;
    const double w = m.rate();
    const double lambda = spec.lambda();
    return 1.0 - lambda / w * std::exp(-(w - lambda) * u);
}

double waiting_cdf_md1(const QueueSpec& spec, double u) {
    stability_check(spec);
    if (!spec.model().is_deterministic()) throw UnsupportedModel("closed-form CDF needs deterministic service");
    if (u < 0) return 0.0;
    const double d = spec.model().det_value();
    const double lambda = spec.lambda();
    const int kmax = static_cast<int>(std::floor(u / d));
    double acc = 0.0;
    for (int k = 0; k <= kmax; ++k) {
        const double x = lambda * (k * d - u);
        acc += std::pow(x, k) / factorial(k) * std::exp(-x);
    }
    return (1.0 - spec.rho()) * acc;
}

bool admissible_exponent(const QueueSpec& spec, cplx a) {
    return a.real() > dominant_pole(spec);
}

} // namespace wfn
