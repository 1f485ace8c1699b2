#include "oracles.hpp"
#include "wfn/piecewise.hpp"
#include "wfn/simulator.hpp"

#include <gtest/gtest.h>

using namespace wfn;

namespace {

const QueueSpec mm1(0.5, Exponential{1.0});
const QueueSpec md1(0.5, Deterministic{1.0});

// w'(u) = gain [(1 - rho) c(u) + int c(u + t) f(t) dt] for M/M/1.
double mm1_wprime_quad(const PiecewiseCostSpec& c, double u) {
    auto cost = [&](double x) { return c.evaluate(x).real(); };
    double cont = 0.0;
    if (u < c.tau) cont += oracle::integrate([&](double t) { return cost(u + t) * oracle::mm1_density(0.5, 1.0, t); }, 0.0, c.tau - u);
    cont += oracle::integrate_to_inf([&](double t) { return cost(u + t) * oracle::mm1_density(0.5, 1.0, t); }, std::max(0.0, c.tau - u));
    return mm1.gain() * (0.5 * cost(u) + cont);
}

// Polynomial cost sum_j s_j u^j on [0, tau), zero after; M/M/1 closed form of w'.
double polynomial_interval_wprime(const std::vector<double>& s, double tau, double lambda, double omega, double u) {
    const double r = omega - lambda;
    double acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        acc += lambda * s[j] * std::pow(u, static_cast<double>(j));
        double su = 0.0, st = 0.0;
        for (std::size_t t = 0; t <= j; ++t) {
            su += std::pow(r * u, static_cast<double>(t)) / factorial(static_cast<int>(t));
            st += std::pow(r * tau, static_cast<double>(t)) / factorial(static_cast<int>(t));
        }
        acc += lambda * lambda * factorial(static_cast<int>(j)) * s[j] / std::pow(r, static_cast<double>(j + 1)) *
               (su - std::exp(-r * (tau - u)) * st);
    }
    return acc;
}

// M/M/1 with zero cost on [0, tau) and u^n e^{-a u} after: w'(u) = gain E[c(u + W)].
double tail_only_wprime(int n, double a, double tau, double u) {
    auto c = [&](double x) { return x >= tau ? std::pow(x, n) * std::exp(-a * x) : 0.0; };
    const double atom = 0.5 * c(u);
    const double lo = std::max(0.0, tau - u);
    const double cont = oracle::integrate_to_inf([&](double t) { return c(u + t) * oracle::mm1_density(0.5, 1.0, t); }, lo);
    return mm1.gain() * (atom + cont);
}

// Step cost on M/D/1: w(tau) in closed form.
double md1_step_w_tau(double lambda, double d, double tau) {
    const int m0 = static_cast<int>(std::ceil(tau / d));
    double acc = lambda * tau / (1.0 - lambda * d) + m0;
    for (int k = 0; k < m0; ++k) {
        const double x = lambda * (k * d - tau);
        double s = 0.0;
        for (int q = 0; q <= k; ++q) s += std::pow(x, q) / factorial(q);
        acc -= std::exp(-x) * s;
    }
    return acc;
}

} // namespace

TEST(ShiftedLaplace, AgainstQuadrature) {
    const std::vector<ExpPolyTerm> g{{1.0, 2, 0.3}, {-0.5, 0, 0.0}};
    const double tau = 1.5;
    const auto pf = shifted_laplace(g, tau);
    for (double s : {0.7, 2.0}) {
        cplx val{};
        for (const auto& f : pf) val += f.coeff / std::pow(s - f.pole, f.order);
        const double ref = oracle::integrate_to_inf([&](double r) { return evaluate_terms(g, tau + r).real() * std::exp(-s * r); }, 0.0);
        EXPECT_NEAR(val.real(), ref, 1e-9);
    }
}

TEST(ChiExpansion, SecondOrderResidue) {
    // H(s) = 1/(s + 2) at 0, order 2: d/ds [H e^{s x}] = -1/4 + x/2.
    const auto H = jet_of_rational(-2.0, 1, 0.0, 3);
    const auto chi = chi_expansion(H, 2, 0.0);
    for (double x : {0.0, 0.5, 3.0}) EXPECT_NEAR(chi.evaluate(x).real(), -0.25 + 0.5 * x, 1e-14);
}

TEST(PiecewiseFinite, PolynomialIntervalCost) {
    const std::vector<double> s{0.0, 1.0};
    const double tau = 2.0;
    const auto cost = PiecewiseCostSpec::polynomial(s, tau);
    const auto r = w_piecewise(mm1, cost);
    for (double u : {0.5, 1.0, 3.0}) {
        const double ref = u < tau ? polynomial_interval_wprime(s, tau, 0.5, 1.0, u) : 0.0;
        EXPECT_NEAR(r.wprime.real(u), ref, 1e-12) << u;
        const double w_ref = oracle::integrate([&](double x) { return x < tau ? polynomial_interval_wprime(s, tau, 0.5, 1.0, x) : 0.0; },
                                               0.0, std::min(u, tau));
        EXPECT_NEAR(r.w.real(u), w_ref, 1e-10) << u;
    }
}

TEST(PiecewiseFinite, TailOnlyCost) {
    for (int n : {0, 1, 2})
        for (double a : {0.0, 0.4}) {
            PiecewiseCostSpec c;
            c.tau = 1.5;
            c.tail = {{1.0, n, a}};
            const auto r = w_piecewise(mm1, c);
            for (double u : {0.3, 1.0, 2.0, 4.0}) EXPECT_LE(oracle::rel(r.wprime.real(u), tail_only_wprime(n, a, c.tau, u)), 1e-8);
        }
}

TEST(PiecewiseFinite, StepCostClosedForm) {
    const double tau = 2.0;
    const auto r = w_piecewise(mm1, PiecewiseCostSpec::step(tau));
    for (double u : {0.0, 0.5, 1.9, 2.0, 3.5}) {
        const double ref = mm1.gain() * 0.5 * std::exp(-0.5 * tau) / 0.5 * (std::exp(0.5 * std::min(u, tau)) - 1.0) + mm1.gain() * std::max(u - tau, 0.0);
        EXPECT_NEAR(r.w.real(u), ref, 1e-13);
    }
}

TEST(PiecewiseFinite, CrossCorrelationQuadrature) {
    PiecewiseCostSpec c;
    c.tau = 1.2;
    c.interior = {{1.0, 2, 0.0}, {0.3, 0, 0.5}};
    c.tail = {{1.0, 0, 0.0}, {-0.7, 1, 1.1}};
    const auto r = w_piecewise(mm1, c);
    for (double u : {0.0, 0.4, 1.1, 1.3, 3.0}) EXPECT_NEAR(r.wprime.real(u), mm1_wprime_quad(c, u), 1e-6) << u;
}

TEST(PiecewiseFinite, ReducesToTableOne) {
    // Interior-only cost with a far breakpoint matches the whole-line cost on [0, tau/2].
    const std::vector<ExpPolyTerm> c{{1.0, 1, 0.0}, {0.5, 0, 0.2}};
    PiecewiseCostSpec pw;
    pw.tau = 80.0;
    pw.interior = c;
    const auto whole = w_for_exp_poly_cost(mm1, c);
    const auto part = w_piecewise(mm1, pw);
    for (double u : {1.0, 10.0, 40.0}) EXPECT_LE(oracle::rel(part.w.real(u), whole.w.real(u)), 1e-8) << u;
    // Tail equal to the cost with a tiny breakpoint.
    PiecewiseCostSpec tail_only;
    tail_only.tau = 1e-9;
    tail_only.interior = c;
    tail_only.tail = c;
    const auto t = w_piecewise(mm1, tail_only);
    for (double u : {0.5, 3.0}) EXPECT_LE(oracle::rel(t.w.real(u), whole.w.real(u)), 1e-8);
}

TEST(PiecewiseFinite, Invariants) {
    PiecewiseCostSpec c;
    c.tau = 2.5;
    c.interior = {{0.2, 1, 0.0}};
    c.tail = {{1.0, 0, 0.0}, {-1.0, 0, 0.3}};
    for (const auto& q : {mm1, QueueSpec(0.7, Erlang{2, 3.0})}) {
        const auto r = w_piecewise(q, c);
        EXPECT_NEAR(std::abs(r.w.evaluate(0.0)), 0.0, 1e-14);
        EXPECT_LE(r.w.continuity_defect(), 1e-9);
        for (auto [a, b] : {std::pair{0.2, 1.7}, std::pair{1.9, 3.3}, std::pair{0.0, 6.0}}) {
            const double quad = oracle::integrate([&](double u) { return r.wprime.real(u); }, a, b);
            EXPECT_NEAR(r.w.real(b) - r.w.real(a), quad, 1e-8);
        }
    }
}

TEST(StepMd1, ClosedFormPoints) {
    const double lambda = 0.5, d = 1.0, tau = 2.5;
    const auto r = w_step_md1(md1, tau);
    EXPECT_NEAR(r.w.real(tau), md1_step_w_tau(lambda, d, tau), 1e-12);
    for (double u : {3.0, 4.5, 10.0}) EXPECT_NEAR(r.w.real(u) - r.w.real(tau), lambda * (u - tau) / (1 - lambda * d), 1e-12);
    EXPECT_LE(r.w.continuity_defect(), 1e-9);
}

TEST(StepMd1, JetMachineryAgrees) {
    for (double tau : {0.7, 2.5, 4.0}) {
        const auto a = w_step_md1(md1, tau);
        const auto b = w_piecewise_md1(md1, PiecewiseCostSpec::step(tau));
        for (int i = 0; i < 20; ++i) {
            const double u = 0.3 * i;
            EXPECT_NEAR(b.w.real(u), a.w.real(u), 1e-8 * (1 + std::abs(a.w.real(u))));
        }
        EXPECT_LE(b.w.continuity_defect(), 1e-9);
    }
}

TEST(StepMd1, TailMatchesFinitePoleShape) {
    // Beyond tau the slope of w is the constant gain.
    const auto b = w_piecewise_md1(md1, PiecewiseCostSpec::step(1.5));
    for (double u : {2.0, 5.0}) EXPECT_NEAR(b.wprime.real(u), md1.gain(), 1e-12);
}

TEST(StepMd1, AgainstSimulation) {
    const double tau = 2.5;
    const auto r = w_step_md1(md1, tau);
    SimConfig cfg{md1, [tau](double u) { return u >= tau ? 1.0 : 0.0; }, 77, 60000, 0, std::nullopt};
    for (double u : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        const auto e = sim_discharge_cost(cfg, u);
        EXPECT_TRUE(e.within(r.w.real(u))) << u << ": " << e.mean << " +- " << e.stderr_ << " vs " << r.w.real(u);
    }
}

TEST(PiecewiseMd1, GeneralCostAgainstSimulation) {
    PiecewiseCostSpec c;
    c.tau = 1.5;
    c.interior = {{0.5, 1, 0.0}};
    c.tail = {{1.0, 0, 0.0}, {-1.0, 0, 0.4}};
    const auto r = w_piecewise_md1(md1, c);
    EXPECT_LE(r.w.continuity_defect(), 1e-9);
    SimConfig cfg{md1, [c](double u) { return c.evaluate(u).real(); }, 78, 60000, 0, std::nullopt};
    for (double u : {0.5, 2.0, 3.5}) {
        const auto e = sim_discharge_cost(cfg, u);
        EXPECT_TRUE(e.within(r.w.real(u))) << u;
    }
}

TEST(PiecewiseCostSpec, Validation) {
    EXPECT_THROW(w_piecewise_md1(mm1, PiecewiseCostSpec::step(1.0)), UnsupportedModel);
    PiecewiseCostSpec bad;
    bad.tau = -1.0;
    EXPECT_THROW(w_piecewise(mm1, bad), DomainError);
}
