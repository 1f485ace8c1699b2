#include "oracles.hpp"
#include "wfn/piecewise.hpp"
#include "wfn/waiting_time.hpp"

#include <gtest/gtest.h>

using namespace wfn;

namespace {

const QueueSpec mm1(0.5, Exponential{1.0});
const QueueSpec md1(0.5, Deterministic{1.0});
const QueueSpec me2(1.0, Erlang{2, 4.0});

} // namespace

TEST(PkTransform, Values) {
    for (const auto& q : {mm1, md1, me2}) EXPECT_NEAR(std::abs(pk_lst(q, 0.0) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(pk_lst(mm1, 0.25).real(), 5.0 / 6.0, 1e-14);
    EXPECT_NEAR(pk_lst(mm1, 0.25).real(), oracle::mm1_wstar(0.5, 1.0, 0.25), 1e-14);
    EXPECT_NEAR(pk_lst(md1, 1.0).real(), 0.5 / (1.0 - 0.5 * (1.0 - std::exp(-1.0))), 1e-14);
    EXPECT_NEAR(std::abs(pk_lst_quotient(md1, 0.3) - pk_lst(md1, 0.3)), 0.0, 1e-14);
    // Tiny s goes through the removable point without cancellation.
    EXPECT_NEAR(pk_lst(md1, 1e-12).real(), 1.0, 1e-10);
}

TEST(PkTransform, SetupEqualToServiceCollapses) {
    const QueueSpec same(0.5, Exponential{1.0}, ServiceModel(Exponential{1.0}));
    for (double s : {0.1, 0.7, 2.0}) EXPECT_NEAR(std::abs(true_lst(same, s) - pk_lst(mm1, s)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(true_lst(same, 0.0) - 1.0), 0.0, 1e-14);
}

TEST(WaitingGerm, ClosedForms) {
    const auto y = germ_at_zero(mm1, 6).y;
    EXPECT_EQ(y[0], 1.0);
    for (int k = 1; k < 6; ++k) {
        // lambda / (omega (omega - lambda)^k)
        EXPECT_NEAR(y[static_cast<std::size_t>(k)], 0.5 / std::pow(0.5, k), 1e-12);
        if (k > 1) EXPECT_NEAR(y[static_cast<std::size_t>(k)] / y[static_cast<std::size_t>(k - 1)], 2.0, 1e-12);
    }
    EXPECT_NEAR(germ_at_zero(md1, 3).y[1], 0.5 / 0.5 * 0.5, 1e-14);
    const auto yd = germ_at_zero(md1, 12).y, ys = germ_at_zero_series(md1, 12).y;
    for (std::size_t k = 0; k < yd.size(); ++k) EXPECT_LE(oracle::rel(ys[k], yd[k]), 1e-10) << k;
    const auto ye = germ_at_zero(me2, 12).y, yes = germ_at_zero_series(me2, 12).y;
    for (std::size_t k = 0; k < ye.size(); ++k) EXPECT_LE(oracle::rel(yes[k], ye[k]), 1e-10) << k;
}

TEST(WaitingGerm, PositiveWithPoleRatio) {
    for (const auto& q : {mm1, md1, me2}) {
        const auto y = germ_at_zero(q, 60).y;
        for (std::size_t k = 1; k < y.size(); ++k) EXPECT_GT(y[k], 0.0);
        const double target = 1.0 / std::abs(dominant_pole(q));
        for (std::size_t k = y.size() - 5; k < y.size(); ++k) EXPECT_NEAR(y[k] / y[k - 1], target, 0.05 * target);
    }
}

TEST(WaitingGerm, ReconstructsTransform) {
    for (const auto& q : {mm1, md1, me2}) {
        const auto y = germ_at_zero(q, 80).y;
        const double r = 0.5 * std::abs(dominant_pole(q));
        for (double s : {-r, -0.3 * r, 0.2 * r, r}) {
            double acc = 0.0, pw = 1.0;
            for (double yk : y) {
                acc += yk * pw;
                pw *= -s;
            }
            EXPECT_LE(oracle::rel(acc, pk_lst(q, s).real()), 1e-8) << s;
        }
    }
}

TEST(ShiftedGerm, Values) {
    const auto g = germ_at_point(mm1, 0.25, 5);
    EXPECT_NEAR(g.y[0].real(), 5.0 / 6.0, 1e-14);
    EXPECT_NEAR(g.y[1].real(), 0.25 / (0.75 * 0.75), 1e-13);
    const auto y = germ_at_zero(md1, 5).y;
    const auto near0 = germ_at_point(md1, 1e-6, 5);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(near0.y[static_cast<std::size_t>(k)].real(), y[static_cast<std::size_t>(k)], 1e-4);
    // E[W e^{-aW}] by quadrature of the M/M/1 density.
    const double ref = oracle::integrate_to_inf([](double t) { return t * std::exp(-0.25 * t) * oracle::mm1_density(0.5, 1.0, t); }, 0);
    EXPECT_NEAR(g.y[1].real(), ref, 1e-9);
}

TEST(Poles, Dominant) {
    EXPECT_NEAR(dominant_pole(mm1), -0.5, 1e-14);
    const double pd = dominant_pole(md1);
    EXPECT_NEAR(pd, -1.2564312086, 1e-9);
    EXPECT_LE(std::abs(pd - 0.5 * (1.0 - std::exp(-pd))), 1e-10);
    // Erlang(2,4), lambda = 1: s^2 + 7 s + 8 = 0.
    EXPECT_NEAR(dominant_pole(me2), (-7.0 + std::sqrt(17.0)) / 2.0, 1e-12);
}

TEST(Poles, Sets) {
    const auto ps = pole_set(mm1);
    ASSERT_EQ(ps.poles.size(), 1u);
    EXPECT_NEAR(ps.poles[0].p.real(), -0.5, 1e-14);
    EXPECT_EQ(ps.poles[0].degree, 1);
    EXPECT_NEAR(ps.poles[0].residues[0].real(), 0.5 * (0.5 - 1.0) / 1.0, 1e-14);
    const auto pe1 = pole_set(QueueSpec(0.5, Erlang{1, 1.0}));
    ASSERT_EQ(pe1.poles.size(), 1u);
    EXPECT_NEAR(std::abs(pe1.poles[0].p - ps.poles[0].p), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(pe1.poles[0].residues[0] - ps.poles[0].residues[0]), 0.0, 1e-12);

    const QueueSpec e3(0.9, Erlang{3, 4.0});
    const auto p3 = pole_set(e3);
    int count = 0;
    for (const auto& p : p3.poles) {
        EXPECT_LT(p.p.real(), 0.0);
        count += p.degree;
        // Conjugate closure.
        const bool paired = std::any_of(p3.poles.begin(), p3.poles.end(),
                                        [&](const Pole& o) { return std::abs(o.p - std::conj(p.p)) < 1e-9; });
        EXPECT_TRUE(paired);
    }
    EXPECT_EQ(count, 3);
}

TEST(Poles, ErlangDensityMatchesTransform) {
    const QueueSpec q(0.6, Erlang{2, 1.5});
    const auto f = waiting_density_terms(q);
    const double mass = oracle::integrate_to_inf([&](double t) { return evaluate_terms(f, t).real(); }, 0.0);
    EXPECT_NEAR(mass, q.rho(), 1e-8);
    for (double s : {0.3, 1.0, 2.5}) {
        const double lt = oracle::integrate_to_inf([&](double t) { return std::exp(-s * t) * evaluate_terms(f, t).real(); }, 0.0);
        EXPECT_NEAR(lt + 1.0 - q.rho(), pk_lst(q, s).real(), 1e-8) << s;
    }
}

TEST(WaitingCdf, Values) {
    EXPECT_NEAR(waiting_cdf_mm1(mm1, 0.0), 0.5, 1e-15);
    EXPECT_NEAR(waiting_cdf_mm1(mm1, 2.0), 1.0 - 0.5 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(waiting_cdf_mm1(mm1, 200.0), 1.0, 1e-15);
    EXPECT_NEAR(waiting_cdf_md1(md1, 0.0), 0.5, 1e-14);
    double prev = 0.0;
    for (double u = 0.0; u < 10.0; u += 0.25) {
        const double F = waiting_cdf_md1(md1, u);
        EXPECT_GE(F, prev - 1e-12);
        prev = F;
    }
    // E[W] = int (1 - F).
    double mean = 0.0;
    for (int k = 0; k < 30; ++k) mean += oracle::integrate([](double u) { return 1.0 - waiting_cdf_md1(md1, u); }, k, k + 1, 1e-11);
    EXPECT_NEAR(mean, 0.5, 1e-7);
}

TEST(Admissibility, Exponents) {
    EXPECT_TRUE(admissible_exponent(mm1, 0.25));
    EXPECT_TRUE(admissible_exponent(mm1, -0.4));
    EXPECT_FALSE(admissible_exponent(mm1, -0.6));
}

TEST(PkTransform, UnstableRejected) {
    EXPECT_THROW(germ_at_zero(QueueSpec(1.2, Exponential{1.0}), 3), StabilityViolation);
}

namespace {

// E[S^k e^{-aS}] / k! for the three service families.
double service_shifted_coeff(const ServiceModel& m, double a, int k) {
    if (m.is_deterministic()) {
        const double d = m.det_value();
        return std::pow(d, k) * std::exp(-a * d) / factorial(k);
    }
    const int q = m.shape();
    const double w = m.rate();
    // omega^q Gamma(q + k) / (Gamma(q) k! (omega + a)^{q + k})
    return std::pow(w / (w + a), q) * std::exp(std::lgamma(q + k) - std::lgamma(q) - std::lgamma(k + 1.0)) / std::pow(w + a, k);
}

// Coefficient recursion for the expansion of W*(-s) at -a, seeded with W*(a).
std::vector<double> shifted_germ_recursion(const QueueSpec& q, double a, int n) {
    const double lambda = q.lambda(), rho = q.rho(), wa = pk_lst(q, a).real();
    std::vector<double> x(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) x[static_cast<std::size_t>(k)] = service_shifted_coeff(q.model(), a, k);
    std::vector<double> y{wa, lambda / (1 - rho) * (wa / a) * (wa / a) * (1 - x[0] - a * x[1])};
    for (int k = 2; k <= n; ++k) {
        double acc = (1 - lambda * x[1]) / lambda * y[static_cast<std::size_t>(k - 1)];
        for (int t = 0; t <= k - 2; ++t) acc -= x[static_cast<std::size_t>(k - t)] * y[static_cast<std::size_t>(t)];
        y.push_back(lambda * wa / ((1 - rho) * a) * acc);
    }
    return y;
}

} // namespace

TEST(ShiftedGerm, RecursionReproducesUnnormalizedCoefficients) {
    // The recursion loses about a factor 1/a per step in double precision, so only low orders are compared.
    for (const auto& q : {mm1, md1, me2})
        for (double a : {0.25, 0.6}) {
            const auto rec = shifted_germ_recursion(q, a, 6);
            const auto jet = germ_at_point(q, a, 12);
            for (std::size_t k = 0; k < rec.size(); ++k)
                EXPECT_LE(oracle::rel(jet.y[k].real(), rec[k]), 1e-10) << q.model().name() << " a=" << a << " k=" << k;
        }
}
