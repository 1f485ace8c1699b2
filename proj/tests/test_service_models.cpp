#include "oracles.hpp"
#include "wfn/service_models.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace wfn;

namespace {

double erlang_density(int q, double omega, double t) {
    return std::pow(omega, q) * std::pow(t, q - 1) * std::exp(-omega * t) / factorial(q - 1);
}

} // namespace

TEST(ServiceModel, Moments) {
    EXPECT_NEAR(ServiceModel(Exponential{1.0}).moment(3), 6.0, 1e-14);
    EXPECT_NEAR(ServiceModel(Deterministic{2.0}).moment(2), 4.0, 1e-14);
    const double ref = oracle::integrate_to_inf([](double t) { return t * t * erlang_density(2, 1.0, t); }, 0.0);
    EXPECT_NEAR(ServiceModel(Erlang{2, 1.0}).moment(2), ref, 1e-9);
    EXPECT_NEAR(ref, 6.0, 1e-9);
    EXPECT_NEAR(ServiceModel(Erlang{2, 4.0}).mean(), 0.5, 1e-15);
}

TEST(ServiceModel, Transform) {
    for (const ServiceModel m : {ServiceModel(Exponential{1.0}), ServiceModel(Deterministic{1.0}), ServiceModel(Erlang{3, 2.0})})
        EXPECT_NEAR(std::abs(m.lst(0.0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(ServiceModel(Exponential{1.0}).lst(1.0).real(), 0.5, 1e-15);
    const auto z = ServiceModel(Deterministic{1.0}).lst(cplx(0.0, M_PI));
    EXPECT_NEAR(z.real(), -1.0, 1e-15);
    EXPECT_NEAR(z.imag(), 0.0, 1e-15);
}

TEST(ServiceModel, TransformDerivativesGiveMoments) {
    for (const ServiceModel m : {ServiceModel(Exponential{1.5}), ServiceModel(Deterministic{0.7}), ServiceModel(Erlang{2, 3.0})}) {
        const double h = 1e-2;
        auto f = [&](double s) { return m.lst(s).real(); };
        const std::vector<double> d{(f(h) - f(-h)) / (2 * h), (f(h) - 2 * f(0) + f(-h)) / (h * h),
                                    (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h * h * h)};
        for (int k = 1; k <= 3; ++k) {
            const double expect = std::pow(-1.0, k) * m.moment(k);
            EXPECT_NEAR(d[static_cast<std::size_t>(k - 1)], expect, 1e-3 * std::abs(expect)) << m.name() << " k=" << k;
        }
    }
}

TEST(ServiceModel, ShiftedMomentCoefficients) {
    EXPECT_NEAR(ServiceModel(Exponential{1.0}).shifted_moment_coeff(0.0, 3).real(), 1.0, 1e-14);
    EXPECT_NEAR(ServiceModel(Deterministic{1.0}).shifted_moment_coeff(1.0, 2).real(), std::exp(-1.0) / 2, 1e-15);
    const double ref = oracle::integrate_to_inf([](double t) { return t * std::exp(-1.25 * t); }, 0.0);
    EXPECT_NEAR(ServiceModel(Exponential{1.0}).shifted_moment_coeff(0.25, 1).real(), ref, 1e-9);
    EXPECT_NEAR(ref, 0.64, 1e-9);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(-0.5, 2.0);
    std::uniform_int_distribution<int> uk(0, 5);
    for (int i = 0; i < 20; ++i) {
        const double a = ua(rng);
        const int k = uk(rng);
        const ServiceModel m(Erlang{2, 3.0});
        const double q = oracle::integrate_to_inf(
            [&](double t) { return std::pow(t, k) * std::exp(-a * t) * erlang_density(2, 3.0, t); }, 0.0, 1e-13);
        EXPECT_LE(oracle::rel(m.shifted_moment_coeff(a, k).real() * factorial(k), q), 1e-8) << a << " " << k;
    }
}

TEST(QueueSpec, Stability) {
    const QueueSpec ok(0.5, Exponential{1.0});
    EXPECT_NEAR(ok.rho(), 0.5, 1e-15);
    EXPECT_NO_THROW(stability_check(ok));
    EXPECT_THROW(stability_check(QueueSpec(1.0, Deterministic{1.0})), StabilityViolation);
    const QueueSpec er(1.0, Erlang{2, 4.0});
    EXPECT_NEAR(er.rho(), 0.5, 1e-15);
    EXPECT_NO_THROW(stability_check(er));
    EXPECT_NEAR(ok.gain(), 1.0, 1e-15);
}

TEST(ServiceModel, InvalidParameters) {
    EXPECT_THROW(ServiceModel(Exponential{0.0}), DomainError);
    EXPECT_THROW(ServiceModel(Deterministic{-1.0}), DomainError);
    EXPECT_THROW(ServiceModel(Erlang{0, 1.0}), DomainError);
}

TEST(QueueSpec, SetupModel) {
    const QueueSpec s(0.5, Exponential{1.0}, ServiceModel(Deterministic{2.0}));
    EXPECT_TRUE(s.has_setup());
    EXPECT_NEAR(utilization(s).rho0, 1.0, 1e-15);
    EXPECT_NEAR(s.rho(), 0.5, 1e-15);
}
