#include "oracles.hpp"
#include "wfn/simulator.hpp"

#include <gtest/gtest.h>

using namespace wfn;

namespace {

const QueueSpec mm1(0.5, Exponential{1.0});
const QueueSpec md1(0.5, Deterministic{1.0});

SimConfig config(const QueueSpec& q, std::function<double(double)> c, int reps = 40000, std::uint64_t seed = 9) {
    return SimConfig{q, std::move(c), seed, reps, 0, std::nullopt};
}

} // namespace

TEST(Philox, KnownAnswers) {
    using A4 = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, UniformAndReproducible) {
    RandomStream a(7, 3), b(7, 3), c(7, 4);
    double sum = 0.0;
    bool differs = false;
    for (int i = 0; i < 100000; ++i) {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        differs = differs || x != c.uniform();
        ASSERT_GT(x, 0.0);
        ASSERT_LT(x, 1.0);
        sum += x;
    }
    EXPECT_TRUE(differs);
    EXPECT_NEAR(sum / 100000, 0.5, 4 * std::sqrt(1.0 / 12 / 100000));
    EXPECT_EQ(a.draws(), 100000u);
}

TEST(Discharge, EmptyStartCostsNothing) {
    const auto e = sim_discharge_cost(config(mm1, [](double) { return 1.0; }, 1000), 0.0);
    EXPECT_EQ(e.mean, 0.0);
    EXPECT_EQ(e.stderr_, 0.0);
}

TEST(Discharge, UnitCostCountsArrivals) {
    for (const auto& q : {mm1, md1})
        for (double u : {0.5, 2.0}) {
            const auto e = sim_discharge_cost(config(q, [](double) { return 1.0; }), u);
            EXPECT_TRUE(e.within(q.gain() * u)) << e.mean << " " << q.gain() * u;
        }
}

TEST(Discharge, SaturationClosedForm) {
    const double a = 0.25, u = 2.0;
    const auto e = sim_discharge_cost(config(mm1, [a](double x) { return 1.0 - std::exp(-a * x); }, 100000), u);
    EXPECT_TRUE(e.within(oracle::saturation_w(mm1.gain(), oracle::mm1_wstar(0.5, 1.0, a), a, u)));
}

TEST(Discharge, MonotoneInBacklog) {
    // Same streams per replication, so the estimates are ordered path by path.
    const auto cfg = config(mm1, [](double x) { return x; }, 5000);
    double prev = 0.0;
    for (double u : {0.5, 1.0, 2.0, 4.0}) {
        const double m = sim_discharge_cost(cfg, u).mean;
        EXPECT_GT(m, prev);
        prev = m;
    }
}

TEST(Discharge, ThreadCountDoesNotChangeResult) {
    auto cfg = config(md1, [](double x) { return x * x; }, 3001);
    cfg.threads = 1;
    const auto one = sim_discharge_cost(cfg, 1.5);
    for (int t : {2, 3, 8}) {
        cfg.threads = t;
        const auto e = sim_discharge_cost(cfg, 1.5);
        EXPECT_EQ(e.mean, one.mean);
        EXPECT_EQ(e.stderr_, one.stderr_);
        EXPECT_EQ(e.count, one.count);
    }
}

TEST(LongRunCost, Values) {
    const auto one = sim_mean_cost(config(mm1, [](double) { return 1.0; }), 1000, 100000);
    EXPECT_EQ(one.mean, 1.0);
    const auto lin = sim_mean_cost(config(mm1, [](double x) { return x; }), 10000, 2000000);
    EXPECT_TRUE(lin.within(1.0)) << lin.mean << " +- " << lin.stderr_;
    const double a = 0.6282156043;
    const auto sat = sim_mean_cost(config(md1, [a](double x) { return 1.0 - std::exp(-a * x); }), 10000, 1000000);
    EXPECT_TRUE(sat.within(1.0 - oracle::md1_wstar(0.5, 1.0, a)));
}

TEST(BusyPeriod, FirstPassage) {
    const auto mm = sim_busy_period(config(mm1, {}, 40000), 2.0, 0.0);
    EXPECT_TRUE(mm.time.within(4.0)) << mm.time.mean;
    EXPECT_TRUE(mm.arrivals.within(2.0)) << mm.arrivals.mean;
    const auto md = sim_busy_period(config(md1, {}, 40000), 1.0, 0.0);
    EXPECT_TRUE(md.time.within(2.0));
    EXPECT_TRUE(md.arrivals.within(1.0));
    const auto part = sim_busy_period(config(mm1, {}, 40000), 3.0, 1.0);
    EXPECT_TRUE(part.time.within(4.0));
}

TEST(WaitingStats, MM1) {
    const std::vector<double> grid{0.5, 1.0, 3.0};
    const auto s = sim_waiting_stats(config(mm1, {}), 2000000, grid);
    EXPECT_TRUE(s.mean.within(1.0)) << s.mean.mean;
    // E[W^2] = 2 lambda / (omega (omega - lambda)^2) for M/M/1.
    EXPECT_TRUE(s.second_moment.within(4.0)) << s.second_moment.mean;
    EXPECT_TRUE(s.zero_fraction.within(0.5));
    ASSERT_EQ(s.cdf.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(s.cdf[i], 1.0 - 0.5 * std::exp(-0.5 * grid[i]), 5e-3);
}

TEST(WaitingStats, MD1Mean) {
    const auto s = sim_waiting_stats(config(md1, {}), 1000000);
    // lambda E[S^2] / (2 (1 - rho))
    EXPECT_TRUE(s.mean.within(0.5)) << s.mean.mean;
    EXPECT_TRUE(s.zero_fraction.within(0.5));
}
