#include "oracles.hpp"
#include "wfn/dispatch.hpp"
#include "wfn/simulator.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace wfn;

namespace {

struct Mm1 {
    double lambda, omega;
    double rho() const { return lambda / omega; }
    double gain() const { return lambda / (1.0 - rho()); }
};

// E[c(x + W)] for the M/M/1 waiting time.
double shifted_mean(const Mm1& q, const std::function<double(double)>& c, double x) {
    return (1.0 - q.rho()) * c(x) +
           oracle::integrate_to_inf([&](double t) { return c(x + t) * oracle::mm1_density(q.lambda, q.omega, t); }, 0.0, 1e-11);
}

// w(u + d) - w(u) - gain d cbar by nested quadrature.
double admission_oracle(const Mm1& q, const std::function<double(double)>& c, double u, double d) {
    const double dw = q.gain() * oracle::integrate([&](double x) { return shifted_mean(q, c, x); }, u, u + d, 1e-10);
    return dw - q.gain() * d * shifted_mean(q, c, 0.0);
}

double example7(double u) { return u * u / (1.0 + u * u); }

const Mm1 fast{1.0, 2.0}, slow{0.5, 1.0};

std::vector<ServerSpec> figure3_fleet() {
    return {ServerSpec::example7("1", QueueSpec(1.0, Exponential{2.0}), 1.0),
            ServerSpec::example7("2", QueueSpec(0.5, Exponential{1.0}), 1.0)};
}

std::vector<ExpPolyTerm> saturation(double k = 1.0) { return {{k, 0, 0.0}, {-k, 0, 0.5}}; }

} // namespace

TEST(Admission, ZeroServiceIsZero) {
    for (const auto& s : figure3_fleet()) {
        const auto iv = admission_interval(s, 2.0, 0.0, 4.0, 8);
        EXPECT_TRUE(iv.contains(0.0));
        EXPECT_LE(iv.width(), 1e-12);
    }
    const auto ex = admission_interval(ServerSpec::exact("e", QueueSpec(0.5, Exponential{1.0}), saturation()), 3.0, 0.0, 1.0, 1);
    EXPECT_NEAR(ex.lo, 0.0, 1e-14);
}

TEST(Admission, ExactCostIsDegenerate) {
    const QueueSpec q(0.5, Exponential{1.0});
    const auto r = w_for_exp_poly_cost(q, saturation());
    const auto s = ServerSpec::exact("e", q, saturation());
    for (double u : {0.0, 1.0, 4.0}) {
        const auto iv = admission_interval(s, u, 1.5, 1.0, 1);
        EXPECT_EQ(iv.width(), 0.0);
        EXPECT_NEAR(iv.lo, admission_cost(r, u, 1.5).real(), 1e-14);
        EXPECT_NEAR(iv.lo, admission_oracle(slow, [](double x) { return 1.0 - std::exp(-0.5 * x); }, u, 1.5), 1e-8);
    }
}

TEST(Admission, RationalRampIntervalContainsTruth) {
    const auto fleet = figure3_fleet();
    const Mm1 qs[2] = {fast, slow};
    for (std::size_t i = 0; i < 2; ++i) {
        AdmissionEvaluator ev(fleet[i]);
        for (double u : {0.0, 1.5, 4.0}) {
            const double truth = admission_oracle(qs[i], example7, u, 1.0 + i);
            double prev = INFINITY;
            for (int n : {4, 16, 64}) {
                const auto iv = ev.admission(u, 1.0 + i, 8.0, n);
                EXPECT_TRUE(iv.contains(truth)) << i << " u=" << u << " n=" << n << " [" << iv.lo << "," << iv.hi << "] " << truth;
                EXPECT_LE(iv.width(), prev + 1e-12);
                prev = iv.width();
            }
        }
    }
}

TEST(Admission, IntervalContainsSimulatedEstimate) {
    const auto s = figure3_fleet()[1];
    const auto iv = admission_interval(s, 1.0, 2.0, 8.0, 32);
    SimConfig cfg{s.queue, example7, 5, 60000, 0, std::nullopt};
    const auto a = sim_discharge_cost(cfg, 1.0), b = sim_discharge_cost(cfg, 3.0);
    const double cbar = shifted_mean(slow, example7, 0.0);
    const double sim = b.mean - a.mean - slow.gain() * 2.0 * cbar;
    const double se = std::hypot(a.stderr_, b.stderr_);
    EXPECT_LE(iv.lo, sim + 3 * se);
    EXPECT_GE(iv.hi, sim - 3 * se);
}

TEST(Admission, FastServerContainsSimulatedEstimate) {
    const auto s = figure3_fleet()[0];
    const auto iv = admission_interval(s, 1.0, 1.0, 2.0, 10);
    SimConfig cfg{s.queue, example7, 6, 60000, 0, std::nullopt};
    const auto a = sim_discharge_cost(cfg, 1.0), b = sim_discharge_cost(cfg, 2.0);
    const double sim = b.mean - a.mean - fast.gain() * shifted_mean(fast, example7, 0.0);
    const double se = std::hypot(a.stderr_, b.stderr_);
    EXPECT_LE(iv.lo, sim + 3 * se);
    EXPECT_GE(iv.hi, sim - 3 * se);
}

TEST(Dispatch, SymmetricTieStaysUnresolved) {
    const QueueSpec q(0.5, Exponential{1.0});
    const std::vector<ServerSpec> fleet{ServerSpec::exact("a", q, saturation()), ServerSpec::exact("b", q, saturation())};
    const auto rec = dispatch_decide(fleet, {1.0, 1.0}, {1.0, 1.0});
    EXPECT_FALSE(rec.winner);
    EXPECT_EQ(rec.survivors.size(), 2u);
    // Exact costs never change between rounds, so the loop stops after one.
    EXPECT_EQ(rec.rounds, 1);
}

TEST(Dispatch, ExactDistinctCostsResolveInOneRound) {
    const QueueSpec q(0.5, Exponential{1.0});
    const std::vector<ServerSpec> fleet{ServerSpec::exact("a", q, saturation()), ServerSpec::exact("b", q, saturation())};
    const auto rec = dispatch_decide(fleet, {3.0, 0.5}, {1.0, 1.0});
    auto c = [](double x) { return 1.0 - std::exp(-0.5 * x); };
    const std::size_t best = admission_oracle(slow, c, 3.0, 1.0) < admission_oracle(slow, c, 0.5, 1.0) ? 0 : 1;
    ASSERT_TRUE(rec.winner);
    EXPECT_EQ(*rec.winner, best);
    EXPECT_EQ(rec.rounds, 1);
    EXPECT_EQ(rec.n_star, 0);
}

TEST(Dispatch, ConstantCostsNeverSeparate) {
    // A constant cost gives zero admission cost on any queue.
    const std::vector<ServerSpec> fleet{ServerSpec::exact("a", QueueSpec(0.5, Exponential{1.0}), {{1.0, 0, 0.0}}),
                                        ServerSpec::exact("b", QueueSpec(1.0, Exponential{2.0}), {{1.0, 0, 0.0}})};
    for (double u : {0.0, 2.0}) {
        const auto rec = dispatch_decide(fleet, {u, 5.0 - u}, {1.0, 2.0});
        EXPECT_FALSE(rec.winner);
        for (const auto& iv : rec.intervals) EXPECT_NEAR(iv.lo, 0.0, 1e-12);
    }
}

TEST(Dispatch, DominatedFleet) {
    // Half the cost on the same queue; the admission cost of an increasing cost is nonnegative.
    const QueueSpec q(0.5, Exponential{1.0});
    const std::vector<ServerSpec> fleet{ServerSpec::exact("cheap", q, saturation(0.5)), ServerSpec::exact("dear", q, saturation(1.0))};
    for (double u : {0.0, 0.5, 2.0, 6.0}) {
        const auto rec = dispatch_decide(fleet, {u, u}, {1.0, 1.0});
        ASSERT_TRUE(rec.winner) << u;
        EXPECT_EQ(*rec.winner, 0u);
    }
}

TEST(Dispatch, TwoServerGridSoundness) {
    const auto fleet = figure3_fleet();
    std::vector<AdmissionEvaluator> ev{AdmissionEvaluator(fleet[0]), AdmissionEvaluator(fleet[1])};
    DispatchOptions opt;
    opt.t_max = 6;
    int resolved = 0;
    for (double u1 : {0.0, 2.0, 5.0})
        for (double u2 : {0.0, 2.0, 5.0}) {
            const auto rec = dispatch_decide(ev, {u1, u2}, {1.0, 2.0}, opt);
            const double a1 = admission_oracle(fast, example7, u1, 1.0), a2 = admission_oracle(slow, example7, u2, 2.0);
            EXPECT_TRUE(rec.intervals[0].contains(a1)) << u1 << "," << u2;
            EXPECT_TRUE(rec.intervals[1].contains(a2)) << u1 << "," << u2;
            if (rec.winner) {
                ++resolved;
                EXPECT_EQ(*rec.winner, a1 < a2 ? 0u : 1u) << u1 << "," << u2;
            } else {
                EXPECT_EQ(rec.survivors.size(), 2u);
            }
            for (const auto& t : rec.trace) EXPECT_GE(t.admission.hi, t.admission.lo);
        }
    EXPECT_GT(resolved, 0);
}

TEST(Dispatch, PermutationSymmetry) {
    auto fleet = figure3_fleet();
    std::vector<ServerSpec> swapped{fleet[1], fleet[0]};
    DispatchOptions opt;
    opt.t_max = 5;
    for (auto [u1, u2] : {std::pair{0.0, 4.0}, std::pair{3.0, 1.0}, std::pair{5.0, 5.0}}) {
        const auto a = dispatch_decide(fleet, {u1, u2}, {1.0, 2.0}, opt);
        const auto b = dispatch_decide(swapped, {u2, u1}, {2.0, 1.0}, opt);
        EXPECT_EQ(a.winner.has_value(), b.winner.has_value());
        if (a.winner) EXPECT_EQ(*a.winner, 1 - *b.winner);
        EXPECT_NEAR(a.intervals[0].lo, b.intervals[1].lo, 1e-12);
        EXPECT_NEAR(a.intervals[1].hi, b.intervals[0].hi, 1e-12);
    }
}

TEST(Dispatch, InvalidInputs) {
    const auto fleet = figure3_fleet();
    EXPECT_THROW(dispatch_decide(fleet, {1.0}, {1.0, 1.0}), DomainError);
    EXPECT_THROW(dispatch_decide(std::vector<ServerSpec>{}, {}, {}), DomainError);
    DispatchOptions bad;
    bad.eps0 = 0.0;
    EXPECT_THROW(dispatch_decide(fleet, {1.0, 1.0}, {1.0, 1.0}, bad), DomainError);
}

TEST(Undominated, Sets) {
    EXPECT_EQ(undominated({Interval(0, 1), Interval(2, 3)}), (std::vector<std::size_t>{0}));
    EXPECT_EQ(undominated({Interval(0, 2), Interval(1, 3)}), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(undominated({Interval(5, 6), Interval(0, 1), Interval(0.5, 4)}), (std::vector<std::size_t>{1, 2}));
}

TEST(PolicyMap, CsvFormat) {
    const QueueSpec q(0.5, Exponential{1.0});
    const std::vector<ServerSpec> fleet{ServerSpec::exact("a", q, saturation()), ServerSpec::exact("b", q, saturation())};
    const auto pts = policy_map(fleet, {0.0, 1.0}, {0.0, 2.0}, {1.0, 1.0});
    ASSERT_EQ(pts.size(), 4u);
    const auto csv = policy_csv(fleet, pts);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "u1,u2,winner,n_star,rounds");
    std::vector<std::string> rows;
    while (std::getline(is, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], "0,0,none,0,1");
    EXPECT_EQ(rows[1].substr(0, 6), "0,2,a,");
    EXPECT_EQ(rows[2].substr(0, 6), "1,0,b,");
}
