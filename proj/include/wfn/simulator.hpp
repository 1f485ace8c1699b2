#pragma once

#include "wfn/service_models.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace wfn {

// Philox4x32-10 counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Draws for one (seed, replication) pair; the draw index is the low half of the counter.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t replication);

    // Uniform on (0, 1), 53 bits.
    double uniform();
    double exponential(double rate);
    double service(const ServiceModel& m);
    std::uint64_t draws() const noexcept { return index_; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t rep_;
    std::uint64_t index_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
};

struct SimConfig {
    QueueSpec spec;
    std::function<double(double)> cost;
    std::uint64_t seed = 1;
    int replications = 10000;
    // 0 picks the hardware concurrency.
    int threads = 0;
    std::optional<double> u0;
};

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long long count = 0;

    bool within(double target, double sigmas = 3.0) const;
};

// Cost paid by arrivals while the backlog discharges from u0 to 0 (estimates w(u0)).
Estimate sim_discharge_cost(const SimConfig& cfg, double u0);
// Long-run mean cost per job, batch means over 32 batches.
Estimate sim_mean_cost(const SimConfig& cfg, long long warmup, long long jobs);

struct BusyPeriodEstimate {
    Estimate time;
    Estimate arrivals;
};
// First passage from backlog u1 down to u2.
BusyPeriodEstimate sim_busy_period(const SimConfig& cfg, double u1, double u2);

struct WaitingStats {
    Estimate mean;
    Estimate second_moment;
    Estimate zero_fraction;
    std::vector<double> grid;
    std::vector<double> cdf;
};
WaitingStats sim_waiting_stats(const SimConfig& cfg, long long jobs, const std::vector<double>& grid = {});

} // namespace wfn
