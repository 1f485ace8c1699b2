#pragma once

#include "wfn/dispatch.hpp"
#include "wfn/piecewise.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wfn {

struct ModelConfig {
    std::string kind = "exponential"; // deterministic | exponential | erlang
    double d = 0.0;
    double omega = 0.0;
    int q = 1;

    ServiceModel build() const;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct CostConfig {
    // exppoly | piecewise | sampled | example7 | periodic
    std::string kind = "exppoly";
    std::vector<ExpPolyTerm> terms;
    double tau = 1.0;
    std::vector<ExpPolyTerm> interior;
    std::vector<ExpPolyTerm> tail;
    std::optional<double> c0;
    std::string expr;
    double a = 1.0;
    double period = 1.0;
    std::vector<ExpPolyTerm> tail_lower;
    std::vector<ExpPolyTerm> tail_upper;

    bool is_exact() const { return kind == "exppoly" || kind == "piecewise"; }
    PiecewiseCostSpec piecewise() const;
    std::function<double(double)> evaluator() const;
    SampledCost sampled(double tau) const;
    // Tail envelope above tau for sampled and example7 costs.
    TailEnvelope envelope(double tau) const;
    friend bool operator==(const CostConfig&, const CostConfig&) = default;
};

struct GridConfig {
    double min = 0.0;
    double max = 5.0;
    int steps = 11;

    std::vector<double> points() const;
    // "a:b:steps"
    static GridConfig parse(const std::string& text);
    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct BoundsConfig {
    int n_min = 1;
    int n_max = 25;
    // Derivative bounds for 1 - e^{-a u}.
    double saturation_rate = 0.0;
    friend bool operator==(const BoundsConfig&, const BoundsConfig&) = default;
};

struct TaylorConfig {
    int n = 40;
    friend bool operator==(const TaylorConfig&, const TaylorConfig&) = default;
};

struct ApproxConfig {
    std::vector<int> orders{5, 10, 20};
    double tau = 1.0;
    friend bool operator==(const ApproxConfig&, const ApproxConfig&) = default;
};

struct SimulateConfig {
    std::uint64_t seed = 1;
    int reps = 10000;
    int threads = 0;
    friend bool operator==(const SimulateConfig&, const SimulateConfig&) = default;
};

struct ServerConfig {
    std::string id;
    double lambda = 0.0;
    ModelConfig model;
    CostConfig cost;

    ServerSpec build() const;
    friend bool operator==(const ServerConfig&, const ServerConfig&) = default;
};

struct DispatchConfig {
    std::vector<double> d;
    GridConfig grid;
    double eps0 = 0.5;
    int tmax = 12;
    double tau_max = 16.0;
    int n_max = 64;

    DispatchOptions options() const;
    friend bool operator==(const DispatchConfig&, const DispatchConfig&) = default;
};

struct RunConfig {
    std::optional<double> lambda;
    std::optional<ModelConfig> model;
    std::optional<ModelConfig> model0;
    std::optional<CostConfig> cost;
    std::optional<GridConfig> grid;
    std::optional<BoundsConfig> bounds;
    std::optional<TaylorConfig> taylor;
    std::optional<ApproxConfig> approx;
    std::optional<SimulateConfig> simulate;
    std::vector<ServerConfig> servers;
    std::optional<DispatchConfig> dispatch;

    QueueSpec queue() const;
    const CostConfig& require_cost() const;
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws ConfigError naming the offending field (and line for syntax errors).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);
// FNV-1a of the serialized form.
std::string config_hash(const RunConfig& cfg);

} // namespace wfn
