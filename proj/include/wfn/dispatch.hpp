#pragma once

#include "wfn/approx_uniform.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wfn {

struct ServerSpec {
    std::string id;
    QueueSpec queue;
    // Set for exp-poly costs; then no approximation is needed.
    std::optional<std::vector<ExpPolyTerm>> exact_cost;
    std::function<double(double)> cost;
    // (tau, delta) -> modulus on [0, tau]; estimated from samples when empty.
    std::function<double(double, double)> modulus;
    std::function<TailEnvelope(double)> tail;
    ApproxMethod method = ApproxMethod::NearBest;

    static ServerSpec exact(std::string id, QueueSpec q, std::vector<ExpPolyTerm> cost);
    static ServerSpec example7(std::string id, QueueSpec q, double a);
};

// Cost p(u) + shift on [0, tau) and tail(u) on [tau, inf); p may be absent (zero).
struct BandCost {
    const PolyApprox* poly = nullptr;
    double shift = 0.0;
    double tau = 1.0;
    std::vector<ExpPolyTerm> tail;
};

// w(u + d) - w(u) and the mean cost per job for a band cost, finite-pole service only.
// Uses w(u) = gain [(1 - rho) C(u) + int f(t) (C(u + t) - C(t)) dt] with C the cost antiderivative
// and f the waiting-time density, so the polynomial is never expanded in monomials.
double band_increment(const QueueSpec& spec, const BandCost& cost, double u, double d);
double band_mean_cost(const QueueSpec& spec, const BandCost& cost);
// Same, with the waiting-time density terms supplied.
double band_increment(const QueueSpec& spec, const std::vector<ExpPolyTerm>& density, const BandCost& cost, double u,
                      double d);
double band_mean_cost(const QueueSpec& spec, const std::vector<ExpPolyTerm>& density, const BandCost& cost);

// Holds the per-server approximation cache.
class AdmissionEvaluator {
public:
    explicit AdmissionEvaluator(ServerSpec server);

    const ServerSpec& server() const noexcept { return server_; }
    bool is_exact() const noexcept { return server_.exact_cost.has_value(); }

    Interval admission(double u, double d, double tau, int n);
    // Width of the admission interval of the tail envelope alone (zero cost on [0, tau)).
    double tail_width(double u, double d, double tau);
    // Admission magnitude of the indicator 1[0, tau).
    double indicator_magnitude(double u, double d, double tau);
    // Declared uniform error at (tau, n).
    double eta(double tau, int n);

private:
    const PolyApprox& approx(double tau, int n);
    double omega(double tau, double delta) const;
    Interval exact_admission(double u, double d);
    // (w(u + d) - w(u), mean cost) for a cost band.
    std::pair<double, double> band(const BandCost& cost, double u, double d);

    ServerSpec server_;
    std::map<std::pair<double, int>, PolyApprox> cache_;
    std::map<std::pair<double, int>, double> eta_cache_;
    std::vector<ExpPolyTerm> density_;
    std::optional<WResult> exact_w_;
};

Interval admission_interval(const ServerSpec& server, double u, double d, double tau, int n);

struct DispatchOptions {
    double eps0 = 0.5;
    int t_max = 12;
    double tau_min = 1.0;
    double tau_max = 16.0;
    int n_max = 64;
    // Bisection steps after the doubling search for tau.
    int tau_bisections = 3;
};

struct TraceEntry {
    int round;
    double eps;
    std::size_t server;
    double tau;
    int n;
    Interval admission;
};

struct DecisionRecord {
    std::vector<Interval> intervals;
    std::optional<std::size_t> winner;
    std::vector<std::size_t> survivors;
    std::vector<TraceEntry> trace;
    int rounds = 0;
    // Largest order used in the deciding round (or the last round when unresolved).
    int n_star = 0;
    // Per-server (tau, n) of the last round.
    std::vector<double> taus;
    std::vector<int> ns;
};

// Servers whose interval is not strictly above another's.
std::vector<std::size_t> undominated(const std::vector<Interval>& iv);

DecisionRecord dispatch_decide(std::vector<AdmissionEvaluator>& fleet, const std::vector<double>& u,
                               const std::vector<double>& d, const DispatchOptions& opt = {});
DecisionRecord dispatch_decide(const std::vector<ServerSpec>& fleet, const std::vector<double>& u,
                               const std::vector<double>& d, const DispatchOptions& opt = {});

struct PolicyPoint {
    double u1 = 0.0;
    double u2 = 0.0;
    std::optional<std::size_t> winner;
    int n_star = 0;
    int rounds = 0;
};

// Two-server map over grid_u1 x grid_u2 (row-major in u1).
std::vector<PolicyPoint> policy_map(const std::vector<ServerSpec>& fleet, const std::vector<double>& grid_u1,
                                    const std::vector<double>& grid_u2, const std::vector<double>& d,
                                    const DispatchOptions& opt = {});
// Columns u1,u2,winner,n_star,rounds; unresolved points carry winner "none".
std::string policy_csv(const std::vector<ServerSpec>& fleet, const std::vector<PolicyPoint>& points);

} // namespace wfn
