#include "wfn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace wfn {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += W0;
            k[1] += W1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }
    return c;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t replication)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, rep_(replication) {}

double RandomStream::uniform() {
    if (used_ >= 4) {
        const std::uint64_t b = index_ / 2;
        block_ = philox4x32({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                             static_cast<std::uint32_t>(rep_), static_cast<std::uint32_t>(rep_ >> 32)},
                            key_);
        used_ = 0;
    }
    const std::uint64_t x = (static_cast<std::uint64_t>(block_[static_cast<std::size_t>(used_)]) << 32) |
                            block_[static_cast<std::size_t>(used_ + 1)];
    used_ += 2;
    ++index_;
    return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
}

double RandomStream::exponential(double rate) { return -std::log(uniform()) / rate; }

double RandomStream::service(const ServiceModel& m) {
    if (m.is_deterministic()) return m.det_value();
    double s = 0.0;
    for (int i = 0; i < m.shape(); ++i) s += exponential(m.rate());
    return s;
}

bool Estimate::within(double target, double sigmas) const {
    return std::abs(mean - target) <= sigmas * stderr_ + 1e-12 * (1.0 + std::abs(target));
}

namespace {

constexpr int batches = 32;
constexpr long long max_events = 2'000'000'000LL;

void require_config(const SimConfig& cfg) {
    stability_check(cfg.spec);
    if (cfg.replications < 1) throw DomainError("replications must be >= 1");
}

// Runs body(rep) for every replication, in parallel, and returns the results in replication order.
template <class R, class Body>
std::vector<R> run_replications(const SimConfig& cfg, Body body) {
    const auto n = static_cast<std::size_t>(cfg.replications);
    std::vector<R> out(n);
    std::size_t T = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
    T = std::min(T, n);
    std::vector<std::exception_ptr> failed(T);
    auto work = [&](std::size_t t) {
        try {
            for (std::size_t r = t * n / T; r < (t + 1) * n / T; ++r) out[r] = body(static_cast<std::uint64_t>(r));
        } catch (...) {
            failed[t] = std::current_exception();
        }
    };
    if (T == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < T; ++t) pool.emplace_back(work, t);
    }
    for (auto& e : failed)
        if (e) std::rethrow_exception(e);
    return out;
}

Estimate summarize(const std::vector<double>& x) {
    Estimate e;
    e.count = static_cast<long long>(x.size());
    double mean = 0.0, m2 = 0.0;
    long long k = 0;
    for (double v : x) {
        ++k;
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
    }
    e.mean = mean;
    e.stderr_ = k > 1 ? std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k)) : 0.0;
    return e;
}

// Batch-means estimate from per-batch averages; count is the number of observations.
Estimate batch_estimate(const std::vector<double>& batch_means, long long observations) {
    auto e = summarize(batch_means);
    e.count = observations;
    return e;
}

// Stationary chain of waiting times seen by arrivals (Lindley recursion).
class LindleyChain {
public:
    LindleyChain(const QueueSpec& spec, RandomStream& rng) : spec_(spec), rng_(rng) {}
    double next() {
        const double seen = w_;
        const double s = rng_.service(seen == 0.0 ? spec_.model0() : spec_.model());
        w_ = std::max(0.0, w_ + s - rng_.exponential(spec_.lambda()));
        return seen;
    }

private:
    const QueueSpec& spec_;
    RandomStream& rng_;
    double w_ = 0.0;
};

// Splits `jobs` observations into 32 batches and feeds each observation to visit(batch, value).
template <class Visit>
void run_chain(const SimConfig& cfg, long long warmup, long long jobs, Visit visit) {
    if (jobs < batches) throw DomainError("need at least 32 measured jobs");
    RandomStream rng(cfg.seed, 0);
    LindleyChain chain(cfg.spec, rng);
    for (long long i = 0; i < warmup; ++i) chain.next();
    for (long long i = 0; i < jobs; ++i) visit(static_cast<int>(i * batches / jobs), chain.next());
}

} // namespace

Estimate sim_discharge_cost(const SimConfig& cfg, double u0) {
    require_config(cfg);
    if (!(u0 >= 0.0)) throw DomainError("initial backlog must be >= 0");
    if (!cfg.cost) throw DomainError("cost evaluator missing");
    const auto& spec = cfg.spec;
    auto vals = run_replications<double>(cfg, [&](std::uint64_t rep) {
        RandomStream rng(cfg.seed, rep);
        double b = u0, total = 0.0;
        for (long long ev = 0; ev < max_events; ++ev) {
            const double a = rng.exponential(spec.lambda());
            if (a >= b) return total;
            b -= a;
            total += cfg.cost(b);
            b += rng.service(spec.model());
        }
        throw Error("discharge did not end within the event budget");
    });
    return summarize(vals);
}

Estimate sim_mean_cost(const SimConfig& cfg, long long warmup, long long jobs) {
    require_config(cfg);
    if (!cfg.cost) throw DomainError("cost evaluator missing");
    std::vector<double> sum(batches, 0.0);
    std::vector<long long> cnt(batches, 0);
    run_chain(cfg, warmup, jobs, [&](int b, double w) {
        sum[static_cast<std::size_t>(b)] += cfg.cost(w);
        ++cnt[static_cast<std::size_t>(b)];
    });
    std::vector<double> means(batches);
    for (int b = 0; b < batches; ++b)
        means[static_cast<std::size_t>(b)] = sum[static_cast<std::size_t>(b)] / static_cast<double>(cnt[static_cast<std::size_t>(b)]);
    return batch_estimate(means, jobs);
}

BusyPeriodEstimate sim_busy_period(const SimConfig& cfg, double u1, double u2) {
    require_config(cfg);
    if (!(u1 >= u2 && u2 >= 0.0)) throw DomainError("need u1 >= u2 >= 0");
    const auto& spec = cfg.spec;
    auto vals = run_replications<std::array<double, 2>>(cfg, [&](std::uint64_t rep) {
        RandomStream rng(cfg.seed, rep);
        double b = u1, T = 0.0, N = 0.0;
        for (long long ev = 0; ev < max_events; ++ev) {
            if (b <= u2) return std::array<double, 2>{T, N};
            const double a = rng.exponential(spec.lambda());
            if (b - a <= u2) return std::array<double, 2>{T + (b - u2), N};
            T += a;
            b -= a;
            N += 1.0;
            b += rng.service(spec.model());
        }
        throw Error("first passage did not end within the event budget");
    });
    std::vector<double> t(vals.size()), n(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        t[i] = vals[i][0];
        n[i] = vals[i][1];
    }
    return {summarize(t), summarize(n)};
}

WaitingStats sim_waiting_stats(const SimConfig& cfg, long long jobs, const std::vector<double>& grid) {
    require_config(cfg);
    std::vector<double> s1(batches, 0.0), s2(batches, 0.0), z(batches, 0.0);
    std::vector<long long> cnt(batches, 0);
    std::vector<long long> below(grid.size(), 0);
    run_chain(cfg, jobs / 10, jobs, [&](int b, double w) {
        const auto B = static_cast<std::size_t>(b);
        s1[B] += w;
        s2[B] += w * w;
        z[B] += w == 0.0 ? 1.0 : 0.0;
        ++cnt[B];
        for (std::size_t g = 0; g < grid.size(); ++g)
            if (w <= grid[g]) ++below[g];
    });
    for (int b = 0; b < batches; ++b) {
        const auto B = static_cast<std::size_t>(b);
        const double c = static_cast<double>(cnt[B]);
        s1[B] /= c;
        s2[B] /= c;
        z[B] /= c;
    }
    WaitingStats out;
    out.mean = batch_estimate(s1, jobs);
    out.second_moment = batch_estimate(s2, jobs);
    out.zero_fraction = batch_estimate(z, jobs);
    out.grid = grid;
    for (auto c : below) out.cdf.push_back(static_cast<double>(c) / static_cast<double>(jobs));
    return out;
}

} // namespace wfn
