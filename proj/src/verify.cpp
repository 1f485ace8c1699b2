#include "wfn/verify.hpp"

#include "wfn/commands.hpp"
#include "wfn/dispatch.hpp"
#include "wfn/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

namespace wfn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel_err(double x, double ref) { return std::abs(x - ref) / std::max(1e-300, std::abs(ref)); }

// w for c(u) = 1 - e^{-a u} from the waiting-time transform value W*(a).
double saturation_w(double gain, double wstar_a, double a, double u) {
    return gain * (u - wstar_a * (1.0 - std::exp(-a * u)) / a);
}

double mm1_wstar(double lambda, double omega, double s) {
    const double rho = lambda / omega;
    return (1.0 - rho) * (s + omega) / (s + omega - lambda);
}

double md1_wstar(double lambda, double d, double s) {
    const double rho = lambda * d;
    return (1.0 - rho) * s / (s - lambda * (1.0 - std::exp(-s * d)));
}

double taylor_w(const Germ& wprime, double u) {
    double acc = 0.0, pw = u;
    for (std::size_t k = 0; k < wprime.coeffs.size(); ++k) {
        acc += wprime.coeffs[k].real() * pw;
        pw *= u / static_cast<double>(k + 2);
    }
    return acc;
}

SimConfig sim_config(const QueueSpec& q, std::function<double(double)> cost, std::uint64_t seed, int reps) {
    return SimConfig{q, std::move(cost), seed, reps, 0, std::nullopt};
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

// Drops the trailing "; " left by list builders.
std::string trimmed(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == ';')) s.pop_back();
    return s;
}

CriterionResult closed_form_concordance() {
    const auto t0 = Clock::now();
    const double lambda = 0.5, omega = 1.0, a = 0.25;
    const QueueSpec q(lambda, Exponential{omega});
    const std::vector<ExpPolyTerm> cost{{1.0, 0, 0.0}, {-1.0, 0, a}};
    const auto table = w_for_exp_poly_cost(q, cost);
    const auto germ = filter_germ(q, germ_source(cost), 40);
    PiecewiseCostSpec pw;
    pw.tau = 20.0;
    pw.interior = cost;
    pw.tail = cost;
    const auto piece = w_piecewise(q, pw);
    const auto sim = sim_config(q, [a](double u) { return 1.0 - std::exp(-a * u); }, 101, 100000);

    double worst = 0.0, worst_z = 0.0;
    for (double u : {0.5, 1.0, 2.0, 5.0}) {
        const double ref = saturation_w(q.gain(), mm1_wstar(lambda, omega, a), a, u);
        worst = std::max({worst, rel_err(table.w.real(u), ref), rel_err(taylor_w(germ, u), ref),
                          rel_err(piece.w.real(u), ref)});
        const auto e = sim_discharge_cost(sim, u);
        worst_z = std::max(worst_z, std::abs(e.mean - ref) / e.stderr_);
    }
    const double secs = seconds_since(t0);
    return {1, "closed-form concordance", worst <= 1e-8 && worst_z <= 3.0 && secs < 60.0,
            "max rel err " + fmt(worst) + ", max |z| " + fmt(worst_z) + ", " + fmt(secs) + " s", 0.0};
}

CriterionResult divergence() {
    const QueueSpec q(0.5, Exponential{1.0});
    const std::vector<ExpPolyTerm> cost{{1.0, 0, 0.0}, {-1.0, 0, 0.75}};
    try {
        (void)filter_germ(q, germ_source(cost), 1);
    } catch (const DivergentSeries& e) {
        const auto& w = e.witness();
        bool growing = w.size() > 40;
        for (std::size_t i = 31; growing && i <= 40; ++i) growing = w[i] > w[i - 1];
        return {2, "divergence", growing,
                "witness length " + std::to_string(w.size()) + (growing ? ", strictly growing over 30..40" : ", not growing over 30..40"), 0.0};
    }
    return {2, "divergence", false, "no divergence raised", 0.0};
}

CriterionResult md1_step() {
    const double tau = 2.5;
    const QueueSpec q(0.5, Deterministic{1.0});
    const auto closed = w_step_md1(q, tau);
    const auto jets = w_piecewise_md1(q, PiecewiseCostSpec::step(tau));
    const auto sim = sim_config(q, [tau](double u) { return u >= tau ? 1.0 : 0.0; }, 303, 100000);
    double worst = 0.0, worst_z = 0.0;
    for (double u : {0.5, 1.5, 2.0, 3.0}) {
        const double ref = closed.w.real(u);
        worst = std::max(worst, rel_err(jets.w.real(u), ref));
        const auto e = sim_discharge_cost(sim, u);
        worst_z = std::max(worst_z, std::abs(e.mean - ref) / e.stderr_);
    }
    const double jump = std::max(closed.w.continuity_defect(), jets.w.continuity_defect());
    return {3, "M/D/1 step cost", worst <= 1e-8 && worst_z <= 3.0 && jump <= 1e-9,
            "max rel err " + fmt(worst) + ", max |z| " + fmt(worst_z) + ", max jump " + fmt(jump), 0.0};
}

CriterionResult approximation_bounds() {
    const auto t0 = Clock::now();
    const auto c = example7_cost(1.0, 1.0);
    bool ok = true;
    std::ostringstream os;
    double nb20 = 0.0, b20 = 0.0;
    for (int n : {5, 10, 20}) {
        const auto b = bernstein(c, n);
        const auto nb = near_best(c, n);
        const double eb = approximation_error(c, b), enb = approximation_error(c, nb);
        ok = ok && eb <= b.eta && enb <= nb.eta;
        os << "n=" << n << ": bern " << fmt(eb) << "/" << fmt(b.eta) << ", near " << fmt(enb) << "/" << fmt(nb.eta) << "; ";
        if (n == 20) {
            nb20 = enb;
            b20 = eb;
        }
    }
    const double secs = seconds_since(t0);
    ok = ok && nb20 < b20 && secs < 30.0;
    os << fmt(secs) << " s";
    return {4, "approximation bounds", ok, trimmed(os.str()), 0.0};
}

// Containment of the closed form and width shrinkage for the Taylor interval bounds.
bool bounds_family(const QueueSpec& q, double a, double wstar_a, std::string& note) {
    const std::vector<ExpPolyTerm> cost{{1.0, 0, 0.0}, {-1.0, 0, a}};
    Germ g;
    for (int k = 0; k <= 27; ++k) g.coeffs.push_back(terms_derivative_at_zero(cost, k));
    const auto db = exp_saturation_bounds(a, 25);
    bool contained = true;
    double w5 = 0.0, w25 = 0.0;
    for (int n = 1; n <= 25; ++n) {
        const auto iv = polynomial_bounds(q, g, n, db);
        for (int i = 0; i <= 20; ++i) {
            const double u = 0.25 * i;
            const double ref = saturation_w(q.gain(), wstar_a, a, u);
            const double lo = iv.lower.real(u), hi = iv.upper.real(u);
            contained = contained && lo <= ref + 1e-9 && ref <= hi + 1e-9;
        }
        const double width = iv.upper.real(2.0) - iv.lower.real(2.0);
        if (n == 5) w5 = width;
        if (n == 25) w25 = width;
    }
    note += (contained ? "contained" : "NOT contained") + std::string(", width ratio ") + fmt(w25 / w5) + "; ";
    return contained && w25 < 0.1 * w5;
}

CriterionResult interval_shrinkage() {
    std::string note = "M/M/1: ";
    const QueueSpec mm1(0.5, Exponential{1.0});
    bool ok = bounds_family(mm1, 0.25, mm1_wstar(0.5, 1.0, 0.25), note);
    const QueueSpec md1(0.5, Deterministic{1.0});
    const double a = 0.5 * std::abs(dominant_pole(md1));
    note += "M/D/1: ";
    ok = bounds_family(md1, a, md1_wstar(0.5, 1.0, a), note) && ok;
    return {5, "interval validity and shrinkage", ok, trimmed(note), 0.0};
}

CriterionResult policy_map_criterion() {
    const auto t0 = Clock::now();
    const std::vector<ServerSpec> fleet{ServerSpec::example7("1", QueueSpec(1.0, Exponential{2.0}), 1.0),
                                        ServerSpec::example7("2", QueueSpec(0.5, Exponential{1.0}), 1.0)};
    const std::vector<double> d{1.0, 2.0};
    std::vector<AdmissionEvaluator> ev;
    for (const auto& s : fleet) ev.emplace_back(s);
    int resolved = 0, total = 0, flipped = 0, kept = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const std::vector<double> u{5.0 * i / 19.0, 5.0 * j / 19.0};
            const auto rec = dispatch_decide(ev, u, d);
            ++total;
            if (!rec.winner) continue;
            ++resolved;
            std::vector<Interval> again;
            for (std::size_t k = 0; k < ev.size(); ++k)
                again.push_back(ev[k].admission(u[k], d[k], 2.0 * rec.taus[k], 2 * rec.ns[k]));
            const auto keep = undominated(again);
            const bool in = std::find(keep.begin(), keep.end(), *rec.winner) != keep.end();
            if (!in || (keep.size() == 1 && keep.front() != *rec.winner)) ++flipped;
            if (keep.size() == 1 && keep.front() == *rec.winner) ++kept;
        }
    const double secs = seconds_since(t0);
    const double frac = static_cast<double>(resolved) / total;
    return {6, "policy map", frac >= 0.95 && flipped == 0 && secs < 300.0,
            "resolved " + std::to_string(resolved) + "/" + std::to_string(total) + " (" + fmt(100.0 * frac) +
                "%), flipped under doubling " + std::to_string(flipped) + ", still separated " + std::to_string(kept) +
                ", " + fmt(secs) + " s",
            0.0};
}

std::vector<std::pair<std::string, QueueSpec>> three_models(double rho) {
    return {{"M/M/1", QueueSpec(rho, Exponential{1.0})},
            {"M/D/1", QueueSpec(rho, Deterministic{1.0})},
            {"M/E2/1", QueueSpec(rho, Erlang{2, 2.0})}};
}

CriterionResult lemma1() {
    const double u1 = 2.0, u2 = 0.5;
    double worst = 0.0;
    std::uint64_t seed = 700;
    for (double rho : {0.3, 0.5, 0.8})
        for (const auto& [name, q] : three_models(rho)) {
            const auto bp = sim_busy_period(sim_config(q, {}, ++seed, 40000), u1, u2);
            const double T = (u1 - u2) / (1.0 - q.rho());
            const double N = q.lambda() * T;
            worst = std::max({worst, std::abs(bp.time.mean - T) / bp.time.stderr_,
                              std::abs(bp.arrivals.mean - N) / bp.arrivals.stderr_});
        }
    return {7, "first-passage identities", worst <= 3.0, "max |z| " + fmt(worst) + " over 9 cases", 0.0};
}

CriterionResult pk_germ() {
    double worst = 0.0;
    std::uint64_t seed = 800;
    std::ostringstream os;
    for (const auto& [name, q] : three_models(0.5)) {
        const auto y = germ_at_zero(q, 2).y;
        const auto ws = sim_waiting_stats(sim_config(q, {}, ++seed, 1), 4000000);
        const double z1 = std::abs(ws.mean.mean - y[1]) / ws.mean.stderr_;
        const double z2 = std::abs(ws.second_moment.mean - 2.0 * y[2]) / ws.second_moment.stderr_;
        const double z0 = std::abs(ws.zero_fraction.mean - (1.0 - q.rho())) / ws.zero_fraction.stderr_;
        worst = std::max({worst, z1, z2, z0});
        os << name << " |z| " << fmt(z1) << "/" << fmt(z2) << "/" << fmt(z0) << "; ";
    }
    return {8, "waiting-time germ", worst <= 3.0, trimmed(os.str()), 0.0};
}

CriterionResult filter_round_trip() {
    const QueueSpec q(0.5, Exponential{1.0});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), rate(0.05, 0.4);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        // A random sequence with geometric decay, extended on demand.
        auto values = std::make_shared<std::vector<double>>();
        const double r = rate(rng);
        const std::uint64_t s = rng();
        GermSource src = [values, r, s](int k) -> cplx {
            if (k < 0) return {};
            while (static_cast<int>(values->size()) <= k) {
                std::mt19937_64 g(s + values->size());
                values->push_back(std::uniform_real_distribution<double>(-1.0, 1.0)(g));
            }
            return (*values)[static_cast<std::size_t>(k)] * std::pow(r, k);
        };
        const auto back = inverse_filter_germ(q, filtered_source(q, src), 12);
        double scale = 0.0, err = 0.0;
        for (int k = 0; k < 12; ++k) {
            scale = std::max(scale, std::abs(src(k)));
            err = std::max(err, std::abs(back.coeffs[static_cast<std::size_t>(k)] - src(k)));
        }
        worst = std::max(worst, err / scale);
    }
    // w' germ of 1 - e^{-a u} in closed form, inverted with a beyond the forward radius.
    const double a = 0.75;
    const double ws = mm1_wstar(0.5, 1.0, a);
    GermSource wg = [&](int k) -> cplx { return q.gain() * ((k == 0 ? 1.0 : 0.0) - ws * std::pow(-a, k)); };
    const auto c = inverse_filter_germ(q, wg, 12);
    double ex3 = 0.0;
    for (int n = 0; n < 12; ++n) {
        const double ref = (n == 0 ? 1.0 : 0.0) - std::pow(-a, n);
        ex3 = std::max(ex3, std::abs(c.coeffs[static_cast<std::size_t>(n)].real() - ref));
    }
    return {9, "filter round trip", worst <= 1e-10 && ex3 <= 1e-10,
            "random germs max rel err " + fmt(worst) + ", closed-form inversion err " + fmt(ex3), 0.0};
}

CriterionResult toeplitz() {
    double worst = 0.0;
    for (const auto& [name, q] : three_models(0.5))
        for (int n = 1; n <= 20; ++n) {
            const auto Y = filter_matrix(q, n);
            const auto M = moment_matrix(q, n);
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            const Eigen::MatrixXd R = Y * (I / q.lambda() - M) - I;
            worst = std::max(worst, R.cwiseAbs().rowwise().sum().maxCoeff());
        }
    return {10, "Toeplitz identity", worst <= 1e-10, "max inf-norm residual " + fmt(worst), 0.0};
}

// Assignments of n distinct objects to m urns with at least two per urn.
double brute_phi(int m, int n) {
    std::vector<int> urn(static_cast<std::size_t>(n), 0);
    double count = 0.0;
    for (;;) {
        std::vector<int> load(static_cast<std::size_t>(m), 0);
        for (int x : urn) ++load[static_cast<std::size_t>(x)];
        if (std::all_of(load.begin(), load.end(), [](int l) { return l >= 2; })) count += 1.0;
        int i = 0;
        while (i < n && ++urn[static_cast<std::size_t>(i)] == m) urn[static_cast<std::size_t>(i++)] = 0;
        if (i == n) break;
    }
    return count;
}

// Sum over compositions n_1 + ... + n_m = n, n_i >= 2, of prod C(n_i + q - 1, q - 1).
double brute_theta(int q, int m, int n) {
    if (m == 0) return n == 0 ? 1.0 : 0.0;
    double acc = 0.0;
    for (int first = 2; first <= n - 2 * (m - 1); ++first) acc += binomial(first + q - 1, q - 1) * brute_theta(q, m - 1, n - first);
    return acc;
}

CriterionResult combinatorics() {
    const int N = 40, M = 20;
    const auto urn = scenario_counts(M, N);
    const auto refined = scenario_counts_refined(M, N);
    double cross = 0.0;
    for (int m = 1; m <= M; ++m)
        for (int n = 2 * m; n <= N; ++n) {
            cross = std::max(cross, rel_err(refined(m, n), urn(m, n)));
            // urn table against the refinement rule, refinement table against the urn rule
            if (m >= 2 && n > 2 * m) {
                const double rule = m / static_cast<double>(n) * (urn(m, n - 1) + urn(m - 1, n - 2));
                cross = std::max(cross, rel_err(rule, urn(m, n)));
            }
            if (m >= 2) {
                double acc = 0.0;
                for (int p = 2 * (m - 1); p <= n - 2; ++p) acc += refined(m - 1, p) / factorial(n - p);
                cross = std::max(cross, rel_err(acc, refined(m, n)));
            }
        }
    double theta = 0.0;
    for (int q = 1; q <= 3; ++q) {
        const auto t = erlang_scenario_counts(q, M, N);
        for (int m = 1; m <= M; ++m)
            for (int n = 2 * m; n <= N; ++n) {
                // first-urn recursion, independent of the table's last-urn build
                double acc = m == 1 ? binomial(n + q - 1, q - 1) : 0.0;
                for (int j = 2; m > 1 && j <= n - 2 * (m - 1); ++j) acc += binomial(j + q - 1, q - 1) * t(m - 1, n - j);
                theta = std::max(theta, rel_err(acc, t(m, n)));
            }
    }
    double brute = 0.0;
    for (int n = 2; n <= 10; ++n)
        for (int m = 1; 2 * m <= n; ++m) {
            brute = std::max(brute, rel_err(urn(m, n) * factorial(n), brute_phi(m, n)));
            for (int q = 1; q <= 3; ++q)
                brute = std::max(brute, rel_err(erlang_scenario_counts(q, 5, 10)(m, n), brute_theta(q, m, n)));
        }
    return {11, "scenario-count recursions", cross <= 1e-12 && theta <= 1e-12 && brute <= 1e-12,
            "phi cross " + fmt(cross) + ", theta cross " + fmt(theta) + ", brute force " + fmt(brute), 0.0};
}

CriterionResult determinism() {
    RunConfig cfg;
    cfg.lambda = 0.5;
    cfg.model = ModelConfig{"exponential", 0.0, 1.0, 1};
    CostConfig cost;
    cost.kind = "exppoly";
    cost.terms = {{1.0, 0, 0.0}, {-1.0, 0, 0.25}};
    cfg.cost = cost;
    cfg.grid = GridConfig{0.0, 4.0, 5};
    CommandOptions opt;
    opt.command = "simulate";
    opt.seed = 12;
    opt.reps = 4000;
    std::vector<std::string> outs;
    for (int threads : {1, 4, 1, 3}) {
        opt.threads = threads;
        outs.push_back(run_command(opt, cfg).output);
    }
    bool same = !outs.front().empty();
    for (const auto& o : outs) same = same && o == outs.front();
    return {12, "determinism", same, same ? "identical output for threads 1, 4, 1, 3" : "outputs differ", 0.0};
}

} // namespace

CriterionResult run_criterion(int id) {
    static const std::vector<std::function<CriterionResult()>> all{
        closed_form_concordance, divergence, md1_step, approximation_bounds, interval_shrinkage, policy_map_criterion,
        lemma1, pk_germ, filter_round_trip, toeplitz, combinatorics, determinism};
    if (id < 1 || id > criterion_count) throw DomainError("no such criterion");
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
        r = all[static_cast<std::size_t>(id - 1)]();
    } catch (const std::exception& e) {
        r = {id, "", false, std::string("error: ") + e.what(), 0.0};
    }
    r.seconds = seconds_since(t0);
    return r;
}

std::vector<CriterionResult> run_acceptance(std::optional<int> only) {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= criterion_count; ++id)
        if (!only || *only == id) out.push_back(run_criterion(id));
    return out;
}

} // namespace wfn
