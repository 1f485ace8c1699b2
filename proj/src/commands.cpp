#include "wfn/commands.hpp"

#include "wfn/expr.hpp"
#include "wfn/simulator.hpp"
#include "wfn/verify.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace wfn {

namespace {

struct Cell {
    std::string text;
    std::optional<double> number;
};

Cell num(double x) {
    if (!std::isfinite(x)) throw Error("non-finite value in output");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return {buf, x};
}
Cell num(int x) { return {std::to_string(x), static_cast<double>(x)}; }
Cell str(std::string s) { return {std::move(s), std::nullopt}; }

struct Table {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::string render(const std::string& format) const {
        if (format == "json") {
            nlohmann::ordered_json j;
            for (const auto& [k, v] : meta) j[k] = v;
            j["columns"] = columns;
            auto rows_json = nlohmann::ordered_json::array();
            for (const auto& r : rows) {
                auto row = nlohmann::ordered_json::array();
                for (const auto& c : r) row.push_back(c.number ? nlohmann::ordered_json(*c.number) : nlohmann::ordered_json(c.text));
                rows_json.push_back(row);
            }
            j["rows"] = rows_json;
            return j.dump(2) + "\n";
        }
        std::ostringstream os;
        for (const auto& [k, v] : meta) os << "# " << k << "=" << v << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i].text;
            os << "\n";
        }
        return os.str();
    }
};

std::string fmt(double x) { return num(x).text; }

std::vector<double> grid_points(const CommandOptions& opt, const RunConfig& cfg) {
    if (opt.grid) return opt.grid->points();
    if (cfg.grid) return cfg.grid->points();
    return GridConfig{}.points();
}

const std::vector<ExpPolyTerm>& exppoly_terms(const CostConfig& c) {
    if (c.kind != "exppoly") throw ConfigError("config error at /cost/kind: this command needs an exppoly cost");
    return c.terms;
}

// Exponential type of an exp-poly cost: the largest |a| over its terms.
GrowthClass growth_of(const std::vector<ExpPolyTerm>& terms) {
    GrowthClass g{0.0, 0.0};
    for (const auto& t : terms)
        if (t.a != cplx{}) {
            g.order = 1.0;
            g.type = std::max(g.type, std::abs(t.a));
        }
    return g;
}

Table cmd_wfn(const CommandOptions& opt, const RunConfig& cfg) {
    const auto spec = cfg.queue();
    const auto& cost = cfg.require_cost();
    WResult r = cost.kind == "exppoly"  ? w_for_exp_poly_cost(spec, cost.terms)
                : cost.kind == "piecewise" ? w_piecewise(spec, cost.piecewise())
                                           : throw ConfigError("config error at /cost/kind: wfn needs an exppoly or piecewise cost");
    Table t;
    t.meta = {{"spec_hash", config_hash(cfg)}, {"cbar", fmt(r.mean_cost.real())}};
    t.columns = {"u", "w", "wprime", "relvalue"};
    for (double u : grid_points(opt, cfg))
        t.rows.push_back({num(u), num(r.w.real(u)), num(r.wprime.real(u)), num(relative_value(r, u).real())});
    return t;
}

Table cmd_bounds(const CommandOptions& opt, const RunConfig& cfg, bool& divergent) {
    const auto spec = cfg.queue();
    const auto& terms = exppoly_terms(cfg.require_cost());
    if (!cfg.bounds) throw ConfigError("config error at /bounds: missing required field");
    const auto& b = *cfg.bounds;
    if (!(b.saturation_rate > 0.0)) throw ConfigError("config error at /bounds/saturation_rate: must be > 0");
    const auto db = exp_saturation_bounds(b.saturation_rate, b.n_max);
    Germ g;
    for (int k = 0; k <= b.n_max + 1; ++k) g.coeffs.push_back(terms_derivative_at_zero(terms, k));
    const auto conv = convergence_classify(spec, growth_of(terms));
    divergent = conv != Convergence::Converges;

    Table t;
    t.meta = {{"spec_hash", config_hash(cfg)}, {"convergence", to_string(conv)}};
    t.columns = {"u", "n", "lower", "upper"};
    const auto grid = grid_points(opt, cfg);
    for (int n = b.n_min; n <= b.n_max; ++n) {
        const auto iv = polynomial_bounds(spec, g, n, db);
        for (double u : grid) t.rows.push_back({num(u), num(n), num(iv.lower.real(u)), num(iv.upper.real(u))});
    }
    return t;
}

Table cmd_taylor(const CommandOptions&, const RunConfig& cfg) {
    const auto spec = cfg.queue();
    const auto& terms = exppoly_terms(cfg.require_cost());
    const int n = cfg.taylor ? cfg.taylor->n : TaylorConfig{}.n;
    const auto wg = filter_germ(spec, germ_source(terms), n);
    Table t;
    t.meta = {{"spec_hash", config_hash(cfg)}};
    t.columns = {"k", "cost", "wprime"};
    for (int k = 0; k < n; ++k)
        t.rows.push_back({num(k), num(terms_derivative_at_zero(terms, k).real()), num(wg.coeffs[static_cast<std::size_t>(k)].real())});
    return t;
}

Table cmd_approx(const CommandOptions& opt, const RunConfig& cfg) {
    const auto& cost = cfg.require_cost();
    const ApproxConfig ac = cfg.approx.value_or(ApproxConfig{});
    Table t;
    t.meta = {{"spec_hash", config_hash(cfg)}};
    if (cost.kind == "periodic") {
        const auto spec = cfg.queue();
        const auto e = Expression::parse(cost.expr);
        PeriodicCost pc{e, cost.period, {}};
        t.columns = {"u", "n", "lower", "upper"};
        for (int n : ac.orders) {
            const auto iv = periodic_bounds(spec, pc, n);
            for (double u : grid_points(opt, cfg))
                t.rows.push_back({num(u), num(n), num(iv.lower.real(u)), num(iv.upper.real(u))});
        }
        return t;
    }
    const auto sc = cost.sampled(ac.tau);
    t.columns = {"n", "method", "eta", "measured_error", "roundoff"};
    for (int n : ac.orders)
        for (auto m : {ApproxMethod::Bernstein, ApproxMethod::NearBest}) {
            const auto p = m == ApproxMethod::Bernstein ? bernstein(sc, n) : near_best(sc, n);
            t.rows.push_back({num(n), str(to_string(m)), num(p.eta), num(approximation_error(sc, p)), num(p.roundoff)});
        }
    return t;
}

Table cmd_policy(const CommandOptions& opt, const RunConfig& cfg) {
    if (cfg.servers.size() != 2) throw ConfigError("config error at /servers: policy maps need exactly two servers");
    if (!cfg.dispatch) throw ConfigError("config error at /dispatch: missing required field");
    const auto& dc = *cfg.dispatch;
    if (dc.d.size() != 2) throw ConfigError("config error at /dispatch/d: need one service time per server");
    std::vector<ServerSpec> fleet;
    for (const auto& s : cfg.servers) fleet.push_back(s.build());
    const auto grid = opt.grid ? opt.grid->points() : dc.grid.points();
    const auto pts = policy_map(fleet, grid, grid, dc.d, dc.options());
    Table t;
    t.meta = {{"spec_hash", config_hash(cfg)}};
    t.columns = {"u1", "u2", "winner", "n_star", "rounds"};
    for (const auto& p : pts)
        t.rows.push_back({num(p.u1), num(p.u2), str(p.winner ? fleet[*p.winner].id : "none"), num(p.n_star), num(p.rounds)});
    return t;
}

Table cmd_simulate(const CommandOptions& opt, const RunConfig& cfg) {
    const SimulateConfig sc = cfg.simulate.value_or(SimulateConfig{});
    SimConfig sim{cfg.queue(), cfg.require_cost().evaluator(), opt.seed.value_or(sc.seed), opt.reps.value_or(sc.reps),
                  opt.threads.value_or(sc.threads), std::nullopt};
    Table t;
    t.meta = {{"spec_hash", config_hash(cfg)}, {"seed", std::to_string(sim.seed)}};
    t.columns = {"u0", "mean", "stderr", "reps"};
    for (double u : grid_points(opt, cfg)) {
        const auto e = sim_discharge_cost(sim, u);
        t.rows.push_back({num(u), num(e.mean), num(e.stderr_), num(static_cast<int>(e.count))});
    }
    return t;
}

Table cmd_verify(const CommandOptions& opt, bool& all_pass) {
    Table t;
    t.columns = {"criterion", "status", "measured", "seconds"};
    all_pass = true;
    for (const auto& r : run_acceptance(opt.only)) {
        all_pass = all_pass && r.pass;
        t.rows.push_back({num(r.id), str(r.pass ? "PASS" : "FAIL"), str('"' + r.measured + '"'), num(r.seconds)});
    }
    return t;
}

template <class F>
CommandResult guarded(F&& body) {
    CommandResult res;
    try {
        res = body();
    } catch (const ConfigError& e) {
        res = {exit_config, "", e.what()};
    } catch (const StabilityViolation& e) {
        res = {exit_stability, "", e.what()};
    } catch (const DivergentSeries& e) {
        std::ostringstream os;
        os << e.what() << "; |partial sums|:";
        for (double x : e.witness()) os << ' ' << fmt(x);
        res = {exit_divergence, "", os.str()};
    } catch (const std::exception& e) {
        res = {exit_failure, "", e.what()};
    }
    return res;
}

} // namespace

CommandResult run_command(const CommandOptions& opt, const RunConfig& cfg) {
    return guarded([&]() -> CommandResult {
        if (opt.format != "csv" && opt.format != "json") throw ConfigError("format must be csv or json");
        const auto& c = opt.command;
        if (c == "wfn") return {exit_ok, cmd_wfn(opt, cfg).render(opt.format), ""};
        if (c == "bounds") {
            bool divergent = false;
            auto out = cmd_bounds(opt, cfg, divergent).render(opt.format);
            if (divergent) return {exit_divergence, out, "cost germ series does not converge for this service model"};
            return {exit_ok, out, ""};
        }
        if (c == "taylor") return {exit_ok, cmd_taylor(opt, cfg).render(opt.format), ""};
        if (c == "approx") return {exit_ok, cmd_approx(opt, cfg).render(opt.format), ""};
        if (c == "policy") return {exit_ok, cmd_policy(opt, cfg).render(opt.format), ""};
        if (c == "simulate") return {exit_ok, cmd_simulate(opt, cfg).render(opt.format), ""};
        if (c == "verify") {
            bool all = false;
            auto out = cmd_verify(opt, all).render(opt.format);
            return {all ? exit_ok : exit_failure, out, all ? "" : "some acceptance criteria failed"};
        }
        throw ConfigError("unknown command '" + c + "'");
    });
}

CommandResult run_command(const CommandOptions& opt) {
    if (opt.command == "verify" && opt.config_path.empty()) return run_command(opt, RunConfig{});
    RunConfig cfg;
    auto loaded = guarded([&]() -> CommandResult {
        if (opt.config_path.empty()) throw ConfigError("--config is required");
        cfg = load_config(opt.config_path);
        return {};
    });
    if (loaded.exit_code != exit_ok) return loaded;
    return run_command(opt, cfg);
}

} // namespace wfn
