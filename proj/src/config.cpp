#include "wfn/config.hpp"

#include "wfn/expr.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace wfn {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw ConfigError("config error at " + (path.empty() ? std::string("/") : path) + ": " + why);
}

// Field access on one JSON object; remembers which keys were read so the rest can be rejected.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string at(const std::string& key) const { return path_ + "/" + key; }

    const json& get(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) fail(at(key), "missing required field");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const auto& v = get(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    int integer(const std::string& key) {
        const auto& v = get(key);
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        return v.get<int>();
    }
    int integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

    std::string string(const std::string& key) {
        const auto& v = get(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    void done() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.contains(k)) fail(at(k), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

cplx read_complex(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    fail(path, "expected a number or [re, im]");
}

json write_complex(cplx z) {
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
}

std::vector<ExpPolyTerm> read_terms(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of terms");
    std::vector<ExpPolyTerm> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = path + "/" + std::to_string(i);
        Fields f(v[i], p);
        ExpPolyTerm t;
        t.kappa = read_complex(f.get("kappa"), f.at("kappa"));
        t.m = f.integer("m", 0);
        if (t.m < 0) fail(f.at("m"), "power must be >= 0");
        t.a = f.has("a") ? read_complex(f.get("a"), f.at("a")) : cplx{};
        f.done();
        out.push_back(t);
    }
    return out;
}

json write_terms(const std::vector<ExpPolyTerm>& terms) {
    json arr = json::array();
    for (const auto& t : terms) arr.push_back({{"kappa", write_complex(t.kappa)}, {"m", t.m}, {"a", write_complex(t.a)}});
    return arr;
}

ModelConfig read_model(const json& v, const std::string& path) {
    Fields f(v, path);
    ModelConfig m;
    m.kind = f.string("kind");
    if (m.kind == "deterministic") {
        m.d = f.number("d");
    } else if (m.kind == "exponential") {
        m.omega = f.number("omega");
    } else if (m.kind == "erlang") {
        m.q = f.integer("q");
        m.omega = f.number("omega");
    } else {
        fail(f.at("kind"), "unknown service model '" + m.kind + "'");
    }
    f.done();
    try {
        (void)m.build();
    } catch (const DomainError& e) {
        fail(path, e.what());
    }
    return m;
}

json write_model(const ModelConfig& m) {
    json j{{"kind", m.kind}};
    if (m.kind == "deterministic") j["d"] = m.d;
    if (m.kind == "exponential") j["omega"] = m.omega;
    if (m.kind == "erlang") {
        j["q"] = m.q;
        j["omega"] = m.omega;
    }
    return j;
}

CostConfig read_cost(const json& v, const std::string& path) {
    Fields f(v, path);
    CostConfig c;
    c.kind = f.string("kind");
    if (c.kind == "exppoly") {
        c.terms = read_terms(f.get("terms"), f.at("terms"));
    } else if (c.kind == "piecewise") {
        c.tau = f.number("tau");
        c.interior = f.has("interior") ? read_terms(f.get("interior"), f.at("interior")) : std::vector<ExpPolyTerm>{};
        // Short form: polynomial coefficients sigma_0.. on [0, tau).
        if (f.has("sigma")) {
            const auto& sig = f.get("sigma");
            if (!sig.is_array()) fail(f.at("sigma"), "expected an array of numbers");
            for (std::size_t j = 0; j < sig.size(); ++j) {
                if (!sig[j].is_number()) fail(f.at("sigma") + "/" + std::to_string(j), "expected a number");
                c.interior.push_back({sig[j].get<double>(), static_cast<int>(j), 0.0});
            }
            c.interior = canonical_terms(std::move(c.interior));
        }
        if (f.has("tail") && f.get("tail").is_object()) {
            // Short form: one term {kappa, k, a}.
            Fields t(f.get("tail"), f.at("tail"));
            ExpPolyTerm term;
            term.kappa = read_complex(t.get("kappa"), t.at("kappa"));
            term.m = t.integer("k", 0);
            if (term.m < 0) fail(t.at("k"), "power must be >= 0");
            term.a = t.has("a") ? read_complex(t.get("a"), t.at("a")) : cplx{};
            t.done();
            c.tail = {term};
        } else if (f.has("tail")) {
            c.tail = read_terms(f.get("tail"), f.at("tail"));
        }
        if (f.has("c0")) c.c0 = f.number("c0");
        if (!(c.tau > 0.0)) fail(f.at("tau"), "must be > 0");
    } else if (c.kind == "sampled") {
        c.expr = f.string("expr");
        c.tau = f.number("tau", 1.0);
        if (f.has("tail")) {
            Fields t(f.get("tail"), f.at("tail"));
            c.tail_lower = read_terms(t.get("lower"), t.at("lower"));
            c.tail_upper = read_terms(t.get("upper"), t.at("upper"));
            t.done();
        }
    } else if (c.kind == "example7") {
        c.a = f.number("a");
        c.tau = f.number("tau", 1.0);
        if (!(c.a > 0.0)) fail(f.at("a"), "must be > 0");
    } else if (c.kind == "periodic") {
        c.expr = f.string("expr");
        c.period = f.number("period");
        if (!(c.period > 0.0)) fail(f.at("period"), "must be > 0");
    } else {
        fail(f.at("kind"), "unknown cost kind '" + c.kind + "'");
    }
    f.done();
    if (!c.expr.empty()) {
        try {
            (void)Expression::parse(c.expr);
        } catch (const ConfigError& e) {
            fail(path + "/expr", e.what());
        }
    }
    return c;
}

json write_cost(const CostConfig& c) {
    json j{{"kind", c.kind}};
    if (c.kind == "exppoly") j["terms"] = write_terms(c.terms);
    if (c.kind == "piecewise") {
        j["tau"] = c.tau;
        j["interior"] = write_terms(c.interior);
        j["tail"] = write_terms(c.tail);
        if (c.c0) j["c0"] = *c.c0;
    }
    if (c.kind == "sampled") {
        j["expr"] = c.expr;
        j["tau"] = c.tau;
        j["tail"] = {{"lower", write_terms(c.tail_lower)}, {"upper", write_terms(c.tail_upper)}};
    }
    if (c.kind == "example7") {
        j["a"] = c.a;
        j["tau"] = c.tau;
    }
    if (c.kind == "periodic") {
        j["expr"] = c.expr;
        j["period"] = c.period;
    }
    return j;
}

GridConfig read_grid(const json& v, const std::string& path) {
    Fields f(v, path);
    GridConfig g;
    g.min = f.number("min");
    g.max = f.number("max");
    g.steps = f.integer("steps");
    f.done();
    if (g.steps < 1 || !(g.max >= g.min) || g.min < 0.0) fail(path, "need 0 <= min <= max and steps >= 1");
    return g;
}

json write_grid(const GridConfig& g) { return {{"min", g.min}, {"max", g.max}, {"steps", g.steps}}; }

} // namespace

ServiceModel ModelConfig::build() const {
    if (kind == "deterministic") return Deterministic{d};
    if (kind == "exponential") return Exponential{omega};
    if (kind == "erlang") return Erlang{q, omega};
    throw ConfigError("unknown service model '" + kind + "'");
}

PiecewiseCostSpec CostConfig::piecewise() const {
    if (kind == "piecewise") {
        PiecewiseCostSpec p;
        p.tau = tau;
        p.interior = interior;
        p.tail = tail;
        p.c0 = c0;
        return p;
    }
    throw ConfigError("cost kind '" + kind + "' is not piecewise");
}

std::function<double(double)> CostConfig::evaluator() const {
    if (kind == "exppoly") return [t = terms](double u) { return evaluate_terms(t, u).real(); };
    if (kind == "piecewise") return [p = piecewise()](double u) { return p.evaluate(u).real(); };
    if (kind == "example7") return example7_cost(a, 1.0).f;
    if (kind == "periodic") {
        auto e = Expression::parse(expr);
        return [e](double u) { return u > 0.0 ? e(u) : 0.0; };
    }
    return Expression::parse(expr);
}

SampledCost CostConfig::sampled(double range) const {
    if (kind == "example7") return example7_cost(a, range);
    if (kind == "sampled" || kind == "exppoly") return SampledCost{evaluator(), range, {}};
    throw ConfigError("cost kind '" + kind + "' cannot be sampled on a range");
}

TailEnvelope CostConfig::envelope(double at) const {
    if (kind == "example7") return example7_tail(a, at);
    if (kind == "sampled") return {tail_lower, tail_upper};
    throw ConfigError("cost kind '" + kind + "' has no tail envelope");
}

std::vector<double> GridConfig::points() const {
    std::vector<double> out;
    if (steps == 1) return {min};
    for (int i = 0; i < steps; ++i) out.push_back(min + (max - min) * i / (steps - 1));
    return out;
}

GridConfig GridConfig::parse(const std::string& text) {
    std::istringstream is(text);
    GridConfig g;
    char c1 = 0, c2 = 0;
    if (!(is >> g.min >> c1 >> g.max >> c2 >> g.steps) || c1 != ':' || c2 != ':' || !is.eof())
        throw ConfigError("grid must look like a:b:steps, got '" + text + "'");
    if (g.steps < 1 || !(g.max >= g.min) || g.min < 0.0) throw ConfigError("grid needs 0 <= a <= b and steps >= 1");
    return g;
}

ServerSpec ServerConfig::build() const {
    QueueSpec q(lambda, model.build());
    if (cost.kind == "exppoly") return ServerSpec::exact(id, q, cost.terms);
    if (cost.kind == "example7") return ServerSpec::example7(id, q, cost.a);
    if (cost.kind == "sampled") {
        ServerSpec s{id, q, std::nullopt, cost.evaluator(), {}, {}, ApproxMethod::NearBest};
        s.tail = [env = cost.envelope(0.0)](double) { return env; };
        return s;
    }
    throw ConfigError("server " + id + ": cost kind '" + cost.kind + "' is not supported for dispatch");
}

DispatchOptions DispatchConfig::options() const {
    DispatchOptions o;
    o.eps0 = eps0;
    o.t_max = tmax;
    o.tau_max = tau_max;
    o.n_max = n_max;
    return o;
}

QueueSpec RunConfig::queue() const {
    if (!lambda) throw ConfigError("config error at /lambda: missing required field");
    if (!model) throw ConfigError("config error at /model: missing required field");
    return QueueSpec(*lambda, model->build(), model0 ? std::optional<ServiceModel>(model0->build()) : std::nullopt);
}

const CostConfig& RunConfig::require_cost() const {
    if (!cost) throw ConfigError("config error at /cost: missing required field");
    return *cost;
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
        const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
        throw ConfigError("config syntax error at line " + std::to_string(line) + ": " + e.what());
    }
    Fields f(doc, "");
    RunConfig c;
    if (f.has("lambda")) {
        c.lambda = f.number("lambda");
        if (!(*c.lambda > 0.0)) fail("/lambda", "must be > 0");
    }
    if (f.has("model")) c.model = read_model(f.get("model"), "/model");
    if (f.has("model0")) c.model0 = read_model(f.get("model0"), "/model0");
    if (f.has("cost")) c.cost = read_cost(f.get("cost"), "/cost");
    if (f.has("grid")) c.grid = read_grid(f.get("grid"), "/grid");
    if (f.has("bounds")) {
        Fields b(f.get("bounds"), "/bounds");
        BoundsConfig bc;
        bc.n_min = b.integer("n_min", bc.n_min);
        bc.n_max = b.integer("n_max", bc.n_max);
        bc.saturation_rate = b.number("saturation_rate");
        b.done();
        if (bc.n_min < 0 || bc.n_max < bc.n_min) fail("/bounds", "need 0 <= n_min <= n_max");
        c.bounds = bc;
    }
    if (f.has("taylor")) {
        Fields t(f.get("taylor"), "/taylor");
        TaylorConfig tc;
        tc.n = t.integer("n", tc.n);
        t.done();
        if (tc.n < 1) fail("/taylor/n", "must be >= 1");
        c.taylor = tc;
    }
    if (f.has("approx")) {
        Fields a(f.get("approx"), "/approx");
        ApproxConfig ac;
        if (a.has("orders")) {
            const auto& o = a.get("orders");
            if (!o.is_array()) fail("/approx/orders", "expected an array of integers");
            ac.orders.clear();
            for (const auto& x : o) {
                if (!x.is_number_integer() || x.get<int>() < 1) fail("/approx/orders", "orders must be integers >= 1");
                ac.orders.push_back(x.get<int>());
            }
        }
        ac.tau = a.number("tau", ac.tau);
        a.done();
        c.approx = ac;
    }
    if (f.has("simulate")) {
        Fields s(f.get("simulate"), "/simulate");
        SimulateConfig sc;
        if (s.has("seed")) {
            const auto& v = s.get("seed");
            if (!v.is_number_unsigned()) fail("/simulate/seed", "expected a nonnegative integer");
            sc.seed = v.get<std::uint64_t>();
        }
        sc.reps = s.integer("reps", sc.reps);
        sc.threads = s.integer("threads", sc.threads);
        s.done();
        if (sc.reps < 1) fail("/simulate/reps", "must be >= 1");
        c.simulate = sc;
    }
    if (f.has("servers")) {
        const auto& arr = f.get("servers");
        if (!arr.is_array()) fail("/servers", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto p = "/servers/" + std::to_string(i);
            Fields s(arr[i], p);
            ServerConfig sc;
            sc.id = s.has("id") ? s.string("id") : std::to_string(i + 1);
            sc.lambda = s.number("lambda");
            sc.model = read_model(s.get("model"), p + "/model");
            sc.cost = read_cost(s.get("cost"), p + "/cost");
            s.done();
            c.servers.push_back(std::move(sc));
        }
    }
    if (f.has("dispatch")) {
        Fields d(f.get("dispatch"), "/dispatch");
        DispatchConfig dc;
        const auto& dv = d.get("d");
        if (!dv.is_array()) fail("/dispatch/d", "expected an array of numbers");
        for (const auto& x : dv) {
            if (!x.is_number()) fail("/dispatch/d", "expected an array of numbers");
            dc.d.push_back(x.get<double>());
        }
        dc.grid = read_grid(d.get("grid"), "/dispatch/grid");
        dc.eps0 = d.number("eps0", dc.eps0);
        dc.tmax = d.integer("tmax", dc.tmax);
        dc.tau_max = d.number("tau_max", dc.tau_max);
        dc.n_max = d.integer("n_max", dc.n_max);
        d.done();
        c.dispatch = dc;
    }
    f.done();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    json j = json::object();
    if (c.lambda) j["lambda"] = *c.lambda;
    if (c.model) j["model"] = write_model(*c.model);
    if (c.model0) j["model0"] = write_model(*c.model0);
    if (c.cost) j["cost"] = write_cost(*c.cost);
    if (c.grid) j["grid"] = write_grid(*c.grid);
    if (c.bounds)
        j["bounds"] = {{"n_min", c.bounds->n_min}, {"n_max", c.bounds->n_max}, {"saturation_rate", c.bounds->saturation_rate}};
    if (c.taylor) j["taylor"] = {{"n", c.taylor->n}};
    if (c.approx) j["approx"] = {{"orders", c.approx->orders}, {"tau", c.approx->tau}};
    if (c.simulate) j["simulate"] = {{"seed", c.simulate->seed}, {"reps", c.simulate->reps}, {"threads", c.simulate->threads}};
    if (!c.servers.empty()) {
        json arr = json::array();
        for (const auto& s : c.servers)
            arr.push_back({{"id", s.id}, {"lambda", s.lambda}, {"model", write_model(s.model)}, {"cost", write_cost(s.cost)}});
        j["servers"] = arr;
    }
    if (c.dispatch) {
        const auto& d = *c.dispatch;
        j["dispatch"] = {{"d", d.d}, {"grid", write_grid(d.grid)}, {"eps0", d.eps0},
                         {"tmax", d.tmax}, {"tau_max", d.tau_max}, {"n_max", d.n_max}};
    }
    return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

} // namespace wfn
