#include "wfn/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"w-function toolkit for M/G/1 queues"};
    app.require_subcommand(1);

    wfn::CommandOptions opt;
    std::string out_path;
    std::string grid;
    std::uint64_t seed = 0;
    int reps = 0, threads = 0, only = 0;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"wfn", "w, w', mean cost and relative value on a grid"},
        {"bounds", "Taylor interval bounds for a range of orders"},
        {"taylor", "filtered germ of w'"},
        {"approx", "uniform approximation errors, or periodic-cost bounds"},
        {"policy", "two-server dispatching map"},
        {"simulate", "simulated discharge costs"},
        {"verify", "run the acceptance criteria"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        auto* cfg = sub->add_option("--config", opt.config_path, "config file (JSON)");
        if (name != "verify") cfg->required();
        sub->add_option("--out", out_path, "output file (default stdout)");
        sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed, "simulation seed");
        sub->add_option("--reps", reps, "simulation replications")->check(CLI::PositiveNumber);
        sub->add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--grid", grid, "backlog grid a:b:steps");
        if (name == "verify") sub->add_option("--only", only, "single criterion")->check(CLI::Range(1, 12));
        sub->callback([&opt, name = name] { opt.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : wfn::exit_config;
    }

    for (auto* sub : app.get_subcommands()) {
        if (sub->count("--seed")) opt.seed = seed;
        if (sub->count("--reps")) opt.reps = reps;
        if (sub->count("--threads")) opt.threads = threads;
        if (sub->get_name() == "verify" && sub->count("--only")) opt.only = only;
        if (sub->count("--grid")) {
            try {
                opt.grid = wfn::GridConfig::parse(grid);
            } catch (const wfn::ConfigError& e) {
                std::cerr << "wfn: " << e.what() << "\n";
                return wfn::exit_config;
            }
        }
    }

    const auto res = wfn::run_command(opt);
    if (!res.diagnostics.empty()) std::cerr << "wfn: " << res.diagnostics << "\n";
    if (!res.output.empty()) {
        if (out_path.empty()) {
            std::cout << res.output;
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) {
                std::cerr << "wfn: cannot write '" << out_path << "'\n";
                return wfn::exit_failure;
            }
            f << res.output;
        }
    }
    return res.exit_code;
}
