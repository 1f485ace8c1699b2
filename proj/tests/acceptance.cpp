// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include "wfn/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, wfn::criterion_count));
    CLI11_PARSE(app, argc, argv);

    std::vector<int> ids;
    if (only) {
        ids.push_back(only);
    } else {
        for (int i = 1; i <= wfn::criterion_count; ++i) ids.push_back(i);
    }

    int failed = 0;
    for (int id : ids) {
        wfn::CriterionResult r;
        try {
            r = wfn::run_criterion(id);
        } catch (const std::exception& e) {
            r.id = id;
            r.pass = false;
            r.measured = std::string("exception: ") + e.what();
        }
        failed += !r.pass;
        std::printf("%s criterion %d: %s | %s | %.1fs\n", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(),
                    r.measured.c_str(), r.seconds);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
