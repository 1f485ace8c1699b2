#pragma once

#include <optional>
#include <string>
#include <vector>

namespace wfn {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string measured;
    double seconds = 0.0;
};

inline constexpr int criterion_count = 12;

CriterionResult run_criterion(int id);
std::vector<CriterionResult> run_acceptance(std::optional<int> only = std::nullopt);

} // namespace wfn
