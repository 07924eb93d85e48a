#pragma once

#include "fscpomdp/model.hpp"
#include "fscpomdp/policy_iteration.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fscpomdp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIterationLimit = 2;
inline constexpr int kExitResourceLimit = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;

int exit_code(SolveStatus status);

/// "uniform", a state name or index, or |S| probabilities separated by
/// commas or spaces. Throws std::invalid_argument when infeasible.
Belief parse_belief(std::string_view text, const PomdpModel& model);

/// Runs one subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fscpomdp::cli
