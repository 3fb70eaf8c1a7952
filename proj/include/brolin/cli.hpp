#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "brolin/rational_map.hpp"

namespace brolin::cli {

/// Exit codes of the command-line front end.
enum ExitCode : int { kOk = 0, kInput = 1, kBudget = 2, kNumeric = 3, kInvariant = 4 };

/// Named maps: z2, basilica, dendrite, siegel-like, chebyshev.
RationalMap preset(const std::string& name, const Tolerances& tol = kDefaultTolerances);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a(const std::string& bytes);

/// Runs the front end on the arguments that follow the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace brolin::cli
