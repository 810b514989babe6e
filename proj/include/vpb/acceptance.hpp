#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vpb {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct AcceptanceOptions {
  int threads = 0;
  std::string cache_dir = "cache";
  std::uint64_t seed = 12345;
};

/// Runs the eleven acceptance criteria at their pinned tolerances and
/// returns one result per criterion.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

}  // namespace vpb
