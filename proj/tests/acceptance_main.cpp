// Acceptance suite: one pass/fail line per criterion; exit 0 only when all
// criteria hold at their pinned tolerances.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "vpb/acceptance.hpp"

int main(int argc, char** argv) {
  vpb::AcceptanceOptions opts;
  opts.cache_dir = "acceptance_cache";
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      opts.threads = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--cache") == 0 && i + 1 < argc) {
      opts.cache_dir = argv[++i];
    } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      opts.seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::fprintf(stderr, "usage: %s [--threads N] [--cache DIR] [--seed U64]\n", argv[0]);
      return 2;
    }
  }

  auto results = vpb::run_acceptance(opts);
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%2d/11] %s %s |%s (%.1f s)\n", r.id, r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    all = all && r.pass;
  }
  std::printf("%s\n", all ? "acceptance: ALL CRITERIA PASS" : "acceptance: FAILURES PRESENT");
  return all ? 0 : 1;
}
