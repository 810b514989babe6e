#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "vpb/config.hpp"

namespace vpb {

inline constexpr const char* kToolVersion = "0.1.0";

std::string format_real(Real v);  // 17 significant digits

struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

/// RFC-4180 CSV with '.' decimals; every row carries the producing config
/// hash in a trailing column.
void write_csv(const ResultTable& table, const std::string& path,
               const std::string& config_hash);

struct ResultBundle {
  std::vector<ResultTable> tables;
  nlohmann::ordered_json summary;

  /// Writes <name>.csv per table plus summary.json (stable key order) with
  /// a provenance block {config_hash, version, seed}.
  void write(const std::string& out_dir, const RunConfig& cfg) const;
};

}  // namespace vpb
