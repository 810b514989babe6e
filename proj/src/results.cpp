#include "vpb/results.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace vpb {

std::string format_real(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ResultTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns.size()) {
    throw std::logic_error("result row width does not match the header");
  }
  rows.push_back(std::move(cells));
}

namespace {

std::string csv_field(const std::string& value) {
  bool needs_quotes = value.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

void write_csv(const ResultTable& table, const std::string& path,
               const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);  // binary keeps CRLF handling ours
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t c = 0; c < table.columns.size(); ++c) {
    out << csv_field(table.columns[c]) << ",";
  }
  out << "config\r\n";
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c) out << csv_field(row[c]) << ",";
    out << config_hash << "\r\n";
  }
}

void ResultBundle::write(const std::string& out_dir, const RunConfig& cfg) const {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::string hash = cfg.hash_hex();
  for (const ResultTable& table : tables) {
    write_csv(table, (fs::path(out_dir) / (table.name + ".csv")).string(), hash);
  }
  nlohmann::ordered_json doc = summary;
  doc["provenance"] = {{"config_hash", hash},
                       {"version", kToolVersion},
                       {"seed", cfg.seed}};
  std::ofstream out(fs::path(out_dir) / "summary.json");
  if (!out) throw std::runtime_error("cannot write summary.json under " + out_dir);
  out << doc.dump(2) << "\n";
}

}  // namespace vpb
