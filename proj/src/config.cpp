#include "vpb/config.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vpb {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string format_real_cfg(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Real parse_real(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    Real v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse real value '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse integer '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse unsigned integer '" + value + "'");
  }
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters;
  auto real_key = [&](const std::string& k, Real& field) {
    setters[k] = [&field](const std::string& key, const std::string& v) {
      field = parse_real(key, v);
    };
  };
  auto int_key = [&](const std::string& k, int& field) {
    setters[k] = [&field](const std::string& key, const std::string& v) {
      field = parse_int(key, v);
    };
  };
  auto string_key = [&](const std::string& k, std::string& field) {
    setters[k] = [&field](const std::string&, const std::string& v) { field = v; };
  };

  string_key("model.tag", cfg.model_tag);
  real_key("model.nu0", cfg.nu0);
  real_key("model.rate_base", cfg.rate_base);
  real_key("model.rate_slope", cfg.rate_slope);
  int_key("model.hs_nodes_v", cfg.hs_nodes_v);
  int_key("model.hs_nodes_theta", cfg.hs_nodes_theta);
  int_key("model.hs_nodes_phi", cfg.hs_nodes_phi);
  int_key("basis.degree", cfg.degree);
  string_key("variant", cfg.variant);
  real_key("epsilon", cfg.epsilon);
  real_key("sgrid.min", cfg.sgrid_min);
  real_key("sgrid.max", cfg.sgrid_max);
  int_key("sgrid.count", cfg.sgrid_count);
  real_key("branch.smin", cfg.branch_smin);
  int_key("branch.count", cfg.branch_count);
  real_key("time.min", cfg.time_min);
  real_key("time.max", cfg.time_max);
  int_key("time.count", cfg.time_count);
  real_key("fit.t1", cfg.fit_t1);
  real_key("fit.t2", cfg.fit_t2);
  string_key("family.tag", cfg.family_tag);
  real_key("family.d0", cfg.d0);
  real_key("family.d1", cfg.d1);
  real_key("family.r0", cfg.family_r0);
  int_key("alpha", cfg.alpha);
  setters["seed"] = [&cfg](const std::string& key, const std::string& v) {
    cfg.seed = parse_u64(key, v);
  };
  string_key("out", cfg.out_dir);
  string_key("cache_dir", cfg.cache_dir);
  int_key("threads", cfg.threads);

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw config_error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    it->second(key, value);
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_text(text.str());
}

std::string RunConfig::canonical_text() const {
  std::ostringstream out;
  out << "model.tag = " << model_tag << "\n";
  out << "model.nu0 = " << format_real_cfg(nu0) << "\n";
  out << "model.rate_base = " << format_real_cfg(rate_base) << "\n";
  out << "model.rate_slope = " << format_real_cfg(rate_slope) << "\n";
  out << "model.hs_nodes_v = " << hs_nodes_v << "\n";
  out << "model.hs_nodes_theta = " << hs_nodes_theta << "\n";
  out << "model.hs_nodes_phi = " << hs_nodes_phi << "\n";
  out << "basis.degree = " << degree << "\n";
  out << "variant = " << variant << "\n";
  out << "epsilon = " << format_real_cfg(epsilon) << "\n";
  out << "sgrid.min = " << format_real_cfg(sgrid_min) << "\n";
  out << "sgrid.max = " << format_real_cfg(sgrid_max) << "\n";
  out << "sgrid.count = " << sgrid_count << "\n";
  out << "branch.smin = " << format_real_cfg(branch_smin) << "\n";
  out << "branch.count = " << branch_count << "\n";
  out << "time.min = " << format_real_cfg(time_min) << "\n";
  out << "time.max = " << format_real_cfg(time_max) << "\n";
  out << "time.count = " << time_count << "\n";
  out << "fit.t1 = " << format_real_cfg(fit_t1) << "\n";
  out << "fit.t2 = " << format_real_cfg(fit_t2) << "\n";
  out << "family.tag = " << family_tag << "\n";
  out << "family.d0 = " << format_real_cfg(d0) << "\n";
  out << "family.d1 = " << format_real_cfg(d1) << "\n";
  out << "family.r0 = " << format_real_cfg(family_r0) << "\n";
  out << "alpha = " << alpha << "\n";
  out << "seed = " << seed << "\n";
  out << "out = " << out_dir << "\n";
  out << "cache_dir = " << cache_dir << "\n";
  out << "threads = " << threads << "\n";
  return out.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_text()); }

std::string RunConfig::hash_hex() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash());
  return buf;
}

void RunConfig::validate() const {
  if (model_tag != "bgk" && model_tag != "spectral_relaxation" &&
      model_tag != "hard_sphere") {
    throw config_error("model.tag must be bgk, spectral_relaxation or hard_sphere");
  }
  if (variant != "vpb" && variant != "boltzmann") {
    throw config_error("variant must be vpb or boltzmann");
  }
  if (family_tag != "density_energy" && family_tag != "zero_mean_momentum_energy") {
    throw config_error("family.tag must be density_energy or zero_mean_momentum_energy");
  }
  if (degree < 2 || degree > HermiteBasis::kDegreeCap) {
    throw config_error("basis.degree must be in [2, 12]");
  }
  if (!(nu0 > 0)) throw config_error("model.nu0 must be positive");
  if (!(epsilon > 0)) throw config_error("epsilon must be positive");
  if (!(sgrid_min > 0) || !(sgrid_max > sgrid_min) || sgrid_count < 4) {
    throw config_error("sgrid must satisfy 0 < min < max with count >= 4");
  }
  if (!(branch_smin > 0) || branch_smin >= 0.01 || branch_count < 6) {
    throw config_error("branch grid must start in (0, 0.01) with count >= 6");
  }
  if (!(time_min > 0) || !(time_max > time_min) || time_count < 10) {
    throw config_error("time grid must satisfy 0 < min < max with count >= 10");
  }
  if (!(fit_t1 >= time_min) || !(fit_t2 <= time_max) || !(fit_t2 > fit_t1)) {
    throw config_error("fit window must lie inside the time grid");
  }
  if (alpha < 0 || alpha > 1) throw config_error("alpha must be 0 or 1");
}

CollisionModel RunConfig::model() const {
  if (model_tag == "bgk") return CollisionModel::bgk;
  if (model_tag == "spectral_relaxation") return CollisionModel::spectral_relaxation;
  return CollisionModel::hard_sphere;
}

SymbolVariant RunConfig::symbol_variant() const {
  return variant == "vpb" ? SymbolVariant::vpb : SymbolVariant::boltzmann;
}

FamilyTag RunConfig::family() const {
  return family_tag == "density_energy" ? FamilyTag::density_energy
                                        : FamilyTag::zero_mean_momentum_energy;
}

HermiteBasis RunConfig::make_basis() const { return HermiteBasis(degree); }

CollisionMatrix RunConfig::make_collision(const HermiteBasis& basis) const {
  switch (model()) {
    case CollisionModel::bgk:
      return assemble_bgk(nu0, basis);
    case CollisionModel::spectral_relaxation:
      return assemble_spectral_relaxation(
          RelaxationSpectrum::graded(rate_base, rate_slope, basis), basis);
    case CollisionModel::hard_sphere: {
      HardSphereQuadrature quad{hs_nodes_v, hs_nodes_theta, hs_nodes_phi};
      return assemble_hard_sphere_cached(basis, quad, cache_dir, threads);
    }
  }
  throw config_error("unreachable model tag");
}

InitialDataFamily RunConfig::make_family() const {
  return InitialDataFamily{family(), d0, d1, family_r0};
}

}  // namespace vpb
