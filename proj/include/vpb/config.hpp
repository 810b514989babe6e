#pragma once

#include <cstdint>
#include <string>

#include "vpb/collision.hpp"
#include "vpb/semigroup.hpp"
#include "vpb/symbols.hpp"

namespace vpb {

/// Invalid configuration input (maps to process exit code 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key/value run configuration. Serialization is canonical (fixed key
/// order) so files round-trip losslessly and hash stably; unknown keys are
/// rejected.
struct RunConfig {
  // model
  std::string model_tag = "bgk";  // bgk | spectral_relaxation | hard_sphere
  Real nu0 = 1.0;
  Real rate_base = 0.8;
  Real rate_slope = 0.2;
  int hs_nodes_v = 10;
  int hs_nodes_theta = 0;  // 0 -> derived from the basis degree
  int hs_nodes_phi = 0;

  // velocity basis
  int degree = 8;

  // symbol
  std::string variant = "vpb";  // vpb | boltzmann
  Real epsilon = 1.0;

  // radial / scan grid
  Real sgrid_min = 1e-3;
  Real sgrid_max = 20.0;
  int sgrid_count = 240;

  // branch continuation grid
  Real branch_smin = 1e-3;
  int branch_count = 24;

  // time grid and fit window
  Real time_min = 1.0;
  Real time_max = 1e4;
  int time_count = 240;
  Real fit_t1 = 1e2;
  Real fit_t2 = 1e4;

  // initial-data family
  std::string family_tag = "density_energy";
  Real d0 = 1.0;
  Real d1 = 1.0;
  Real family_r0 = 0.5;
  int alpha = 0;

  // run control
  std::uint64_t seed = 12345;
  std::string out_dir = "out";
  std::string cache_dir = "cache";
  int threads = 0;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);

  std::string canonical_text() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;
  void validate() const;

  CollisionModel model() const;
  SymbolVariant symbol_variant() const;
  FamilyTag family() const;

  HermiteBasis make_basis() const;
  CollisionMatrix make_collision(const HermiteBasis& basis) const;
  InitialDataFamily make_family() const;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace vpb
