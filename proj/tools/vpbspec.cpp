// Command-line front end: assembles the configured collision model and
// exposes the pipeline stages as subcommands, serializing CSV tables and a
// JSON summary per run.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "vpb/acceptance.hpp"
#include "vpb/config.hpp"
#include "vpb/results.hpp"

namespace vpb {
namespace {

constexpr int kExitConfig = 2;
constexpr int kExitQuality = 3;
constexpr int kExitTolerance = 4;

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QualityFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(Real v) { return format_real(v); }

nlohmann::ordered_json model_diagnostics(const RunConfig& cfg, const CollisionMatrix& L) {
  nlohmann::ordered_json j;
  j["model"] = cfg.model_tag;
  j["nu0"] = L.nu0;
  j["mu"] = L.mu;
  j["symmetry_defect"] = L.symmetry_defect;
  if (L.kernel_defect.size() == 5) {
    j["kernel_defect_max"] = L.kernel_defect.maxCoeff();
  }
  return j;
}

void run_coeffs(const RunConfig& cfg, bool check) {
  HermiteBasis basis = cfg.make_basis();
  CollisionMatrix L = cfg.make_collision(basis);
  CoefficientSet c = vpb_coefficients(L, basis);
  BoltzmannCoefficientSet cb = boltzmann_coefficients(L, basis);

  ResultBundle bundle;
  ResultTable table;
  table.name = "coeffs";
  table.columns = {"name", "value"};
  table.add_row({"a0", fmt(c.a0)});
  table.add_row({"a1", fmt(c.a1)});
  table.add_row({"a2", fmt(c.a2)});
  table.add_row({"b1", fmt(c.b1)});
  table.add_row({"boltzmann_a_pm1", fmt(cb.a_pm1)});
  table.add_row({"boltzmann_a0", fmt(cb.a0)});
  table.add_row({"boltzmann_a2", fmt(cb.a2)});
  for (int j = -1; j <= 3; ++j) {
    table.add_row({"lambda_second_re_" + std::to_string(j), fmt(std::real(c.lambda_second[j]))});
    table.add_row({"lambda_second_im_" + std::to_string(j), fmt(std::imag(c.lambda_second[j]))});
  }
  bundle.tables.push_back(table);
  bundle.summary["diagnostics"] = model_diagnostics(cfg, L);
  bundle.summary["coefficients"] = {{"a0", c.a0}, {"a1", c.a1}, {"a2", c.a2}, {"b1", c.b1}};
  bundle.write(cfg.out_dir, cfg);

  if (!(c.a0 > 0 && c.a1 > 0 && c.a2 > 0 && c.b1 > 0)) {
    throw QualityFailure("expansion coefficients must be positive");
  }
  if (check && cfg.model() == CollisionModel::bgk && std::abs(cfg.nu0 - 1.0) < 1e-14) {
    Real err = std::max({std::abs(c.a0 - 5.0 / 3.0), std::abs(c.a1 - 1.0 / 3.0),
                         std::abs(c.a2 - 1.0), std::abs(c.b1 - 7.0 / 6.0),
                         std::abs(cb.a_pm1 - 1.0), std::abs(cb.a0 - 1.0),
                         std::abs(cb.a2 - 1.0)});
    if (err > 1e-10) {
      throw CheckFailure("closed-form coefficient check failed, max error " + fmt(err));
    }
  }
}

void run_branches(const RunConfig& cfg, bool check) {
  HermiteBasis basis = cfg.make_basis();
  CollisionMatrix L = cfg.make_collision(basis);
  BranchOptions bopts;
  bopts.variant = cfg.symbol_variant();
  bopts.eps = cfg.epsilon;

  BranchFamily fam;
  if (bopts.variant == SymbolVariant::vpb && cfg.epsilon == 1.0) {
    CoefficientSet c = vpb_coefficients(L, basis);
    Real a_max = std::max({c.a0, c.a1, c.a2});
    Real s_exit = std::sqrt(L.mu / (2.0 * a_max));
    fam = continue_branches(
        L, basis, geometric_grid(cfg.branch_smin, 1.5 * s_exit, cfg.branch_count), bopts);
  } else {
    fam = continue_branches(
        L, basis, geometric_grid(cfg.branch_smin, 0.05, cfg.branch_count), bopts);
  }

  ResultBundle bundle;
  Real worst_gap = 0;
  for (int j = -1; j <= 3; ++j) {
    ResultTable table;
    table.name = "branch_" + std::string(j < 0 ? "m1" : std::to_string(j));
    table.columns = {"s", "re_lambda", "im_lambda", "root_residual", "eig_residual",
                     "dense_gap"};
    for (const BranchSample& sample : fam.branch(j).samples) {
      SymbolMatrix sym = (bopts.variant == SymbolVariant::vpb)
                             ? assemble_B(L, basis, sample.s, Vec3(1, 0, 0), cfg.epsilon)
                             : assemble_E(L, basis, sample.s, Vec3(1, 0, 0));
      auto modes = rightmost_modes(sym, -L.mu / 2);
      Real gap = std::numeric_limits<Real>::infinity();
      for (const auto& m : modes) gap = std::min(gap, std::abs(m.lambda - sample.lambda));
      worst_gap = std::max(worst_gap, gap);
      table.add_row({fmt(sample.s), fmt(std::real(sample.lambda)),
                     fmt(std::imag(sample.lambda)), fmt(sample.root_residual),
                     fmt(sample.eig_residual), fmt(gap)});
    }
    bundle.tables.push_back(table);
  }

  // expansion report against the coefficient formulas
  if (bopts.variant == SymbolVariant::vpb && cfg.epsilon == 1.0) {
    CoefficientSet c = vpb_coefficients(L, basis);
    ResultTable rep_table;
    rep_table.name = "expansion";
    rep_table.columns = {"j", "s", "remainder", "ratio"};
    for (int j = -1; j <= 3; ++j) {
      if (fam.branch(j).samples.size() < 6) continue;
      ExpansionReport rep =
          validate_expansion(fam.branch(j), Complex(0, (j == 2 || j == 3) ? 0 : j),
                             Complex(0, 0), c.lambda_second[j]);
      for (const ExpansionRow& row : rep.rows) {
        rep_table.add_row({std::to_string(j), fmt(row.s), fmt(row.remainder), fmt(row.ratio)});
      }
    }
    bundle.tables.push_back(rep_table);
  } else if (bopts.variant == SymbolVariant::boltzmann) {
    // acoustic slope column: Im lambda_{+-1}(s)/s approaches sqrt(5/3)
    ResultTable slope;
    slope.name = "acoustic_slope";
    slope.columns = {"s", "slope_plus", "slope_minus"};
    for (const BranchSample& sample : fam.branch(1).samples) {
      const BranchSample* other = fam.branch(-1).at(sample.s);
      if (!other) continue;
      slope.add_row({fmt(sample.s), fmt(std::imag(sample.lambda) / sample.s),
                     fmt(std::imag(other->lambda) / sample.s)});
    }
    bundle.tables.push_back(slope);
  }

  bundle.summary["diagnostics"] = model_diagnostics(cfg, L);
  bundle.summary["r0"] = fam.r0;
  bundle.summary["variant"] = cfg.variant;
  bundle.summary["epsilon"] = cfg.epsilon;
  bundle.summary["oracle_gap_max"] = worst_gap;
  bundle.write(cfg.out_dir, cfg);

  if (check) {
    Real tol = cfg.model() == CollisionModel::hard_sphere ? 1e-5 : 1e-8;
    if (worst_gap > tol) {
      throw CheckFailure("dense-eigensolve agreement " + fmt(worst_gap) + " above " + fmt(tol));
    }
  }
}

void run_dispersion(const RunConfig& cfg) {
  HermiteBasis basis = cfg.make_basis();
  CollisionMatrix L = cfg.make_collision(basis);
  ResolventWorkspace ws(L, basis);
  Real kappa = poisson_coupling(cfg.symbol_variant(), cfg.epsilon);

  BranchOptions bopts;
  bopts.variant = cfg.symbol_variant();
  bopts.eps = cfg.epsilon;
  bopts.build_eigenfunctions = false;
  BranchFamily fam = continue_branches(
      L, basis, geometric_grid(cfg.branch_smin, 0.05, cfg.branch_count), bopts);

  ResultBundle bundle;
  ResultTable table;
  table.name = "dispersion";
  table.columns = {"s", "a11_re", "a11_im", "a14_re", "a14_im", "a41_re", "a41_im",
                   "a44_re", "a44_im", "a22_re", "a22_im", "abs_D_at_root",
                   "abs_D0_at_root", "route_gap"};
  for (const BranchSample& sample : fam.branch(0).samples) {
    TransportEntries e = transport_entries(ws, sample.lambda, sample.s);
    Complex D = det_D(ws, sample.lambda, sample.s, kappa);
    Complex Dm = det_D_via_matrix(ws, sample.lambda, sample.s, kappa);
    const BranchSample* shear = fam.branch(2).at(sample.s);
    Complex D0 = shear ? det_D0(ws, shear->lambda, sample.s) : Complex(0, 0);
    table.add_row({fmt(sample.s), fmt(std::real(e.a11)), fmt(std::imag(e.a11)),
                   fmt(std::real(e.a14)), fmt(std::imag(e.a14)), fmt(std::real(e.a41)),
                   fmt(std::imag(e.a41)), fmt(std::real(e.a44)), fmt(std::imag(e.a44)),
                   fmt(std::real(e.a22)), fmt(std::imag(e.a22)), fmt(std::abs(D)),
                   fmt(std::abs(D0)), fmt(std::abs(D - Dm))});
  }
  bundle.tables.push_back(table);
  bundle.summary["diagnostics"] = model_diagnostics(cfg, L);
  bundle.summary["r0"] = fam.r0;
  bundle.write(cfg.out_dir, cfg);
}

void run_scan(const RunConfig& cfg, bool check) {
  HermiteBasis basis = cfg.make_basis();
  CollisionMatrix L = cfg.make_collision(basis);
  std::vector<Real> grid = geometric_grid(cfg.sgrid_min, cfg.sgrid_max, cfg.sgrid_count);
  auto scan = spectral_gap_scan(L, basis, grid, cfg.epsilon, -L.mu / 2, cfg.threads);

  ResultBundle bundle;
  ResultTable table;
  table.name = "scan";
  table.columns = {"s", "max_re_all", "max_re_window", "count_window", "ok", "error"};
  Real worst = -std::numeric_limits<Real>::infinity();
  bool all_ok = true;
  for (const GapScanPoint& p : scan) {
    table.add_row({fmt(p.s), fmt(p.max_re_all), fmt(p.max_re_window),
                   std::to_string(p.count_window), p.ok ? "1" : "0", p.error});
    all_ok = all_ok && p.ok;
    worst = std::max(worst, p.max_re_all);
  }
  bundle.tables.push_back(table);
  bundle.summary["diagnostics"] = model_diagnostics(cfg, L);
  bundle.summary["max_re_overall"] = worst;
  bundle.write(cfg.out_dir, cfg);

  if (!all_ok) throw QualityFailure("eigensolver failures during the scan");
  if (check && !(worst < 0)) {
    throw CheckFailure("spectral gap violated: max Re = " + fmt(worst));
  }
}

std::map<Observable, Real> expected_rates(SymbolVariant variant, FamilyTag family) {
  if (variant == SymbolVariant::boltzmann) {
    return {{Observable::density, -0.75}, {Observable::momentum, -0.75},
            {Observable::energy, -0.75}, {Observable::micro, -1.25}};
  }
  if (family == FamilyTag::density_energy) {
    return {{Observable::density, -0.75}, {Observable::momentum, -0.25},
            {Observable::energy, -0.75},  {Observable::efield, -0.25},
            {Observable::micro, -0.75},   {Observable::hp_norm, -0.25}};
  }
  return {{Observable::density, -1.25}, {Observable::momentum, -0.75},
          {Observable::energy, -0.75},  {Observable::efield, -0.75},
          {Observable::micro, -1.25},   {Observable::hp_norm, -0.75}};
}

void run_decay(const RunConfig& cfg, bool check) {
  HermiteBasis basis = cfg.make_basis();
  CollisionMatrix L = cfg.make_collision(basis);
  RadialQuadrature quad =
      RadialQuadrature::log_grid(cfg.sgrid_min, cfg.sgrid_max, cfg.sgrid_count);
  std::vector<Real> times = time_grid(cfg.time_min, cfg.time_max, cfg.time_count);
  DecayHarnessOptions hopts;
  hopts.variant = cfg.symbol_variant();
  hopts.eps = cfg.epsilon;
  hopts.alpha = cfg.alpha;
  hopts.threads = cfg.threads;
  DecayHarnessResult res =
      assemble_physical_norms(cfg.make_family(), L, basis, times, quad, hopts);

  ResultBundle bundle;
  ResultTable fits;
  fits.name = "fits";
  fits.columns = {"observable", "exponent", "stderr", "residual", "t1", "t2",
                  "n_points", "oscillation_flag", "quadrature_converged"};
  std::map<Observable, Real> expect = expected_rates(hopts.variant, cfg.family());
  bool rates_ok = true;
  for (const auto& [obs, series] : res.series) {
    ResultTable table;
    table.name = "decay_" + to_string(obs);
    table.columns = {"t", "norm"};
    for (size_t i = 0; i < series.t.size(); ++i) {
      table.add_row({fmt(series.t[i]), fmt(series.value[i])});
    }
    bundle.tables.push_back(table);

    DecayFit fit = fit_exponent(series, cfg.fit_t1, cfg.fit_t2);
    fits.add_row({to_string(obs), fmt(fit.exponent), fmt(fit.stderr_), fmt(fit.residual),
                  fmt(fit.t1), fmt(fit.t2), std::to_string(fit.n_points),
                  fit.oscillation_flag ? "1" : "0",
                  res.quadrature_converged ? "1" : "0"});
    auto it = expect.find(obs);
    if (it != expect.end() && std::abs(fit.exponent - it->second) > 0.08) {
      rates_ok = false;
    }
  }
  bundle.tables.push_back(fits);
  bundle.summary["diagnostics"] = model_diagnostics(cfg, L);
  bundle.summary["family"] = cfg.family_tag;
  bundle.summary["variant"] = cfg.variant;
  bundle.summary["quadrature_converged"] = res.quadrature_converged;
  bundle.summary["quadrature_max_rel_change"] = res.max_rel_change;
  bundle.write(cfg.out_dir, cfg);

  if (!res.quadrature_converged) {
    throw QualityFailure("radial quadrature did not converge (doubling test moved norms by " +
                         fmt(res.max_rel_change) + ")");
  }
  if (check && !rates_ok) {
    throw CheckFailure("fitted decay exponents left the +-0.08 acceptance band");
  }
}

void run_nsp(const RunConfig& cfg, bool check) {
  HermiteBasis basis = cfg.make_basis();
  CollisionMatrix L = cfg.make_collision(basis);
  CoefficientSet c = vpb_coefficients(L, basis);
  RadialQuadrature quad =
      RadialQuadrature::log_grid(cfg.sgrid_min, cfg.sgrid_max, cfg.sgrid_count);
  std::vector<Real> times = time_grid(cfg.time_min, cfg.time_max, cfg.time_count);
  NspFamily family = cfg.family() == FamilyTag::density_energy
                         ? NspFamily::gaussian_density_temperature
                         : NspFamily::zero_density;
  NspDecayResult res = nsp_decay(c.a2, c.a0, family, times, quad, cfg.threads);

  ResultBundle bundle;
  ResultTable table;
  table.name = "nsp_norms";
  table.columns = {"t", "n", "m", "theta"};
  for (size_t i = 0; i < res.n.t.size(); ++i) {
    table.add_row({fmt(res.n.t[i]), fmt(res.n.value[i]), fmt(res.m.value[i]),
                   fmt(res.theta.value[i])});
  }
  bundle.tables.push_back(table);

  struct Row {
    const NormSeries* series;
    std::string name;
    Real expected;
  };
  bool gaussian = (family == NspFamily::gaussian_density_temperature);
  std::vector<Row> rows = {{&res.n, "n", gaussian ? -0.75 : -1.25},
                           {&res.m, "m", gaussian ? -0.25 : -0.75},
                           {&res.theta, "theta", -0.75}};
  ResultTable fits;
  fits.name = "nsp_fits";
  fits.columns = {"channel", "exponent", "stderr", "residual", "expected"};
  bool rates_ok = true;
  for (const Row& row : rows) {
    DecayFit fit = fit_exponent(*row.series, cfg.fit_t1, cfg.fit_t2);
    fits.add_row({row.name, fmt(fit.exponent), fmt(fit.stderr_), fmt(fit.residual),
                  fmt(row.expected)});
    rates_ok = rates_ok && std::abs(fit.exponent - row.expected) <= 0.08;
  }
  bundle.tables.push_back(fits);
  bundle.summary["diagnostics"] = model_diagnostics(cfg, L);
  bundle.summary["eta"] = c.a2;
  bundle.summary["alpha"] = c.a0;
  bundle.summary["quadrature_converged"] = res.quadrature_converged;
  bundle.write(cfg.out_dir, cfg);

  if (!res.quadrature_converged) {
    throw QualityFailure("NSP radial quadrature did not converge");
  }
  if (check && !rates_ok) {
    throw CheckFailure("NSP exponents left the +-0.08 acceptance band");
  }
}

int run_check(const RunConfig& cfg) {
  AcceptanceOptions aopts;
  aopts.threads = cfg.threads;
  aopts.cache_dir = cfg.cache_dir;
  aopts.seed = cfg.seed;
  auto results = run_acceptance(aopts);
  ResultBundle bundle;
  ResultTable table;
  table.name = "acceptance";
  table.columns = {"id", "name", "pass", "detail", "seconds"};
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%2d/11] %s %s |%s (%.1f s)\n", r.id, r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    table.add_row({std::to_string(r.id), r.name, r.pass ? "1" : "0", r.detail,
                   fmt(r.seconds)});
    all = all && r.pass;
  }
  bundle.tables.push_back(table);
  bundle.summary["all_pass"] = all;
  bundle.write(cfg.out_dir, cfg);
  return all ? 0 : kExitTolerance;
}

}  // namespace
}  // namespace vpb

int main(int argc, char** argv) {
  using namespace vpb;
  CLI::App app{"spectral toolkit for the linearized Vlasov-Poisson-Boltzmann system"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  int threads_override = -1;
  bool check = false;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  app.add_option("--config", config_path, "configuration file (key = value lines)");
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--threads", threads_override, "worker thread count (0 = hardware)");
  app.add_flag("--check", check, "enforce acceptance tolerances (exit 4 on failure)");
  app.add_option("--seed", seed_override, "seed for randomized checks")
      ->each([&](const std::string&) { seed_given = true; });

  auto* coeffs = app.add_subcommand("coeffs", "expansion coefficients a0, a1, a2, b1");
  auto* branches = app.add_subcommand("branches", "eigenvalue branch continuation");
  auto* dispersion = app.add_subcommand("dispersion", "transport entries and determinants");
  auto* scan = app.add_subcommand("spectrum-scan", "high-frequency spectral gap scan");
  auto* decay = app.add_subcommand("decay", "semigroup decay-rate harness");
  auto* nsp = app.add_subcommand("nsp", "Navier-Stokes-Poisson fluid comparison");
  auto* checkcmd = app.add_subcommand("check", "run the full acceptance suite");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (threads_override >= 0) cfg.threads = threads_override;
    if (seed_given) cfg.seed = seed_override;
    cfg.validate();

    if (coeffs->parsed()) run_coeffs(cfg, check);
    if (branches->parsed()) run_branches(cfg, check);
    if (dispersion->parsed()) run_dispersion(cfg);
    if (scan->parsed()) run_scan(cfg, check);
    if (decay->parsed()) run_decay(cfg, check);
    if (nsp->parsed()) run_nsp(cfg, check);
    if (checkcmd->parsed()) return run_check(cfg);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CheckFailure& e) {
    std::cerr << "acceptance check failed: " << e.what() << "\n";
    return kExitTolerance;
  } catch (const QualityFailure& e) {
    std::cerr << "numerical quality gate: " << e.what() << "\n";
    return kExitQuality;
  } catch (const numerical_error& e) {
    std::cerr << "numerical quality gate: " << e.what() << "\n";
    return kExitQuality;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
