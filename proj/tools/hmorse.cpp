// hmorse: central configurations, Maslov and Morse indices of homothetic
// colliding orbits.
//
// Exit codes: 0 success (or verdict consistent with the classification),
// 1 verdict mismatch or runtime failure, 2 usage or parse error, and 2 for
// an Inconclusive verdict from `verify`.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmorse/errors.hpp"
#include "hmorse/io.hpp"

using namespace hmorse;
namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct SystemArgs {
  std::string system;
  std::string guess;
  std::string preset;
  std::string cc;
  std::string out;
};

std::pair<MassSystem, Vec> system_and_guess(const SystemArgs& a) {
  if (!a.preset.empty()) {
    Preset p = preset(a.preset);
    if (!a.guess.empty()) p.guess = io::read_guess(a.guess, p.system);
    return {p.system, p.guess};
  }
  if (a.system.empty()) throw ConfigError("need --system or --preset");
  const MassSystem sys = io::read_system(a.system);
  if (a.guess.empty()) throw ConfigError("need --guess with --system");
  return {sys, io::read_guess(a.guess, sys)};
}

void print_cc(const CentralConfiguration& cc) {
  std::printf("b = %s\n", io::format_double(cc.b_value).c_str());
  std::printf("residual = %s (%d iterations)\n", io::format_double(cc.residual_norm).c_str(),
              cc.iterations);
  std::printf("spectrum =");
  for (double l : cc.spectrum) std::printf(" %s", io::format_double(l).c_str());
  std::printf("%s\n", cc.spectrum.empty() ? " (empty)" : "");
  std::printf("classification = %s\n", to_string(cc.classification.tag).c_str());
  std::printf("margin = %s\n", std::isinf(cc.classification.margin)
                                   ? "inf"
                                   : io::format_double(cc.classification.margin).c_str());
}

int cmd_cc_find(const SystemArgs& a) {
  const auto [sys, guess] = system_and_guess(a);
  const CentralConfiguration cc = find_cc(sys, guess);
  print_cc(cc);
  if (!a.out.empty()) io::write_json_file(a.out, io::to_json(cc));
  return 0;
}

int cmd_cc_classify(const SystemArgs& a) {
  CentralConfiguration cc = [&] {
    if (a.cc.empty()) {
      const auto [sys, guess] = system_and_guess(a);
      return find_cc(sys, guess);
    }
    // recompute from the stored shape instead of trusting the record
    CentralConfiguration rec = io::cc_from_json(io::read_json_file(a.cc));
    rec.residual_norm = cc_residual(rec.system, rec.shape).norm();
    rec.spectrum = restricted_spectrum(rec.system, rec.shape, rec.chart());
    rec.classification = classify(rec.spectrum, rec.b_value);
    return rec;
  }();
  print_cc(cc);
  if (!a.out.empty()) io::write_json_file(a.out, io::to_json(cc));
  return 0;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError(what + ": cannot parse '" + item + "'");
    out.push_back(x);
  }
  if (out.empty()) throw ConfigError(what + " must not be empty");
  return out;
}

struct IndexArgs {
  std::string orbit;
  std::string horizons;
  std::string out;
  bool horizons_given = false;
};

io::RunConfig load_config(const IndexArgs& a) {
  io::RunConfig cfg = io::load_run_config(a.orbit);
  if (a.horizons_given) cfg.horizons = parse_list(a.horizons, "horizons");
  if (!a.out.empty()) cfg.report_path = a.out;
  cfg.validate();
  return cfg;
}

void print_index(const IndexReport& rep) {
  const auto& gi = rep.index;
  for (std::size_t i = 0; i < gi.horizons.size(); ++i) {
    std::printf("horizon %g: mu = %d (radial %d)\n", gi.horizons[i], gi.mu_total[i], gi.mu_b1[i]);
  }
  std::printf("verdict = %s (expected %s)\n", to_string(rep.verdict).c_str(),
              to_string(expected_verdict(rep.orbit.classification)).c_str());
  if (!rep.diagnostics.empty()) std::printf("diagnostics: %s\n", rep.diagnostics.c_str());
}

int cmd_index(const IndexArgs& a) {
  const io::RunConfig cfg = load_config(a);
  IndexOptions opts;
  opts.tol = cfg.tol_ode;
  const HomotheticOrbit orbit = io::build_orbit(cfg);
  const IndexReport rep = theorem_a_verdict(orbit, cfg.horizons, opts);
  print_index(rep);
  io::write_json_file(cfg.report_path, io::to_json(rep));
  return 0;
}

int cmd_verify(const IndexArgs& a) {
  const io::RunConfig cfg = load_config(a);
  IndexOptions opts;
  opts.tol = cfg.tol_ode;
  const HomotheticOrbit orbit = io::build_orbit(cfg);
  IndexReport rep = theorem_a_verdict(orbit, cfg.horizons, opts);
  rep.theorem_rows = index_theorem_check(orbit, io::resolve_t_grid(cfg, orbit), cfg.mesh, opts);
  bool identity = true;
  for (const auto& row : rep.theorem_rows) {
    rep.galerkin[{row.t_phys, cfg.mesh}] = row.galerkin;
    identity = identity && row.pass;
    std::printf("T = %s: galerkin %d + n* %d %s maslov %d\n",
                io::format_double(row.t_phys).c_str(), row.galerkin, row.n_star,
                row.pass ? "==" : "!=", row.maslov);
  }
  print_index(rep);
  io::write_json_file(cfg.report_path, io::to_json(rep));
  if (rep.verdict == Verdict::Inconclusive) return kExitUsage;
  if (rep.verdict != expected_verdict(orbit.classification) || !identity) return kExitFailure;
  return 0;
}

struct SweepArgs {
  std::string family = "collinear3";
  int dim = 2;
  std::string grid;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  const Family fam = family_preset(a.family, a.dim);
  const auto rows = spiral_sweep(fam.masses, fam.guess, parse_list(a.grid, "grid"));
  std::printf("parameter,converged,lambda1,bound,classification\n");
  for (const auto& r : rows) {
    std::printf("%s,%d,%s,%s,%s\n", io::format_double(r.parameter).c_str(), r.converged ? 1 : 0,
                r.converged ? io::format_double(r.lambda1).c_str() : "",
                r.converged ? io::format_double(r.bound).c_str() : "",
                r.converged ? to_string(r.cc->classification.tag).c_str() : r.failure.c_str());
  }
  if (!a.out.empty()) io::write_json_file(a.out, io::to_json(rows));
  return 0;
}

struct PlotArgs {
  std::string report;
  std::string outdir = ".";
  int samples = 2000;
};

int cmd_plotdata(const PlotArgs& a) {
  if (!fs::exists(a.report)) {
    std::fprintf(stderr, "hmorse: report '%s' not found\n", a.report.c_str());
    return kExitFailure;
  }
  const io::json rep = io::read_json_file(a.report);
  const HomotheticOrbit orbit = io::orbit_from_report(rep);
  std::vector<double> horizons;
  std::vector<int> mu, mu_b1;
  std::vector<std::vector<int>> mu_lambda;
  try {
    horizons = rep.at("horizons").get<std::vector<double>>();
    mu = rep.at("mu_total").get<std::vector<int>>();
    mu_b1 = rep.at("mu_b1_profile").get<std::vector<int>>();
    for (std::size_t i = 0; i < orbit.spectrum.size(); ++i) {
      mu_lambda.push_back(
          rep.at("mu_per_lambda").at(std::to_string(i)).at("profile").get<std::vector<int>>());
    }
  } catch (const io::json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  bool consistent = !horizons.empty() && mu.size() == horizons.size() &&
                    mu_b1.size() == horizons.size();
  for (const auto& p : mu_lambda) consistent = consistent && p.size() == horizons.size();
  if (!consistent) {
    throw ConfigError("report has no index profile");
  }
  fs::create_directories(a.outdir);
  const double tau_max = horizons.back();
  auto path = std::make_shared<ReducedPath>(reduced_flow(orbit, tau_max));
  io::write_csv_file((fs::path(a.outdir) / "path.csv").string(), io::path_table(*path));

  // position component of the transported frame of each 2x2 block,
  // normalized; it vanishes exactly at the crossings
  io::CsvTable blocks;
  blocks.header = {"tau", "c_radial"};
  std::vector<LagrangianPath> lps;
  const double b = orbit.b();
  lps.push_back(transport([path, b](double t) { return block_B1(path->v(t), b); },
                          LagrangianFrame::dirichlet(1), 0.0, tau_max));
  for (std::size_t i = 0; i < orbit.spectrum.size(); ++i) {
    const double l = orbit.spectrum[i];
    blocks.header.push_back("c_lambda" + std::to_string(i + 1));
    lps.push_back(transport([path, l](double t) { return block_Blambda(path->v(t), l); },
                            LagrangianFrame::dirichlet(1), 0.0, tau_max));
  }
  for (int s = 0; s <= a.samples; ++s) {
    const double tau = tau_max * s / a.samples;
    std::vector<double> row{tau};
    for (const auto& lp : lps) {
      const Mat f = lp.frame(tau);
      row.push_back(f(1, 0) / f.norm());
    }
    blocks.rows.push_back(row);
  }
  io::write_csv_file((fs::path(a.outdir) / "blocks.csv").string(), blocks);

  io::CsvTable series;
  series.header = {"horizon", "mu_total", "mu_radial"};
  for (std::size_t j = 0; j < mu_lambda.size(); ++j) {
    series.header.push_back("mu_lambda" + std::to_string(j + 1));
  }
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    std::vector<double> row{horizons[i], static_cast<double>(mu[i]),
                            static_cast<double>(mu_b1[i])};
    for (const auto& p : mu_lambda) row.push_back(p[i]);
    series.rows.push_back(row);
  }
  io::write_csv_file((fs::path(a.outdir) / "mu.csv").string(), series);
  std::printf("wrote path.csv, blocks.csv, mu.csv to %s\n", a.outdir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maslov and Morse indices of homothetic colliding n-body orbits"};
  app.require_subcommand(1);

  SystemArgs sys_args;
  auto* cc = app.add_subcommand("cc", "central configurations");
  cc->require_subcommand(1);
  auto add_system_opts = [&](CLI::App* c) {
    c->add_option("--system", sys_args.system, "mass system (TOML or JSON)");
    c->add_option("--guess", sys_args.guess, "initial guess (JSON)");
    c->add_option("--preset", sys_args.preset, "kepler1d | lagrange_equal | euler_collinear");
    c->add_option("--out", sys_args.out, "write the record as JSON");
  };
  auto* cc_find = cc->add_subcommand("find", "find a central configuration");
  add_system_opts(cc_find);
  auto* cc_classify = cc->add_subcommand("classify", "spectrum and spiral classification");
  add_system_opts(cc_classify);
  cc_classify->add_option("--cc", sys_args.cc, "existing cc.json record");

  IndexArgs idx_args;
  auto add_index_opts = [&](CLI::App* c) {
    c->add_option("--orbit", idx_args.orbit, "run configuration (TOML or JSON)")->required();
    c->add_option("--horizons", idx_args.horizons, "comma-separated tau horizons");
    c->add_option("--out", idx_args.out, "report path");
  };
  auto* index = app.add_subcommand("index", "geometrical index");
  index->require_subcommand(1);
  auto* index_compute = index->add_subcommand("compute", "Maslov index profile and verdict");
  add_index_opts(index_compute);
  auto* verify = app.add_subcommand("verify", "end-to-end checks");
  verify->require_subcommand(1);
  auto* verify_a = verify->add_subcommand("theorem-a", "verdict plus index theorem check");
  add_index_opts(verify_a);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "classify a family of central configurations");
  sweep->add_option("--family", sweep_args.family, "collinear3 | triangle3");
  sweep->add_option("--dim", sweep_args.dim, "ambient dimension");
  sweep->add_option("--grid", sweep_args.grid, "comma-separated parameters")->required();
  sweep->add_option("--out", sweep_args.out, "write rows as JSON");

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plotdata", "CSV series from a report");
  plot->add_option("--report", plot_args.report, "report.json")->required();
  plot->add_option("--outdir", plot_args.outdir, "output directory");
  plot->add_option("--samples", plot_args.samples, "samples of the block curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  idx_args.horizons_given = (index_compute->count("--horizons") + verify_a->count("--horizons")) > 0;

  try {
    if (*cc_find) return cmd_cc_find(sys_args);
    if (*cc_classify) return cmd_cc_classify(sys_args);
    if (*index_compute) return cmd_index(idx_args);
    if (*verify_a) return cmd_verify(idx_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*plot) return cmd_plotdata(plot_args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "hmorse: %s\n", e.what());
    return kExitUsage;
  } catch (const NoConvergenceError& e) {
    std::fprintf(stderr, "hmorse: %s\nlast residual: %s\n", e.what(),
                 io::format_double(e.last_residual()).c_str());
    return kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hmorse: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
