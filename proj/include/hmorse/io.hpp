#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmorse/index_engine.hpp"

namespace hmorse::io {

using nlohmann::json;

/// 17 significant digits, lowercase scientific ("-1.2500000000000000e+00").
std::string format_double(double x);

/// Deterministic writer: object keys in insertion order of the ordered_json
/// produced here, floats via format_double, non-finite floats as null.
void write_json(std::ostream& os, const nlohmann::ordered_json& j, int indent = 2);
std::string dump_json(const nlohmann::ordered_json& j);
void write_json_file(const std::string& path, const nlohmann::ordered_json& j);
json read_json_file(const std::string& path);

nlohmann::ordered_json to_json(const CentralConfiguration& cc);
/// Restores the record written by to_json (no recomputation).
CentralConfiguration cc_from_json(const json& j);

nlohmann::ordered_json to_json(const HomotheticOrbit& orbit);
nlohmann::ordered_json to_json(const IndexReport& report);
/// Rebuilds the orbit of a report written by to_json(IndexReport). Orbits
/// with a central configuration re-run find_cc from the stored shape.
HomotheticOrbit orbit_from_report(const json& report);
nlohmann::ordered_json to_json(const std::vector<CrossingEvent>& crossings);
nlohmann::ordered_json to_json(const std::vector<SweepRow>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
void write_csv(std::ostream& os, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

CsvTable crossing_table(const std::vector<CrossingEvent>& crossings);
/// (tau, v, r, t_phys, energy_residual) at every accepted step.
CsvTable path_table(const ReducedPath& path);

/// Mass system from a TOML or JSON file with keys masses = [...], dim = d.
MassSystem read_system(const std::string& path);
/// Guess from JSON {"n": n, "d": d, "coords": [...]} (flat, row-major).
Vec read_guess(const std::string& path, const MassSystem& sys);
Vec guess_from_json(const json& j, const MassSystem& sys);

/// Run configuration, TOML or JSON:
///
///   [system]  masses = [...], dim = d        (or preset = "lagrange_equal")
///   [guess]   coords = [...] | file = "..."  (optional with a preset)
///   [synthetic] b = 1.0, spectrum = [...]    (instead of [system])
///   [orbit]   h0 = -1.0, start = "apex" | "radius", r0 = 1.0, v0 = ...
///   [index]   horizons = [5, 10, 20, 50]
///   [galerkin] t_fractions = [...] | t_grid = [...], mesh = 64
///   [tolerances] cc = 1e-10, ode = 1e-10
///   [output]  report = "report.json", cc = "cc.json"
struct RunConfig {
  std::optional<std::string> preset;
  std::optional<MassSystem> system;
  std::optional<Vec> guess;
  std::optional<double> synthetic_b;
  std::vector<double> synthetic_spectrum;
  double h0 = -1.0;
  std::string start = "auto";  // auto | apex | radius | explicit
  std::optional<double> r0;
  std::optional<double> v0;
  std::vector<double> horizons{5.0, 10.0, 20.0, 50.0};
  std::vector<double> t_fractions{0.3, 0.6, 0.9};
  std::vector<double> t_grid;  // physical times; overrides t_fractions
  int mesh = 64;
  double tol_cc = kTolCc;
  double tol_ode = 1e-10;
  std::string report_path = "report.json";
  std::string cc_path = "cc.json";

  void validate() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, bool is_json);

/// Resolves the mass system and guess (preset or explicit).
std::pair<MassSystem, Vec> resolve_system(const RunConfig& cfg);
/// Central configuration + orbit, or a synthetic orbit.
HomotheticOrbit build_orbit(const RunConfig& cfg);
/// Physical-time grid for the index theorem check.
std::vector<double> resolve_t_grid(const RunConfig& cfg, const HomotheticOrbit& orbit);

}  // namespace hmorse::io
