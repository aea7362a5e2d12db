#include "hmorse/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <toml.hpp>

#include "hmorse/errors.hpp"

namespace hmorse::io {

using ojson = nlohmann::ordered_json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

namespace {

void write_value(std::ostream& os, const ojson& j, int indent, int depth) {
  const std::string pad(indent * (depth + 1), ' ');
  const std::string close(indent * depth, ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case ojson::value_t::number_float: {
      const double x = j.get<double>();
      os << (std::isfinite(x) ? format_double(x) : "null");
      break;
    }
    case ojson::value_t::array:
      if (j.empty()) {
        os << "[]";
        break;
      }
      os << "[" << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        os << pad;
        write_value(os, j[i], indent, depth + 1);
        os << (i + 1 < j.size() ? "," : "") << nl;
      }
      os << close << "]";
      break;
    case ojson::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{" << nl;
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        os << pad << ojson(it.key()).dump() << ": ";
        write_value(os, it.value(), indent, depth + 1);
        os << (i + 1 < j.size() ? "," : "") << nl;
      }
      os << close << "}";
      break;
    }
    default:
      os << j.dump();
  }
}

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

ojson vec_json(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(x);
  return a;
}

ojson vec_json(const Vec& v) {
  ojson a = ojson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ojson int_json(const std::vector<int>& v) {
  ojson a = ojson::array();
  for (int x : v) a.push_back(x);
  return a;
}

std::vector<double> doubles(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(what + " must contain only numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

json toml_to_json(const toml::node& node) {
  if (auto* t = node.as_table()) {
    json out = json::object();
    for (auto&& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
    return out;
  }
  if (auto* a = node.as_array()) {
    json out = json::array();
    for (auto&& v : *a) out.push_back(toml_to_json(v));
    return out;
  }
  if (auto v = node.value_exact<std::string>()) return *v;
  if (auto v = node.value_exact<int64_t>()) return *v;
  if (auto v = node.value_exact<double>()) return *v;
  if (auto v = node.value_exact<bool>()) return *v;
  throw ConfigError("unsupported TOML value type");
}

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_any(const std::string& text, bool is_json, const std::string& origin) {
  if (is_json) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(origin + ": " + e.what());
    }
  }
  try {
    return toml_to_json(toml::parse(text, origin));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << origin << ":" << e.source().begin.line << ":" << e.source().begin.column
        << ": " << e.description();
    throw ConfigError(msg.str());
  }
}

MassSystem system_from_json(const json& j) {
  if (!j.contains("masses")) throw ConfigError("system needs 'masses'");
  if (!j.contains("dim") || !j["dim"].is_number_integer()) {
    throw ConfigError("system needs an integer 'dim'");
  }
  return MassSystem(doubles(j["masses"], "masses"), j["dim"].get<int>());
}

}  // namespace

void write_json(std::ostream& os, const ojson& j, int indent) {
  write_value(os, j, indent, 0);
  os << "\n";
}

std::string dump_json(const ojson& j) {
  std::ostringstream os;
  write_json(os, j);
  return os.str();
}

void write_json_file(const std::string& path, const ojson& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_json(out, j);
}

json read_json_file(const std::string& path) {
  return parse_any(slurp(path), true, path);
}

ojson to_json(const CentralConfiguration& cc) {
  ojson j;
  j["n_bodies"] = cc.system.n_bodies();
  j["dim"] = cc.system.dim();
  j["masses"] = vec_json(cc.system.masses());
  j["shape"] = vec_json(cc.shape);
  j["b_value"] = cc.b_value;
  j["spectrum"] = vec_json(cc.spectrum);
  j["classification"] = to_string(cc.classification.tag);
  j["margin"] = cc.classification.margin;
  j["residual_norm"] = cc.residual_norm;
  j["iterations"] = cc.iterations;
  return j;
}

CentralConfiguration cc_from_json(const json& j) {
  try {
    MassSystem sys(doubles(j.at("masses"), "masses"), j.at("dim").get<int>());
    const auto shape = doubles(j.at("shape"), "shape");
    if (static_cast<int>(shape.size()) != sys.ambient_size()) {
      throw ConfigError("shape has wrong length");
    }
    CentralConfiguration cc{sys, Eigen::Map<const Vec>(shape.data(), shape.size()), 0.0,
                            0.0, {}, {SpiralTag::NonSpiralStrict, 0.0}, 0};
    cc.b_value = j.at("b_value").get<double>();
    cc.spectrum = doubles(j.at("spectrum"), "spectrum");
    cc.classification = {spiral_tag_from_string(j.at("classification").get<std::string>()),
                         number_or_inf(j.at("margin"))};
    cc.residual_norm = j.at("residual_norm").get<double>();
    cc.iterations = j.value("iterations", 0);
    return cc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed central configuration record: ") + e.what());
  }
}

ojson to_json(const HomotheticOrbit& orbit) {
  ojson j;
  j["b"] = orbit.b();
  j["h0"] = orbit.h0();
  j["r0"] = orbit.radial.r0;
  j["v0"] = orbit.radial.v0;
  j["n_star"] = orbit.n_star;
  j["synthetic"] = !orbit.cc.has_value();
  if (orbit.cc) {
    j["masses"] = vec_json(orbit.cc->system.masses());
    j["dim"] = orbit.cc->system.dim();
    j["shape"] = vec_json(orbit.cc->shape);
  }
  return j;
}

ojson to_json(const IndexReport& rep) {
  ojson j;
  j["orbit"] = to_json(rep.orbit);
  j["spectrum"] = vec_json(rep.orbit.spectrum);
  j["classification"] = {{"tag", to_string(rep.orbit.classification.tag)},
                         {"margin", rep.orbit.classification.margin}};
  if (rep.orbit.spectrum.empty()) {
    j["classification"]["note"] =
        "empty spectrum: no eigenvalue can violate the bound, classified NonSpiralStrict";
  }
  const auto& gi = rep.index;
  j["horizons"] = vec_json(gi.horizons);
  j["mu_total"] = int_json(gi.mu_total);
  j["mu_b1"] = gi.mu_b1.empty() ? ojson(nullptr) : ojson(gi.mu_b1.back());
  j["mu_b1_profile"] = int_json(gi.mu_b1);
  ojson per = ojson::object();
  for (std::size_t i = 0; i < gi.mu_per_lambda.size(); ++i) {
    per[std::to_string(i)] = {{"lambda", rep.orbit.spectrum[i]},
                              {"mu", gi.mu_per_lambda[i].back()},
                              {"profile", int_json(gi.mu_per_lambda[i])}};
  }
  j["mu_per_lambda"] = per;
  j["mu_full"] = int_json(gi.mu_full);
  ojson gal = ojson::object();
  for (const auto& [key, count] : rep.galerkin) {
    gal["T=" + format_double(key.first) + ",m=" + std::to_string(key.second)] = count;
  }
  j["galerkin"] = gal;
  ojson rows = ojson::array();
  for (const auto& r : rep.theorem_rows) {
    rows.push_back({{"T", r.t_phys},
                    {"tau", r.tau},
                    {"galerkin", r.galerkin},
                    {"maslov", r.maslov},
                    {"n_star", r.n_star},
                    {"pass", r.pass}});
  }
  j["index_theorem"] = rows;
  if (!rep.mu_epsilon.empty()) j["mu_epsilon"] = int_json(rep.mu_epsilon);
  j["predicted_density"] = rep.predicted_density;
  j["fitted_slope"] = rep.fitted_slope;
  j["max_isotropy_defect"] = gi.max_isotropy_defect;
  j["max_energy_residual"] = gi.max_energy_residual;
  j["verdict"] = to_string(rep.verdict);
  j["expected_verdict"] = to_string(expected_verdict(rep.orbit.classification));
  j["diagnostics"] = rep.diagnostics;
  return j;
}

HomotheticOrbit orbit_from_report(const json& report) {
  try {
    const json& o = report.at("orbit");
    const double h0 = o.at("h0").get<double>();
    const double r0 = o.at("r0").get<double>();
    const double v0 = o.at("v0").get<double>();
    if (o.at("synthetic").get<bool>()) {
      HomotheticOrbit orbit = HomotheticOrbit::synthetic(
          o.at("b").get<double>(), doubles(report.at("spectrum"), "spectrum"), h0, r0);
      orbit.radial.v0 = v0;
      orbit.validate();
      return orbit;
    }
    MassSystem sys(doubles(o.at("masses"), "masses"), o.at("dim").get<int>());
    const auto shape = doubles(o.at("shape"), "shape");
    const Vec s = Eigen::Map<const Vec>(shape.data(), shape.size());
    return HomotheticOrbit::with_start(find_cc(sys, s), h0, r0, v0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

ojson to_json(const std::vector<CrossingEvent>& crossings) {
  ojson a = ojson::array();
  for (const auto& c : crossings) {
    a.push_back({{"tau_c", c.tau_c},
                 {"kernel_dim", c.kernel_dim},
                 {"coindex", c.form_inertia.coindex},
                 {"nullity", c.form_inertia.nullity},
                 {"index", c.form_inertia.index}});
  }
  return a;
}

ojson to_json(const std::vector<SweepRow>& rows) {
  ojson a = ojson::array();
  for (const auto& r : rows) {
    ojson o;
    o["parameter"] = r.parameter;
    o["converged"] = r.converged;
    if (r.converged) {
      o["lambda1"] = r.lambda1;
      o["bound"] = r.bound;
      o["b_value"] = r.cc->b_value;
      o["classification"] = to_string(r.cc->classification.tag);
      o["margin"] = r.cc->classification.margin;
    } else {
      o["failure"] = r.failure;
    }
    a.push_back(o);
  }
  return a;
}

void write_csv(std::ostream& os, const CsvTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    os << (i ? "," : "") << t.header[i];
  }
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << format_double(row[i]);
    }
    os << "\n";
  }
}

void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_csv(out, t);
}

CsvTable crossing_table(const std::vector<CrossingEvent>& crossings) {
  CsvTable t{{"tau_c", "kernel_dim", "coindex", "nullity", "index"}, {}};
  for (const auto& c : crossings) {
    t.rows.push_back({c.tau_c, double(c.kernel_dim), double(c.form_inertia.coindex),
                      double(c.form_inertia.nullity), double(c.form_inertia.index)});
  }
  return t;
}

CsvTable path_table(const ReducedPath& path) {
  CsvTable t{{"tau", "v", "r", "t_phys", "energy_residual"}, {}};
  for (double tau : path.dense().times()) {
    t.rows.push_back({tau, path.v(tau), path.r(tau), path.t(tau), path.energy_residual(tau)});
  }
  return t;
}

MassSystem read_system(const std::string& path) {
  return system_from_json(parse_any(slurp(path), has_suffix(path, ".json"), path));
}

Vec guess_from_json(const json& j, const MassSystem& sys) {
  const auto coords = doubles(j.contains("coords") ? j["coords"] : j, "coords");
  if (j.contains("n") && j["n"].get<int>() != sys.n_bodies()) {
    throw ConfigError("guess has a different number of bodies");
  }
  if (j.contains("d") && j["d"].get<int>() != sys.dim()) {
    throw ConfigError("guess has a different dimension");
  }
  if (static_cast<int>(coords.size()) != sys.ambient_size()) {
    throw ConfigError("guess must have n*d coordinates");
  }
  return Eigen::Map<const Vec>(coords.data(), coords.size());
}

Vec read_guess(const std::string& path, const MassSystem& sys) {
  return guess_from_json(read_json_file(path), sys);
}

void RunConfig::validate() const {
  if (!preset && !system && !synthetic_b) {
    throw ConfigError("config needs [system], a preset or [synthetic]");
  }
  if (preset) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), *preset) == names.end()) {
      throw ConfigError("unknown preset '" + *preset + "'");
    }
  }
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (!(horizons[i] > horizons[i - 1])) throw ConfigError("horizons must be strictly increasing");
  }
  if (horizons.empty()) throw ConfigError("horizons must not be empty");
  if (mesh < 8) throw ConfigError("galerkin mesh must be at least 8");
  for (double f : t_fractions) {
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("t_fractions must lie in (0, 1)");
  }
  if (start != "auto" && start != "apex" && start != "radius" && start != "explicit") {
    throw ConfigError("start must be auto, apex, radius or explicit");
  }
}

RunConfig parse_run_config(const std::string& text, bool is_json) {
  const json j = parse_any(text, is_json, "config");
  RunConfig c;
  try {
    if (j.contains("system")) {
      const json& s = j["system"];
      if (s.contains("preset")) {
        c.preset = s["preset"].get<std::string>();
      } else {
        c.system = system_from_json(s);
      }
    }
    if (j.contains("preset")) c.preset = j["preset"].get<std::string>();
    if (j.contains("guess")) {
      const json& g = j["guess"];
      if (!c.system && !c.preset) throw ConfigError("[guess] needs a [system]");
      const MassSystem sys = c.system ? *c.system : preset(*c.preset).system;
      if (g.contains("file")) {
        c.guess = read_guess(g["file"].get<std::string>(), sys);
      } else {
        c.guess = guess_from_json(g, sys);
      }
    }
    if (j.contains("synthetic")) {
      c.synthetic_b = j["synthetic"].at("b").get<double>();
      c.synthetic_spectrum = doubles(j["synthetic"].value("spectrum", json::array()), "spectrum");
    }
    if (j.contains("orbit")) {
      const json& o = j["orbit"];
      c.h0 = o.value("h0", c.h0);
      c.start = o.value("start", c.start);
      if (o.contains("r0")) c.r0 = o["r0"].get<double>();
      if (o.contains("v0")) c.v0 = o["v0"].get<double>();
    }
    if (j.contains("index") && j["index"].contains("horizons")) {
      c.horizons = doubles(j["index"]["horizons"], "horizons");
    }
    if (j.contains("galerkin")) {
      const json& g = j["galerkin"];
      if (g.contains("t_fractions")) c.t_fractions = doubles(g["t_fractions"], "t_fractions");
      if (g.contains("t_grid")) c.t_grid = doubles(g["t_grid"], "t_grid");
      c.mesh = g.value("mesh", c.mesh);
    }
    if (j.contains("tolerances")) {
      c.tol_cc = j["tolerances"].value("cc", c.tol_cc);
      c.tol_ode = j["tolerances"].value("ode", c.tol_ode);
    }
    if (j.contains("output")) {
      c.report_path = j["output"].value("report", c.report_path);
      c.cc_path = j["output"].value("cc", c.cc_path);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(slurp(path), has_suffix(path, ".json"));
}

std::pair<MassSystem, Vec> resolve_system(const RunConfig& cfg) {
  if (cfg.system) {
    if (!cfg.guess) throw ConfigError("an explicit [system] needs a [guess]");
    return {*cfg.system, *cfg.guess};
  }
  if (!cfg.preset) throw ConfigError("no mass system configured");
  Preset p = preset(*cfg.preset);
  return {p.system, cfg.guess ? *cfg.guess : p.guess};
}

HomotheticOrbit build_orbit(const RunConfig& cfg) {
  const bool apex = cfg.start == "apex" || (cfg.start == "auto" && cfg.h0 < 0.0);
  if (cfg.synthetic_b) {
    const double r0 = apex ? 0.0 : cfg.r0.value_or(1.0);
    if (cfg.start == "apex" && cfg.h0 >= 0.0) throw ConfigError("apex start needs h0 < 0");
    return HomotheticOrbit::synthetic(*cfg.synthetic_b, cfg.synthetic_spectrum, cfg.h0, r0);
  }
  auto [sys, guess] = resolve_system(cfg);
  CcOptions o;
  o.tol = cfg.tol_cc;
  const CentralConfiguration cc = find_cc(sys, guess, o);
  if (cfg.start == "explicit") {
    if (!cfg.r0 || !cfg.v0) throw ConfigError("explicit start needs r0 and v0");
    return HomotheticOrbit::with_start(cc, cfg.h0, *cfg.r0, *cfg.v0);
  }
  if (apex) return HomotheticOrbit::apex(cc, cfg.h0);
  return HomotheticOrbit::from_radius(cc, cfg.h0, cfg.r0.value_or(1.0));
}

std::vector<double> resolve_t_grid(const RunConfig& cfg, const HomotheticOrbit& orbit) {
  if (!cfg.t_grid.empty()) return cfg.t_grid;
  const double tplus = orbit_collision_time(orbit.radial, cfg.tol_ode);
  std::vector<double> out;
  for (double f : cfg.t_fractions) out.push_back(f * tplus);
  return out;
}

}  // namespace hmorse::io
