#include "modlat/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace modlat {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(std::string("unknown key \"") + item.key() + "\" in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T dflt) {
  if (!j.contains(key)) return dflt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value type for \"") + key + "\"");
  }
}

std::vector<double> get_list(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  try {
    return j.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("\"") + key + "\" must be a list of numbers");
  }
}

DriveKind kind_from_string(const std::string& s) {
  if (s == "none") return DriveKind::none;
  if (s == "polychromatic") return DriveKind::polychromatic;
  if (s == "monochromatic") return DriveKind::monochromatic;
  throw ConfigError("modulation.kind must be none, polychromatic, or monochromatic");
}

const char* kind_to_string(DriveKind k) {
  switch (k) {
    case DriveKind::none: return "none";
    case DriveKind::polychromatic: return "polychromatic";
    case DriveKind::monochromatic: return "monochromatic";
  }
  throw ConfigError("unknown drive kind");
}

SteadyMethod method_from_string(const std::string& s) {
  if (s == "floquet") return SteadyMethod::floquet;
  if (s == "protocol") return SteadyMethod::protocol;
  throw ConfigError("solver.steady_method must be floquet or protocol");
}

const char* method_to_string(SteadyMethod m) {
  return m == SteadyMethod::floquet ? "floquet" : "protocol";
}

}  // namespace

void RunConfig::validate() const {
  if (version != 1) throw ConfigError("unsupported config version");
  lattice.validate();
  if (occupancy < 1 || occupancy > 6) throw ConfigError("occupancy must be in [1, 6]");
  if (!(j_over_kappa > 0.0)) throw ConfigError("reservoirs.j_over_kappa must be positive");
  if (!(solver.rel_tol > 0.0) || !(solver.abs_tol > 0.0))
    throw ConfigError("solver tolerances must be positive");
  if (!(solver.floquet_rel_tol > 0.0))
    throw ConfigError("solver.floquet_rel_tol must be positive");
  if (!(solver.t_max_in_kappa_units > 0.0))
    throw ConfigError("solver.t_max_in_kappa_units must be positive");
  if (!(solver.steady_tol > 0.0)) throw ConfigError("solver.steady_tol must be positive");
  if (solver.steady_consecutive < 1)
    throw ConfigError("solver.steady_consecutive must be at least 1");
  if (normalization != "ideal_flat" && normalization != "none")
    throw ConfigError("outputs.normalization must be ideal_flat or none");
  if (n_samples < 1) throw ConfigError("outputs.n_samples must be at least 1");
  if (modulation_kind == DriveKind::polychromatic) {
    for (double d : lattice.link_offsets()) {
      const double scaled = std::abs(d) * 1000.0;
      if (std::abs(scaled - std::llround(scaled)) > 1e-6)
        throw ConfigError("polychromatic drive needs offsets on the 1e-3 energy grid");
    }
  }
  if (modulation_kind == DriveKind::monochromatic && !(alpha >= 0.0))
    throw ConfigError("modulation.alpha must be nonnegative");
  for (double v : sweep_vmax)
    if (!(v > lattice.v_min)) throw ConfigError("sweep.vmax_values must exceed v_min");
  for (double a : sweep_alpha)
    if (!(a >= 0.0) || !std::isfinite(a))
      throw ConfigError("sweep.alpha_values must be nonnegative");
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j, {"version", "lattice", "occupancy", "reservoirs", "modulation", "solver",
                 "outputs", "sweep"},
             "config root");

  RunConfig c;
  c.version = get_or<int>(j, "version", 1);

  if (j.contains("lattice")) {
    const json& l = j.at("lattice");
    check_keys(l,
               {"n_sites", "lattice_spacing", "scattering_length", "atom_mass", "v_perp",
                "v_min", "v_max", "delta", "v_ext_site"},
               "lattice");
    c.lattice.n_sites = get_or<int>(l, "n_sites", c.lattice.n_sites);
    c.lattice.lattice_spacing = get_or<double>(l, "lattice_spacing", c.lattice.lattice_spacing);
    c.lattice.scattering_length =
        get_or<double>(l, "scattering_length", c.lattice.scattering_length);
    c.lattice.atom_mass = get_or<double>(l, "atom_mass", c.lattice.atom_mass);
    c.lattice.v_perp = get_or<double>(l, "v_perp", c.lattice.v_perp);
    c.lattice.v_min = get_or<double>(l, "v_min", c.lattice.v_min);
    c.lattice.v_max = get_or<double>(l, "v_max", c.lattice.v_max);
    c.lattice.delta = get_list(l, "delta");
    c.lattice.v_ext_site = get_list(l, "v_ext_site");
  }

  c.occupancy = get_or<int>(j, "occupancy", 1);

  if (j.contains("reservoirs")) {
    const json& r = j.at("reservoirs");
    check_keys(r, {"j_over_kappa"}, "reservoirs");
    c.j_over_kappa = get_or<double>(r, "j_over_kappa", 15.0);
  }

  if (j.contains("modulation")) {
    const json& m = j.at("modulation");
    check_keys(m, {"kind", "alpha", "phases"}, "modulation");
    c.modulation_kind = kind_from_string(get_or<std::string>(m, "kind", "polychromatic"));
    c.alpha = get_or<double>(m, "alpha", 0.0);
    c.phases = get_list(m, "phases");
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s,
               {"t_max_in_kappa_units", "rel_tol", "abs_tol", "floquet_rel_tol", "steady_tol",
                "steady_consecutive", "steady_method"},
               "solver");
    c.solver.t_max_in_kappa_units =
        get_or<double>(s, "t_max_in_kappa_units", c.solver.t_max_in_kappa_units);
    c.solver.rel_tol = get_or<double>(s, "rel_tol", c.solver.rel_tol);
    c.solver.abs_tol = get_or<double>(s, "abs_tol", c.solver.abs_tol);
    c.solver.floquet_rel_tol = get_or<double>(s, "floquet_rel_tol", c.solver.floquet_rel_tol);
    c.solver.steady_tol = get_or<double>(s, "steady_tol", c.solver.steady_tol);
    c.solver.steady_consecutive =
        get_or<int>(s, "steady_consecutive", c.solver.steady_consecutive);
    c.solver.method = method_from_string(get_or<std::string>(s, "steady_method", "floquet"));
  }

  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    check_keys(o, {"normalization", "n_samples"}, "outputs");
    c.normalization = get_or<std::string>(o, "normalization", "ideal_flat");
    c.n_samples = get_or<int>(o, "n_samples", 200);
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"vmax_values", "alpha_values"}, "sweep");
    c.sweep_vmax = get_list(s, "vmax_values");
    c.sweep_alpha = get_list(s, "alpha_values");
  }

  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["version"] = c.version;
  json l;
  l["n_sites"] = c.lattice.n_sites;
  l["lattice_spacing"] = c.lattice.lattice_spacing;
  l["scattering_length"] = c.lattice.scattering_length;
  l["atom_mass"] = c.lattice.atom_mass;
  l["v_perp"] = c.lattice.v_perp;
  l["v_min"] = c.lattice.v_min;
  l["v_max"] = c.lattice.v_max;
  if (!c.lattice.delta.empty()) l["delta"] = c.lattice.delta;
  if (!c.lattice.v_ext_site.empty()) l["v_ext_site"] = c.lattice.v_ext_site;
  j["lattice"] = l;
  j["occupancy"] = c.occupancy;
  j["reservoirs"] = {{"j_over_kappa", c.j_over_kappa}};
  json m;
  m["kind"] = kind_to_string(c.modulation_kind);
  if (c.modulation_kind == DriveKind::monochromatic) m["alpha"] = c.alpha;
  if (!c.phases.empty()) m["phases"] = c.phases;
  j["modulation"] = m;
  j["solver"] = {{"t_max_in_kappa_units", c.solver.t_max_in_kappa_units},
                 {"rel_tol", c.solver.rel_tol},
                 {"abs_tol", c.solver.abs_tol},
                 {"floquet_rel_tol", c.solver.floquet_rel_tol},
                 {"steady_tol", c.solver.steady_tol},
                 {"steady_consecutive", c.solver.steady_consecutive},
                 {"steady_method", method_to_string(c.solver.method)}};
  j["outputs"] = {{"normalization", c.normalization}, {"n_samples", c.n_samples}};
  if (!c.sweep_vmax.empty() || !c.sweep_alpha.empty()) {
    json s;
    if (!c.sweep_vmax.empty()) s["vmax_values"] = c.sweep_vmax;
    if (!c.sweep_alpha.empty()) s["alpha_values"] = c.sweep_alpha;
    j["sweep"] = s;
  }
  return j.dump(2) + "\n";
}

ModulationScheme scheme_from_config(const RunConfig& c, const TunnelingFit& fit) {
  switch (c.modulation_kind) {
    case DriveKind::none:
      return make_unmodulated(c.lattice.v_min);
    case DriveKind::polychromatic:
      return make_polychromatic(c.lattice.link_offsets(), c.lattice.v_min, c.lattice.v_max,
                                fit.beta, c.phases);
    case DriveKind::monochromatic:
      return make_monochromatic(c.alpha, c.lattice.v_min, c.lattice.v_max, fit.beta);
  }
  throw ConfigError("unknown drive kind");
}

}  // namespace modlat
