#include "modlat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "modlat/quadrature.hpp"

namespace modlat {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHbarSi = 1.054571817e-34;  // J s
}  // namespace

std::vector<double> LatticeSpec::site_offsets() const {
  std::vector<double> off(static_cast<std::size_t>(n_sites), 0.0);
  if (!v_ext_site.empty()) {
    off = v_ext_site;
  } else if (!delta.empty()) {
    for (int j = 1; j < n_sites; ++j) off[j] = off[j - 1] + delta[j - 1];
  }
  return off;
}

std::vector<double> LatticeSpec::link_offsets() const {
  if (!delta.empty()) return delta;
  std::vector<double> d(static_cast<std::size_t>(n_sites > 0 ? n_sites - 1 : 0), 0.0);
  if (!v_ext_site.empty()) {
    for (int j = 0; j + 1 < n_sites; ++j) d[j] = v_ext_site[j + 1] - v_ext_site[j];
  }
  return d;
}

void LatticeSpec::validate() const {
  if (n_sites < 2) throw ConfigError("lattice: n_sites must be at least 2");
  if (!(lattice_spacing > 0)) throw ConfigError("lattice: lattice_spacing must be positive");
  if (scattering_length < 0) throw ConfigError("lattice: scattering_length must be nonnegative");
  if (!(atom_mass > 0)) throw ConfigError("lattice: atom_mass must be positive");
  if (!(v_perp > 0)) throw ConfigError("lattice: v_perp must be positive");
  if (!(v_min > 0)) throw ConfigError("lattice: v_min must be positive");
  if (!(v_min <= v_max)) throw ConfigError("lattice: v_min must not exceed v_max");
  if (!delta.empty() && !v_ext_site.empty())
    throw ConfigError("lattice: delta and v_ext_site are mutually exclusive");
  if (!delta.empty() && delta.size() != static_cast<std::size_t>(n_sites - 1))
    throw ConfigError("lattice: delta must have n_sites - 1 entries");
  if (!v_ext_site.empty() && v_ext_site.size() != static_cast<std::size_t>(n_sites))
    throw ConfigError("lattice: v_ext_site must have n_sites entries");
  for (double d : delta)
    if (!std::isfinite(d)) throw ConfigError("lattice: delta entries must be finite");
  for (double v : v_ext_site)
    if (!std::isfinite(v)) throw ConfigError("lattice: v_ext_site entries must be finite");
}

std::vector<std::string> LatticeSpec::warnings() const {
  std::vector<std::string> out;
  const auto d = link_offsets();
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (std::abs(d[j]) >= v_min / 10.0) {
      out.push_back("link " + std::to_string(j + 1) + ": |offset| = " + std::to_string(std::abs(d[j])) +
                    " E_r is not small against v_min/10; the tight-binding picture degrades");
    }
  }
  return out;
}

double recoil_energy_si(const LatticeSpec& spec) {
  return kHbarSi * kHbarSi * kPi * kPi / (2.0 * spec.atom_mass * spec.lattice_spacing * spec.lattice_spacing);
}

double site_energy(const LatticeSpec& spec, double depth, int site) {
  if (site < 0 || site >= spec.n_sites) throw PhysicsError("site_energy: site index out of range");
  if (!(depth > 0)) throw PhysicsError("site_energy: depth must be positive");
  return 2.0 * std::sqrt(depth) + spec.site_offsets()[static_cast<std::size_t>(site)];
}

double onsite_interaction(const LatticeSpec& spec, double depth) {
  if (!(depth > 0)) throw PhysicsError("onsite_interaction: depth must be positive");
  return std::sqrt(8.0 * kPi) * spec.as_over_al() * std::sqrt(spec.v_perp) * std::pow(depth, 0.25);
}

double tunneling(const LatticeSpec&, double depth) {
  // In recoil units with unit lattice spacing the link integral depends on
  // the depth alone; the LatticeSpec argument keeps the parameter-engine
  // call shape uniform.
  if (!(depth >= 2.0)) throw PhysicsError("tunneling: depth must be at least 2 E_r");
  // Units: hbar = E_r = 1, lengths in lattice spacings, so m = pi^2 / 2 and
  // the harmonic well width obeys sigma^2 = 1 / (pi^2 sqrt(V)).
  const double s = 1.0 / (kPi * kPi * std::sqrt(depth));
  const double sigma = std::sqrt(s);
  const double norm = 1.0 / std::sqrt(std::sqrt(kPi * s));  // (pi s)^(-1/4)
  const auto psi = [&](double x, double center) {
    const double u = x - center;
    return norm * std::exp(-u * u / (2.0 * s));
  };
  // Wells at x = 0 and x = 1. Kinetic part: -(1/(2m)) psi_b'' with
  // psi_b'' = psi_b ((x-1)^2/s^2 - 1/s); potential part uses the depth term
  // of the lattice potential only (static offsets shift sites, not links).
  const auto integrand = [&](double x) {
    const double pa = psi(x, 0.0);
    const double pb = psi(x, 1.0);
    const double u = x - 1.0;
    const double kinetic = -(1.0 / (kPi * kPi)) * (u * u / (s * s) - 1.0 / s);
    const double sinpx = std::sin(kPi * x);
    const double potential = depth * sinpx * sinpx;
    return pa * pb * (kinetic + potential);
  };
  const double a = -5.0 * sigma, b = 1.0 + 5.0 * sigma;
  const double j = integrate_adaptive(integrand, a, b, 1e-8, 1e-300, 64);
  if (!std::isfinite(j)) throw SolverError("tunneling: quadrature failed");
  return std::abs(j);
}

TunnelingFit fit_tunneling(const LatticeSpec& spec, int grid_points) {
  if (!(spec.v_min < spec.v_max)) throw PhysicsError("fit_tunneling: degenerate fit window");
  const int n = std::max(grid_points, 30);
  std::vector<double> v(static_cast<std::size_t>(n)), lnj(static_cast<std::size_t>(n));
  std::vector<double> jq(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[i] = spec.v_min + (spec.v_max - spec.v_min) * static_cast<double>(i) / (n - 1);
    jq[i] = tunneling(spec, v[i]);
    if (!(jq[i] > 0) || !std::isfinite(jq[i]))
      throw SolverError("fit_tunneling: nonpositive tunneling value on the grid");
    lnj[i] = std::log(jq[i]);
  }
  TunnelingFit fit;
  fit.v_min = spec.v_min;
  fit.v_max = spec.v_max;
  fit.grid_points = n;
  double sv = 0, sl = 0, svv = 0, svl = 0;
  for (int i = 0; i < n; ++i) {
    sv += v[i];
    sl += lnj[i];
    svv += v[i] * v[i];
    svl += v[i] * lnj[i];
  }
  const double denom = n * svv - sv * sv;
  fit.beta = -(n * svl - sv * sl) / denom;
  fit.j_max = jq[0];  // anchored at the operating depth
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double model = fit.j_max * std::exp(-fit.beta * (v[i] - spec.v_min));
    worst = std::max(worst, std::abs(model - jq[i]) / jq[i]);
  }
  fit.max_rel_residual = worst;
  return fit;
}

double fitted_tunneling(const TunnelingFit& fit, double depth) {
  return fit.j_max * std::exp(-fit.beta * (depth - fit.v_min));
}

BoseHubbardParams params_at_depth(const LatticeSpec& spec, const TunnelingFit* fit, double depth,
                                  bool exact_tunneling) {
  if (!(depth > 0)) throw PhysicsError("params_at_depth: depth must be positive");
  if (!exact_tunneling && fit == nullptr)
    throw PhysicsError("params_at_depth: need a tunneling fit or exact_tunneling = true");
  BoseHubbardParams p;
  p.n_sites = spec.n_sites;
  p.depth = depth;
  const auto off = spec.site_offsets();
  p.omega.resize(off.size());
  p.u.assign(off.size(), onsite_interaction(spec, depth));
  for (std::size_t k = 0; k < off.size(); ++k) p.omega[k] = 2.0 * std::sqrt(depth) + off[k];
  const double j = exact_tunneling ? tunneling(spec, depth) : fitted_tunneling(*fit, depth);
  p.j.assign(static_cast<std::size_t>(spec.n_sites - 1), j);
  return p;
}

BoseHubbardParams gauge_out_uniform(BoseHubbardParams params) {
  const double shift = 2.0 * std::sqrt(params.depth);
  for (double& w : params.omega) w -= shift;
  return params;
}

}  // namespace modlat
