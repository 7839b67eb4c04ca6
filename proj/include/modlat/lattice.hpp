#pragma once

#include <string>
#include <vector>

#include "modlat/errors.hpp"

namespace modlat {

// Geometry and atomic constants of the 1D lattice plus its static site offsets.
// Energies are expressed in recoil units (E_r = 1) and lengths in units of the
// lattice spacing; the SI fields only matter through the a_s / a_l ratio and
// for converting results back to laboratory units.
struct LatticeSpec {
  int n_sites = 5;
  double lattice_spacing = 640e-9;    // m
  double scattering_length = 5.2e-9;  // m (87Rb)
  double atom_mass = 1.44316060e-25;  // kg (87Rb)
  double v_perp = 50.0;               // transverse confinement depth, E_r
  double v_min = 15.0;                // operating depth, E_r
  double v_max = 50.0;                // clamp depth for modulation, E_r
  // Static site-to-site offsets. Provide either `delta` (n_sites-1 link
  // offsets; site energies are their cumulative sums, site 1 at zero) or
  // `v_ext_site` (n_sites absolute offsets). Both empty means a flat lattice.
  std::vector<double> delta;
  std::vector<double> v_ext_site;

  double as_over_al() const { return scattering_length / lattice_spacing; }
  // Per-site static offsets in E_r (size n_sites).
  std::vector<double> site_offsets() const;
  // Link offsets delta_j = offset[j] - offset[j-1] (size n_sites - 1).
  std::vector<double> link_offsets() const;
  void validate() const;                     // throws ConfigError
  std::vector<std::string> warnings() const; // soft regime checks
};

// E_r in Joules, for display only.
double recoil_energy_si(const LatticeSpec& spec);

// omega_j(V) = 2 sqrt(V) + static offset of `site` (0-based). E_r units.
double site_energy(const LatticeSpec& spec, double depth, int site);

// U(V) = sqrt(8 pi) (a_s/a_l) sqrt(v_perp) V^(1/4). E_r units.
double onsite_interaction(const LatticeSpec& spec, double depth);

// |J(V)|: nearest-neighbour matrix element of the single-particle Hamiltonian
// between Gaussian ground states of adjacent wells (harmonic well width),
// evaluated by adaptive quadrature to 1e-8 relative accuracy.
double tunneling(const LatticeSpec& spec, double depth);

// Exponential model J(V) ~= j_max * exp(-beta (V - v_min)) fitted on
// [v_min, v_max]. j_max is the quadrature J at v_min; beta is the
// least-squares slope of ln J vs V on a uniform grid; max_rel_residual is the
// largest relative deviation of the model from the quadrature values and is
// reported, not enforced (large values flag ansatz strain, the pipeline still
// needs the fitted scale to build drive waveforms).
struct TunnelingFit {
  double j_max = 0.0;
  double beta = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
  double max_rel_residual = 0.0;
  int grid_points = 0;
};

TunnelingFit fit_tunneling(const LatticeSpec& spec, int grid_points = 36);

double fitted_tunneling(const TunnelingFit& fit, double depth);

// Site-resolved Bose-Hubbard coefficients at one depth.
struct BoseHubbardParams {
  int n_sites = 0;
  double depth = 0.0;
  std::vector<double> omega;  // size n_sites
  std::vector<double> u;      // size n_sites
  std::vector<double> j;      // size n_sites - 1, all positive
};

// exact_tunneling = false uses the fitted exponential (fit required);
// exact_tunneling = true evaluates the overlap quadrature at `depth`.
BoseHubbardParams params_at_depth(const LatticeSpec& spec, const TunnelingFit* fit, double depth,
                                  bool exact_tunneling = false);

// Removes the site-uniform 2 sqrt(V) part of omega; link differences are
// unchanged. Currents are invariant under this shift, integration is cheaper.
BoseHubbardParams gauge_out_uniform(BoseHubbardParams params);

}  // namespace modlat
