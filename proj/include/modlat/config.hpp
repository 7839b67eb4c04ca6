#pragma once

#include <string>
#include <vector>

#include "modlat/lattice.hpp"
#include "modlat/lindblad.hpp"
#include "modlat/modulation.hpp"

namespace modlat {

// One JSON document drives every subcommand. Energies are in recoil units,
// rates in recoil units over hbar, times in hbar over recoil. Unknown keys
// are rejected at every level so typos fail loudly before any computation.
struct RunConfig {
  int version = 1;
  LatticeSpec lattice;
  int occupancy = 1;              // per-site particle cap
  double j_over_kappa = 15.0;     // reservoir anchor: kappa = j_max / this
  DriveKind modulation_kind = DriveKind::polychromatic;
  double alpha = 0.0;             // monochromatic drive frequency, E_r
  std::vector<double> phases;     // optional per-tone offsets, radians
  SolverOptions solver;
  std::string normalization = "ideal_flat";  // or "none"
  int n_samples = 200;            // trace sampling / parameter-grid size
  std::vector<double> sweep_vmax;   // clamp-depth sweep grid; empty = default
  std::vector<double> sweep_alpha;  // drive-frequency sweep grid; empty = default

  void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& c);

// The drive the config describes, once the tunneling fit supplies beta.
ModulationScheme scheme_from_config(const RunConfig& c, const TunnelingFit& fit);

}  // namespace modlat
