#pragma once

#include <vector>

#include "modlat/lattice.hpp"

namespace modlat {

enum class DriveKind { none, polychromatic, monochromatic };

// Depth waveform V(t) = v_min - (1/beta) ln f(t), where f(t) is a mean of
// cos^2 terms clamped below at exp(-beta (v_max - v_min)). The clamp lives in
// tunneling space, so depth_at never exceeds v_max and
// j_max * tunneling_factor(t) == fitted J(depth_at(t)) holds as an identity.
struct ModulationScheme {
  DriveKind kind = DriveKind::none;
  std::vector<double> frequencies;  // unique nonzero drive frequencies, E_r
  std::vector<double> phases;       // per-frequency offsets, radians
  double v_min = 15.0;
  double v_max = 50.0;
  double beta = 0.0;                // 1/E_r, from TunnelingFit

  int n_terms() const { return static_cast<int>(frequencies.size()); }
  void validate() const;
};

// Distinct nonzero |offset| values (tolerance 1e-9), ascending. Their count
// is the M used by both the drive and the effective tunneling rules.
std::vector<double> unique_drive_magnitudes(const std::vector<double>& link_offsets);

ModulationScheme make_unmodulated(double v_min);

// Builds the drive from the lattice's link offsets: one cos^2 term per
// distinct nonzero |offset| (tolerance 1e-9). Offsets must sit on the 1e-3
// grid so the common period is exact.
ModulationScheme make_polychromatic(const std::vector<double>& link_offsets, double v_min,
                                    double v_max, double beta,
                                    const std::vector<double>& phases = {});

// Single-frequency drive at |alpha|; |alpha| < 1e-12 degenerates to the
// unmodulated scheme (constant depth v_min).
ModulationScheme make_monochromatic(double alpha, double v_min, double v_max, double beta);

// J(t)/J_max in [floor, 1]; kind none returns 1.
double tunneling_factor(const ModulationScheme& s, double t);

// V(t) in [v_min, v_max]; kind none returns v_min.
double depth_at(const ModulationScheme& s, double t);

// U(V(t)).
double interaction_at(const ModulationScheme& s, const LatticeSpec& spec, double t);

// Time average of interaction_at over one common period (relative tolerance
// 1e-6); constant schemes return U(v_min) exactly.
double mean_interaction(const ModulationScheme& s, const LatticeSpec& spec);

// Exact common period of the waveform; 0 for a constant scheme.
double common_period(const ModulationScheme& s);

// Largest drive frequency; 0 for a constant scheme.
double fastest_frequency(const ModulationScheme& s);

}  // namespace modlat
