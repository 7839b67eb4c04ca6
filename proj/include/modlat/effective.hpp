#pragma once

#include <string>
#include <vector>

#include "modlat/lattice.hpp"

namespace modlat {

// Stationary surrogate for the driven system in the rotating frame: uniform
// mean interaction, per-link renormalized tunneling, and a provenance record
// of which averaging rule produced each link.
struct EffectiveModel {
  BoseHubbardParams params;
  std::vector<std::string> provenance;  // one entry per link
};

// Single-occupancy rule set, one drive tone per distinct nonzero |offset|:
// a flat link keeps the DC half of the drive (J/2), an offset link keeps one
// rotating sideband of one tone (J/(4M)). Site energies come out flat.
EffectiveModel build_effective_single(const LatticeSpec& spec, const TunnelingFit& fit);

// Two-site doubly-occupiable lattice driven at the pair resonance
// alpha = offset - mean_u: site 2 sits at the interaction energy, tunneling
// drops to J/4. Any other drive frequency is refused (the mapping is only
// valid on resonance).
EffectiveModel build_effective_two_site(const LatticeSpec& spec, const TunnelingFit& fit,
                                        double mean_u, double alpha);

struct ResonanceSet {
  std::vector<double> frequencies;  // candidate drive frequencies, E_r
  int dominant_index = -1;          // expected strongest response, -1 if unranked
  bool heuristic = false;           // true beyond the two-site derivation
};

// Candidate drive frequencies for restoring transport across the first link:
// the bare offset always; additionally |offset - mean_u| when double
// occupancy participates (that one dominates).
ResonanceSet resonance_frequencies(const LatticeSpec& spec, double mean_u, int n_max);

}  // namespace modlat
