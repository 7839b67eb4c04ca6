#include "modlat/effective.hpp"

#include <cmath>
#include <cstdio>

#include "modlat/errors.hpp"
#include "modlat/modulation.hpp"

namespace modlat {

EffectiveModel build_effective_single(const LatticeSpec& spec, const TunnelingFit& fit) {
  spec.validate();
  const auto offsets = spec.link_offsets();
  const auto mags = unique_drive_magnitudes(offsets);
  if (mags.empty())
    throw ConfigError("build_effective_single: every link offset is zero, nothing to drive");
  const int m = static_cast<int>(mags.size());

  EffectiveModel model;
  model.params.n_sites = spec.n_sites;
  model.params.depth = spec.v_min;
  model.params.omega.assign(static_cast<std::size_t>(spec.n_sites), 0.0);
  const double mean_u =
      mean_interaction(make_polychromatic(offsets, spec.v_min, spec.v_max, fit.beta), spec);
  model.params.u.assign(static_cast<std::size_t>(spec.n_sites), mean_u);

  char note[96];
  for (double off : offsets) {
    if (std::abs(off) < 1e-9) {
      model.params.j.push_back(fit.j_max / 2.0);
      std::snprintf(note, sizeof note, "flat link: J/2");
    } else {
      model.params.j.push_back(fit.j_max / (4.0 * m));
      std::snprintf(note, sizeof note, "offset %.6g: J/(4M), M=%d", off, m);
    }
    model.provenance.emplace_back(note);
  }
  return model;
}

EffectiveModel build_effective_two_site(const LatticeSpec& spec, const TunnelingFit& fit,
                                        double mean_u, double alpha) {
  spec.validate();
  if (spec.n_sites != 2)
    throw ConfigError("build_effective_two_site: exactly two sites required");
  const double offset = spec.link_offsets()[0];
  const double resonant = offset - mean_u;
  if (std::abs(std::abs(alpha) - std::abs(resonant)) > 1e-6) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "build_effective_two_site: drive %.9g is off the pair resonance %.9g",
                  alpha, resonant);
    throw PhysicsError(msg);
  }

  EffectiveModel model;
  model.params.n_sites = 2;
  model.params.depth = spec.v_min;
  model.params.omega = {0.0, mean_u};
  model.params.u = {mean_u, mean_u};
  model.params.j = {fit.j_max / 4.0};
  char note[96];
  std::snprintf(note, sizeof note, "pair resonance at %.6g: J/4, site-2 energy %.6g", resonant,
                mean_u);
  model.provenance.emplace_back(note);
  return model;
}

ResonanceSet resonance_frequencies(const LatticeSpec& spec, double mean_u, int n_max) {
  spec.validate();
  const auto offsets = spec.link_offsets();
  ResonanceSet set;
  if (spec.n_sites == 2) {
    const double offset = std::abs(offsets[0]);
    set.frequencies.push_back(offset);
    if (n_max >= 2) {
      set.frequencies.push_back(std::abs(offsets[0] - mean_u));
      set.dominant_index = 1;
    } else {
      set.dominant_index = 0;
    }
    return set;
  }
  set.heuristic = true;
  for (double mag : unique_drive_magnitudes(offsets)) {
    set.frequencies.push_back(mag);
    if (n_max >= 2) set.frequencies.push_back(std::abs(mag - mean_u));
  }
  return set;
}

}  // namespace modlat
