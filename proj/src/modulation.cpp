#include "modlat/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "modlat/errors.hpp"
#include "modlat/quadrature.hpp"

namespace modlat {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Frequencies are carried as exact multiples of 1e-3 E_r so the common
// period reduces to an integer gcd.
long long to_milli_units(double freq) {
  const double scaled = freq * 1000.0;
  const long long m = std::llround(scaled);
  if (m <= 0 || std::abs(scaled - static_cast<double>(m)) > 1e-6)
    throw ConfigError("drive frequency is not a positive multiple of 1e-3");
  return m;
}

}  // namespace

void ModulationScheme::validate() const {
  if (kind == DriveKind::none) return;
  if (!(v_min > 0.0)) throw ConfigError("v_min must be positive");
  if (!(v_max >= v_min)) throw ConfigError("v_max must be >= v_min");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (frequencies.empty()) throw ConfigError("modulated scheme needs at least one frequency");
  if (phases.size() != frequencies.size())
    throw ConfigError("phase list length does not match frequency list");
  for (double f : frequencies)
    if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("drive frequencies must be positive");
}

ModulationScheme make_unmodulated(double v_min) {
  ModulationScheme s;
  s.kind = DriveKind::none;
  s.v_min = v_min;
  s.v_max = v_min;
  return s;
}

std::vector<double> unique_drive_magnitudes(const std::vector<double>& link_offsets) {
  std::vector<double> mags;
  for (double d : link_offsets) {
    const double m = std::abs(d);
    if (m < 1e-9) continue;
    bool seen = false;
    for (double known : mags)
      if (std::abs(known - m) < 1e-9) {
        seen = true;
        break;
      }
    if (!seen) mags.push_back(m);
  }
  std::sort(mags.begin(), mags.end());
  return mags;
}

ModulationScheme make_polychromatic(const std::vector<double>& link_offsets, double v_min,
                                    double v_max, double beta,
                                    const std::vector<double>& phases) {
  std::vector<double> mags = unique_drive_magnitudes(link_offsets);
  if (mags.empty())
    throw ConfigError("modulation requested but every link offset is zero");

  ModulationScheme s;
  s.kind = DriveKind::polychromatic;
  s.frequencies = std::move(mags);
  s.phases = phases.empty() ? std::vector<double>(s.frequencies.size(), 0.0) : phases;
  s.v_min = v_min;
  s.v_max = v_max;
  s.beta = beta;
  s.validate();
  for (double f : s.frequencies) to_milli_units(f);
  return s;
}

ModulationScheme make_monochromatic(double alpha, double v_min, double v_max, double beta) {
  const double mag = std::abs(alpha);
  if (mag < 1e-12) return make_unmodulated(v_min);
  ModulationScheme s;
  s.kind = DriveKind::monochromatic;
  s.frequencies = {mag};
  s.phases = {0.0};
  s.v_min = v_min;
  s.v_max = v_max;
  s.beta = beta;
  s.validate();
  return s;
}

double tunneling_factor(const ModulationScheme& s, double t) {
  if (s.kind == DriveKind::none) return 1.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
    const double c = std::cos(0.5 * (s.frequencies[k] * t + s.phases[k]));
    sum += c * c;
  }
  const double raw = sum / static_cast<double>(s.frequencies.size());
  const double floor = std::exp(-s.beta * (s.v_max - s.v_min));
  return std::max(raw, floor);
}

double depth_at(const ModulationScheme& s, double t) {
  if (s.kind == DriveKind::none) return s.v_min;
  return s.v_min - std::log(tunneling_factor(s, t)) / s.beta;
}

double interaction_at(const ModulationScheme& s, const LatticeSpec& spec, double t) {
  return onsite_interaction(spec, depth_at(s, t));
}

double mean_interaction(const ModulationScheme& s, const LatticeSpec& spec) {
  if (s.kind == DriveKind::none || s.v_max == s.v_min)
    return onsite_interaction(spec, s.v_min);
  const double period = common_period(s);
  const double integral = integrate_adaptive(
      [&](double t) { return interaction_at(s, spec, t); }, 0.0, period, 1e-6);
  return integral / period;
}

double common_period(const ModulationScheme& s) {
  switch (s.kind) {
    case DriveKind::none:
      return 0.0;
    case DriveKind::monochromatic:
      return 2.0 * kPi / s.frequencies[0];
    case DriveKind::polychromatic: {
      long long g = 0;
      for (double f : s.frequencies) g = std::gcd(g, to_milli_units(f));
      return 2.0 * kPi / (static_cast<double>(g) * 1e-3);
    }
  }
  throw ConfigError("unknown drive kind");
}

double fastest_frequency(const ModulationScheme& s) {
  if (s.kind == DriveKind::none) return 0.0;
  return *std::max_element(s.frequencies.begin(), s.frequencies.end());
}

}  // namespace modlat
