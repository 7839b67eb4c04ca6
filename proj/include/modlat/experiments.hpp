#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "modlat/config.hpp"
#include "modlat/effective.hpp"
#include "modlat/lindblad.hpp"

namespace modlat {

// Steady-current bookkeeping for one lattice: the undriven suppressed
// current, the driven period-averaged current, the flat ideal baseline
// (uniform tunneling j_max, same reservoirs), and, where a rule applies, the
// effective stationary model's current.
struct GainReport {
  std::string label;
  double i_stationary = 0.0;
  double i_modulated = 0.0;
  double i_ideal = 0.0;
  double i_effective = 0.0;
  double gain = 0.0;               // i_modulated / i_stationary, guarded
  double percent_recovered = 0.0;  // fraction i_modulated / i_ideal
  double heff_percent_error = 0.0;
  bool effective_valid = false;
};

DrivenSystem modulated_system(const RunConfig& c, const TunnelingFit& fit);
DrivenSystem undriven_system(const RunConfig& c, const TunnelingFit& fit);
DrivenSystem ideal_flat_system(const RunConfig& c, const TunnelingFit& fit);

// Full study of the configured lattice; log receives progress lines.
GainReport gain_study(const RunConfig& c, std::ostream& log);

// One clamp-depth sweep point: steady current with the drive clamped at
// vmax_clamp instead of the lattice's own v_max.
double vmax_sweep_point(const RunConfig& c, const TunnelingFit& fit, double vmax_clamp);

// One drive-frequency sweep point for the two-site doubly-occupiable study.
double alpha_sweep_point(const RunConfig& c, const TunnelingFit& fit, double alpha);

// Subcommand bodies. Each writes CSV artifacts under out_dir (created if
// missing) and human-readable progress to log; failures throw.
void run_params(const RunConfig& c, const std::string& out_dir, std::ostream& log);
void run_steady(const RunConfig& c, const std::string& out_dir, std::ostream& log);
void run_evolve(const RunConfig& c, const std::string& out_dir, std::ostream& log);
void run_table1(const RunConfig& c, const std::string& out_dir, std::ostream& log);
void run_sweep_vmax(const RunConfig& c, const std::string& out_dir, std::ostream& log);
void run_sweep_alpha(const RunConfig& c, const std::string& out_dir, std::ostream& log);

// Table rows studied by run_table1: per-link offset lists.
const std::vector<std::vector<double>>& table1_offset_rows();

// Worker count for sweep parallelism: MODLAT_WORKERS, else hardware threads.
int worker_count();

}  // namespace modlat
