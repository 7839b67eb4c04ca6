#include "modlat/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace modlat {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string offsets_label(const std::vector<double>& offsets) {
  std::string s = "[";
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (i) s += ";";
    s += fmt(offsets[i]);
  }
  return s + "]";
}

std::ofstream open_csv(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/" + name;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  return f;
}

// Runs f(i) for i in [0, n) on worker_count() threads; exceptions are
// collected and the first one rethrown after all workers join.
template <class F>
void parallel_for(int n, F&& f) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

LatticeSpec flattened(const LatticeSpec& spec) {
  LatticeSpec flat = spec;
  flat.delta.clear();
  flat.v_ext_site.clear();
  return flat;
}

double guarded_ratio(double num, double den) {
  if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("MODLAT_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

const std::vector<std::vector<double>>& table1_offset_rows() {
  static const std::vector<std::vector<double>> rows = {
      {0.0, 0.1, 0.0, 0.0},
      {0.2, 0.0, -0.2, 0.0},
      {0.0, 0.1, 0.3, -0.3},
      {-0.1, 0.3, -0.4, 0.2},
  };
  return rows;
}

DrivenSystem modulated_system(const RunConfig& c, const TunnelingFit& fit) {
  return make_driven_system(c.lattice, scheme_from_config(c, fit), c.occupancy, c.j_over_kappa,
                            fit);
}

DrivenSystem undriven_system(const RunConfig& c, const TunnelingFit& fit) {
  return make_driven_system(c.lattice, make_unmodulated(c.lattice.v_min), c.occupancy,
                            c.j_over_kappa, fit);
}

DrivenSystem ideal_flat_system(const RunConfig& c, const TunnelingFit& fit) {
  return make_driven_system(flattened(c.lattice), make_unmodulated(c.lattice.v_min), c.occupancy,
                            c.j_over_kappa, fit);
}

GainReport gain_study(const RunConfig& c, std::ostream& log) {
  const TunnelingFit fit = fit_tunneling(c.lattice);
  GainReport r;
  r.label = offsets_label(c.lattice.link_offsets());

  r.i_ideal = steady_current(ideal_flat_system(c, fit), c.solver);
  r.i_stationary = steady_current(undriven_system(c, fit), c.solver);
  if (c.modulation_kind == DriveKind::none) {
    r.i_modulated = r.i_stationary;
  } else {
    r.i_modulated = steady_current(modulated_system(c, fit), c.solver);
  }
  r.gain = guarded_ratio(r.i_modulated, r.i_stationary);
  r.percent_recovered = guarded_ratio(r.i_modulated, r.i_ideal);

  if (c.modulation_kind == DriveKind::polychromatic) {
    const EffectiveModel eff = build_effective_single(c.lattice, fit);
    const double kappa = fit.j_max / c.j_over_kappa;
    const DrivenSystem eff_sys =
        make_stationary_system(eff.params, flattened(c.lattice), c.occupancy, kappa);
    r.i_effective = steady_current(eff_sys, c.solver);
    r.effective_valid = true;
  } else if (c.modulation_kind == DriveKind::monochromatic && c.lattice.n_sites == 2 &&
             c.occupancy >= 2) {
    const ModulationScheme scheme = scheme_from_config(c, fit);
    const double mean_u = mean_interaction(scheme, c.lattice);
    const double offset = c.lattice.link_offsets()[0];
    if (std::abs(c.alpha - std::abs(offset - mean_u)) <= 1e-6) {
      const EffectiveModel eff = build_effective_two_site(c.lattice, fit, mean_u, c.alpha);
      const double kappa = fit.j_max / c.j_over_kappa;
      const DrivenSystem eff_sys =
          make_stationary_system(eff.params, flattened(c.lattice), c.occupancy, kappa);
      r.i_effective = steady_current(eff_sys, c.solver);
      r.effective_valid = true;
    }
  }
  if (r.effective_valid && r.i_modulated > 0.0)
    r.heff_percent_error = 100.0 * std::abs(r.i_effective - r.i_modulated) / r.i_modulated;

  log << "lattice " << r.label << ": ideal=" << fmt(r.i_ideal)
      << " stationary=" << fmt(r.i_stationary) << " modulated=" << fmt(r.i_modulated);
  if (r.effective_valid) log << " effective=" << fmt(r.i_effective);
  log << " gain=" << fmt(r.gain) << " recovered=" << fmt(r.percent_recovered) << "\n";
  return r;
}

double vmax_sweep_point(const RunConfig& c, const TunnelingFit& fit, double vmax_clamp) {
  const ModulationScheme scheme = make_polychromatic(
      c.lattice.link_offsets(), c.lattice.v_min, vmax_clamp, fit.beta, c.phases);
  const DrivenSystem sys =
      make_driven_system(c.lattice, scheme, c.occupancy, c.j_over_kappa, fit);
  return steady_current(sys, c.solver);
}

double alpha_sweep_point(const RunConfig& c, const TunnelingFit& fit, double alpha) {
  const ModulationScheme scheme =
      make_monochromatic(alpha, c.lattice.v_min, c.lattice.v_max, fit.beta);
  const DrivenSystem sys =
      make_driven_system(c.lattice, scheme, c.occupancy, c.j_over_kappa, fit);
  return steady_current(sys, c.solver);
}

void run_params(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  const TunnelingFit fit = fit_tunneling(c.lattice);
  std::ofstream csv = open_csv(out_dir, "params.csv");
  csv << "V,omega,U,J\n";
  const int n = c.n_samples;
  for (int i = 0; i < n; ++i) {
    const double v =
        n == 1 ? c.lattice.v_min
               : c.lattice.v_min + (c.lattice.v_max - c.lattice.v_min) * i / (n - 1.0);
    csv << fmt(v) << "," << fmt(site_energy(c.lattice, v, 0)) << ","
        << fmt(onsite_interaction(c.lattice, v)) << "," << fmt(tunneling(c.lattice, v)) << "\n";
  }
  log << "tunneling fit on [" << fmt(fit.v_min) << ", " << fmt(fit.v_max)
      << "]: j_max=" << fmt(fit.j_max) << " beta=" << fmt(fit.beta)
      << " max_rel_residual=" << fmt(fit.max_rel_residual) << "\n";
  log << "wrote " << out_dir << "/params.csv (" << n << " rows)\n";
}

void run_steady(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  const GainReport r = gain_study(c, log);
  std::ofstream csv = open_csv(out_dir, "steady.csv");
  csv << "delta,i_stationary,i_modulated,i_ideal,i_effective,gain,percent_recovered,"
         "heff_percent_error\n";
  csv << r.label << "," << fmt(r.i_stationary) << "," << fmt(r.i_modulated) << ","
      << fmt(r.i_ideal) << "," << (r.effective_valid ? fmt(r.i_effective) : "nan") << ","
      << fmt(r.gain) << "," << fmt(r.percent_recovered) << ","
      << (r.effective_valid ? fmt(r.heff_percent_error) : "nan") << "\n";
  log << "wrote " << out_dir << "/steady.csv\n";
}

void run_evolve(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  const TunnelingFit fit = fit_tunneling(c.lattice);
  const DrivenSystem sys = modulated_system(c, fit);
  const double t_final = c.solver.t_max_in_kappa_units / sys.reservoir.kappa;
  double norm = 1.0;
  if (c.normalization == "ideal_flat")
    norm = steady_current(ideal_flat_system(c, fit), c.solver);

  CurrentTrace trace;
  if (sys.scheme.kind == DriveKind::none) {
    trace = propagate(sys, vacuum_state(sys.basis), t_final, c.n_samples, c.solver).trace;
    trace.steady_value = steady_current(sys, c.solver);
    trace.converged = true;
  } else {
    const PeriodMap pm = build_period_map(sys, c.solver);
    const long n_periods =
        static_cast<long>(std::ceil(t_final / pm.period));
    const long stride = std::max(1L, n_periods / std::max(1, c.n_samples));
    trace = floquet_trace(pm, vacuum_state(sys.basis), n_periods, stride);
    const FloquetSteady fs = floquet_steady_current(sys, c.solver, &pm);
    trace.steady_value = fs.mean_current;
    trace.converged = true;
    log << "drive period " << fmt(pm.period) << ", " << n_periods
        << " periods, samples at period boundaries\n";
  }

  std::ofstream csv = open_csv(out_dir, "evolve_full.csv");
  csv << "t,current,current_normalized\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    csv << fmt(trace.times[i]) << "," << fmt(trace.current[i]) << ","
        << fmt(trace.current[i] / norm) << "\n";
  log << "steady current " << fmt(trace.steady_value) << " (normalized "
      << fmt(trace.steady_value / norm) << "), wrote " << out_dir << "/evolve_full.csv\n";

  if (c.modulation_kind == DriveKind::polychromatic) {
    const EffectiveModel eff = build_effective_single(c.lattice, fit);
    const DrivenSystem eff_sys =
        make_stationary_system(eff.params, flattened(c.lattice), c.occupancy,
                               fit.j_max / c.j_over_kappa);
    const int n_eff = std::min(c.n_samples, 400);
    const PropagationResult pr =
        propagate(eff_sys, vacuum_state(eff_sys.basis), t_final, n_eff, c.solver);
    std::ofstream ecsv = open_csv(out_dir, "evolve_effective.csv");
    ecsv << "t,current,current_normalized\n";
    for (std::size_t i = 0; i < pr.trace.times.size(); ++i)
      ecsv << fmt(pr.trace.times[i]) << "," << fmt(pr.trace.current[i]) << ","
           << fmt(pr.trace.current[i] / norm) << "\n";
    log << "wrote " << out_dir << "/evolve_effective.csv\n";
  }
}

void run_table1(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  const auto& rows = table1_offset_rows();
  std::vector<GainReport> reports(rows.size());
  std::vector<std::string> failures(rows.size());
  std::vector<std::string> row_logs(rows.size());

  parallel_for(static_cast<int>(rows.size()), [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    RunConfig row_config = c;
    row_config.lattice.delta = rows[k];
    row_config.lattice.v_ext_site.clear();
    row_config.modulation_kind = DriveKind::polychromatic;
    std::ostringstream row_log;
    try {
      reports[k] = gain_study(row_config, row_log);
    } catch (const std::exception& e) {
      failures[k] = e.what();
      reports[k].label = offsets_label(row_config.lattice.link_offsets());
    }
    row_logs[k] = row_log.str();
  });
  for (const std::string& s : row_logs) log << s;

  std::ofstream csv = open_csv(out_dir, "table1.csv");
  csv << "delta,i_stationary,i_modulated,i_ideal,i_effective,gain,percent_recovered,"
         "heff_percent_error\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const GainReport& r = reports[i];
    if (!failures[i].empty()) {
      log << "row " << r.label << " failed: " << failures[i] << "\n";
      csv << r.label << ",nan,nan,nan,nan,nan,nan,nan\n";
      continue;
    }
    csv << r.label << "," << fmt(r.i_stationary) << "," << fmt(r.i_modulated) << ","
        << fmt(r.i_ideal) << "," << (r.effective_valid ? fmt(r.i_effective) : "nan") << ","
        << fmt(r.gain) << "," << fmt(r.percent_recovered) << ","
        << (r.effective_valid ? fmt(r.heff_percent_error) : "nan") << "\n";
    log << "row " << r.label << ": gain=" << fmt(r.gain)
        << " recovered=" << fmt(r.percent_recovered)
        << " heff_err%=" << fmt(r.heff_percent_error) << "\n";
  }
  log << "wrote " << out_dir << "/table1.csv\n";
}

void run_sweep_vmax(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  if (c.modulation_kind != DriveKind::polychromatic)
    throw ConfigError("sweep-vmax needs a polychromatic drive");
  const TunnelingFit fit = fit_tunneling(c.lattice);
  std::vector<double> grid = c.sweep_vmax;
  if (grid.empty())
    grid = {15.5, 16, 16.5, 17, 17.5, 18, 19, 20, 21, 22, 23, 25, 27, 30, 35, 40, 45, 50};

  const double reference = vmax_sweep_point(c, fit, c.lattice.v_max);
  std::vector<double> current(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    current[static_cast<std::size_t>(i)] =
        vmax_sweep_point(c, fit, grid[static_cast<std::size_t>(i)]);
  });

  std::ofstream csv = open_csv(out_dir, "sweep_vmax.csv");
  csv << "vmax,current_normalized\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    csv << fmt(grid[i]) << "," << fmt(current[i] / reference) << "\n";
  log << "reference current at clamp " << fmt(c.lattice.v_max) << ": " << fmt(reference)
      << "\n";
  log << "wrote " << out_dir << "/sweep_vmax.csv (" << grid.size() << " points)\n";
}

void run_sweep_alpha(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
  if (c.lattice.n_sites != 2)
    throw ConfigError("sweep-alpha studies a two-site lattice");
  if (c.occupancy < 2)
    throw ConfigError("sweep-alpha needs occupancy >= 2 (pair states participate)");
  const TunnelingFit fit = fit_tunneling(c.lattice);
  // The period average of U(V(t)) under a single-tone drive is independent of
  // the tone frequency (one period sweeps the same depth distribution), so a
  // reference tone is enough to place the pair resonance.
  const double mean_u =
      mean_interaction(make_monochromatic(1.0, c.lattice.v_min, c.lattice.v_max, fit.beta),
                       c.lattice);
  const double offset = c.lattice.link_offsets()[0];
  const double offset_res = std::abs(offset);
  const double pair_res = std::abs(offset - mean_u);

  std::vector<double> grid = c.sweep_alpha;
  if (grid.empty()) {
    const int n = 25;
    for (int i = 0; i < n; ++i) grid.push_back(1.2 * pair_res * i / (n - 1.0));
  }
  for (double mark : {offset_res, pair_res}) {
    bool present = false;
    for (double a : grid)
      if (std::abs(a - mark) < 1e-12) present = true;
    if (!present) grid.push_back(mark);
  }
  std::sort(grid.begin(), grid.end());

  std::vector<double> current(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    current[static_cast<std::size_t>(i)] =
        alpha_sweep_point(c, fit, grid[static_cast<std::size_t>(i)]);
  });

  std::ofstream csv = open_csv(out_dir, "sweep_alpha.csv");
  csv << "alpha,steady_current,marker\n";
  double i_offset = 0.0, i_pair = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const char* marker = "";
    if (std::abs(grid[i] - offset_res) < 1e-12) {
      marker = "offset_resonance";
      i_offset = current[i];
    }
    if (std::abs(grid[i] - pair_res) < 1e-12) {
      marker = "pair_resonance";
      i_pair = current[i];
    }
    csv << fmt(grid[i]) << "," << fmt(current[i]) << "," << marker << "\n";
  }
  const double baseline = alpha_sweep_point(c, fit, 0.0);
  log << "mean interaction " << fmt(mean_u) << ", pair resonance at " << fmt(pair_res)
      << ", offset resonance at " << fmt(offset_res) << "\n";
  log << "stationary baseline " << fmt(baseline) << ", gain at offset resonance "
      << fmt(guarded_ratio(i_offset, baseline)) << ", gain at pair resonance "
      << fmt(guarded_ratio(i_pair, baseline)) << "\n";
  log << "wrote " << out_dir << "/sweep_alpha.csv (" << grid.size() << " points)\n";
}

}  // namespace modlat
