#include "modlat/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>

namespace modlat {

namespace {

using cd = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;
constexpr cd kI{0.0, 1.0};

std::vector<Eigen::Triplet<cd>> dense_triplets(const Operator& a) {
  std::vector<Eigen::Triplet<cd>> t;
  for (int c = 0; c < a.cols(); ++c)
    for (int r = 0; r < a.rows(); ++r)
      if (a(r, c) != cd(0.0, 0.0)) t.emplace_back(r, c, a(r, c));
  return t;
}

SparseOp from_triplets(int rows, int cols, std::vector<Eigen::Triplet<cd>>& t) {
  SparseOp m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

std::vector<int> diagonal_coords(int d) {
  std::vector<int> coords(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) coords[static_cast<std::size_t>(k)] = k * d + k;
  return coords;
}

Operator hermitize(const Operator& rho) { return 0.5 * (rho + rho.adjoint()); }

double min_eigenvalue_of(const Operator& rho) {
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitize(rho), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

void ReservoirSpec::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw ConfigError("reservoir rate kappa must be positive and finite");
}

SparseOp spre(const Operator& a) {
  const int d = static_cast<int>(a.rows());
  std::vector<Eigen::Triplet<cd>> t;
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r)
      if (a(r, c) != cd(0.0, 0.0))
        for (int k = 0; k < d; ++k) t.emplace_back(k * d + r, k * d + c, a(r, c));
  return from_triplets(d * d, d * d, t);
}

SparseOp spost(const Operator& b) {
  const int d = static_cast<int>(b.rows());
  std::vector<Eigen::Triplet<cd>> t;
  for (int c2 = 0; c2 < d; ++c2)
    for (int c1 = 0; c1 < d; ++c1)
      if (b(c1, c2) != cd(0.0, 0.0))
        for (int i = 0; i < d; ++i) t.emplace_back(c2 * d + i, c1 * d + i, b(c1, c2));
  return from_triplets(d * d, d * d, t);
}

SparseOp sandwich(const Operator& a, const Operator& b) {
  const int d = static_cast<int>(a.rows());
  const auto ta = dense_triplets(a);
  const auto tb = dense_triplets(b);
  std::vector<Eigen::Triplet<cd>> t;
  t.reserve(ta.size() * tb.size());
  for (const auto& eb : tb)
    for (const auto& ea : ta)
      t.emplace_back(eb.col() * d + ea.row(), eb.row() * d + ea.col(), ea.value() * eb.value());
  return from_triplets(d * d, d * d, t);
}

SparseOp commutator_super(const Operator& h) {
  SparseOp s = spre(h) - spost(h);
  return SparseOp(-kI * s);
}

SparseOp dissipator_super(const Operator& jump) {
  const Operator norm_sq = jump.adjoint() * jump;
  SparseOp s = sandwich(jump, Operator(jump.adjoint()));
  s -= SparseOp(0.5 * spre(norm_sq));
  s -= SparseOp(0.5 * spost(norm_sq));
  return s;
}

SparseOp liouvillian_matrix(const Operator& h, const ReservoirSpec& r, const FockBasis& basis) {
  const Operator pump = creation(basis, 0);
  const Operator drain = annihilation(basis, basis.n_sites - 1);
  SparseOp l = commutator_super(h);
  l += SparseOp(r.kappa * dissipator_super(pump));
  l += SparseOp(r.kappa * dissipator_super(drain));
  l.makeCompressed();
  return l;
}

Operator liouvillian_apply(const Operator& h, const ReservoirSpec& r, const FockBasis& basis,
                           const Operator& rho) {
  if (h.rows() != rho.rows() || h.cols() != rho.cols() || h.rows() != basis.dim())
    throw ConfigError("liouvillian_apply: dimension mismatch");
  const Operator pump = creation(basis, 0);
  const Operator drain = annihilation(basis, basis.n_sites - 1);
  const Operator pump_sq = pump.adjoint() * pump;
  const Operator drain_sq = drain.adjoint() * drain;
  Operator out = -kI * (h * rho - rho * h);
  out += r.kappa * (pump * rho * pump.adjoint() - 0.5 * (pump_sq * rho + rho * pump_sq));
  out += r.kappa * (drain * rho * drain.adjoint() - 0.5 * (drain_sq * rho + rho * drain_sq));
  return out;
}

Operator vacuum_state(const FockBasis& basis) {
  Operator rho = Operator::Zero(basis.dim(), basis.dim());
  rho(0, 0) = 1.0;  // lexicographic index 0 is the empty lattice
  return rho;
}

double drain_current(const Operator& rho, const ReservoirSpec& r, const FockBasis& basis) {
  double occ = 0.0;
  for (int k = 0; k < basis.dim(); ++k)
    occ += basis.occupation(k, basis.n_sites - 1) * rho(k, k).real();
  return r.kappa * occ;
}

Restriction reachable_restriction(const std::vector<const SparseOp*>& generators,
                                  const std::vector<int>& seed_coords, int full_dim) {
  std::vector<char> seen(static_cast<std::size_t>(full_dim), 0);
  std::vector<int> stack;
  for (int s : seed_coords) {
    if (s < 0 || s >= full_dim) throw ConfigError("reachable_restriction: seed out of range");
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = 1;
      stack.push_back(s);
    }
  }
  std::vector<int> coords;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    coords.push_back(c);
    for (const SparseOp* g : generators) {
      for (SparseOp::InnerIterator it(*g, c); it; ++it) {
        if (it.value() == cd(0.0, 0.0)) continue;
        const int r = static_cast<int>(it.row());
        if (!seen[static_cast<std::size_t>(r)]) {
          seen[static_cast<std::size_t>(r)] = 1;
          stack.push_back(r);
        }
      }
    }
  }
  std::sort(coords.begin(), coords.end());
  Restriction res;
  res.coords = std::move(coords);
  res.full_dim = full_dim;
  res.inverse.assign(static_cast<std::size_t>(full_dim), -1);
  for (int i = 0; i < res.dim(); ++i)
    res.inverse[static_cast<std::size_t>(res.coords[static_cast<std::size_t>(i)])] = i;
  return res;
}

Eigen::MatrixXcd restrict_to(const SparseOp& op, const Restriction& r) {
  const int m = r.dim();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    const int c = r.coords[static_cast<std::size_t>(j)];
    for (SparseOp::InnerIterator it(op, c); it; ++it) {
      if (it.value() == cd(0.0, 0.0)) continue;
      const int i = r.inverse[static_cast<std::size_t>(it.row())];
      if (i < 0)
        throw SolverError("restrict_to: generator leaks outside the reachable coordinate set");
      a(i, j) = it.value();
    }
  }
  return a;
}

Eigen::VectorXcd gather(const Operator& rho, const Restriction& r) {
  const int d = static_cast<int>(rho.rows());
  if (d * d != r.full_dim) throw ConfigError("gather: dimension mismatch");
  Eigen::VectorXcd y(r.dim());
  for (int i = 0; i < r.dim(); ++i) {
    const int c = r.coords[static_cast<std::size_t>(i)];
    y[i] = rho(c % d, c / d);
  }
  return y;
}

Operator scatter(const Eigen::VectorXcd& y, const Restriction& r) {
  const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(r.full_dim))));
  Operator rho = Operator::Zero(d, d);
  for (int i = 0; i < r.dim(); ++i) {
    const int c = r.coords[static_cast<std::size_t>(i)];
    rho(c % d, c / d) = y[i];
  }
  return rho;
}

std::vector<int> nonzero_coords(const Operator& rho, double tol) {
  const int d = static_cast<int>(rho.rows());
  std::vector<int> coords;
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r)
      if (std::abs(rho(r, c)) > tol) coords.push_back(c * d + r);
  return coords;
}

StationaryResult stationary_state(const Operator& h, const ReservoirSpec& r,
                                  const FockBasis& basis) {
  const int d = basis.dim();
  if (h.rows() != d || h.cols() != d)
    throw ConfigError("stationary_state: hamiltonian does not match basis");
  const SparseOp l = liouvillian_matrix(h, r, basis);
  const Restriction set = reachable_restriction({&l}, diagonal_coords(d), d * d);
  const int m = set.dim();
  const Eigen::MatrixXcd a = restrict_to(l, set);

  Eigen::MatrixXcd bordered(m + 1, m);
  bordered.topRows(m) = a;
  for (int j = 0; j < m; ++j) {
    const int c = set.coords[static_cast<std::size_t>(j)];
    bordered(m, j) = (c % d == c / d) ? 1.0 : 0.0;
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m + 1);
  rhs[m] = 1.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(bordered);
  if (qr.rank() < m)
    throw SolverError("stationary_state: kernel is degenerate within the reachable sector");
  const Eigen::VectorXcd x = qr.solve(rhs);

  Operator rho = hermitize(scatter(x, set));
  const double tr = rho.trace().real();
  if (!(std::abs(tr) > 1e-12)) throw SolverError("stationary_state: traceless kernel vector");
  rho /= tr;

  Eigen::Map<const Eigen::VectorXcd> vec_rho(rho.data(), d * d);
  const double residual = (l * vec_rho).norm();
  if (residual > 1e-10) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "stationary_state: residual %.3e exceeds 1e-10", residual);
    throw SolverError(msg);
  }

  StationaryResult out;
  out.rho = rho;
  out.residual = residual;
  out.min_eigenvalue = min_eigenvalue_of(rho);
  out.current = drain_current(rho, r, basis);
  return out;
}

Operator DrivenSystem::hamiltonian_at(double t) const {
  Operator h = h_static;
  if (has_interactions) h += interaction_at(scheme, lattice, t) * h_int;
  h -= (j_hop * tunneling_factor(scheme, t)) * h_hop;
  return h;
}

double DrivenSystem::max_time_step() const {
  double f = fastest_frequency(scheme);
  for (double off : lattice.site_offsets()) f = std::max(f, std::abs(off));
  if (has_interactions) f = std::max(f, onsite_interaction(lattice, scheme.v_max));
  if (!(f > 0.0)) return std::numeric_limits<double>::infinity();
  return (2.0 * kPi / f) / 20.0;
}

DrivenSystem make_driven_system(const LatticeSpec& spec, const ModulationScheme& scheme,
                                int n_max, double j_over_kappa, const TunnelingFit& fit) {
  spec.validate();
  if (!(j_over_kappa > 0.0)) throw ConfigError("j_over_kappa must be positive");
  DrivenSystem sys;
  sys.basis = FockBasis(spec.n_sites, n_max);
  sys.lattice = spec;
  sys.scheme = scheme;
  sys.j_hop = fit.j_max;
  sys.reservoir.kappa = fit.j_max / j_over_kappa;
  sys.has_interactions = n_max >= 2;

  const int d = sys.basis.dim();
  sys.h_static = Operator::Zero(d, d);
  sys.h_int = Operator::Zero(d, d);
  const auto offsets = spec.site_offsets();
  for (int k = 0; k < d; ++k) {
    double stat = 0.0, inter = 0.0;
    for (int j = 0; j < spec.n_sites; ++j) {
      const double n = sys.basis.occupation(k, j);
      stat += offsets[static_cast<std::size_t>(j)] * n;
      inter += 0.5 * n * (n - 1.0);
    }
    sys.h_static(k, k) = stat;
    sys.h_int(k, k) = inter;
  }
  sys.h_hop = Operator::Zero(d, d);
  for (int j = 1; j < spec.n_sites; ++j) {
    const Operator hop = creation(sys.basis, j) * annihilation(sys.basis, j - 1);
    sys.h_hop += hop + hop.adjoint();
  }
  return sys;
}

DrivenSystem make_stationary_system(const BoseHubbardParams& params, const LatticeSpec& geom,
                                    int n_max, double kappa) {
  if (params.n_sites != geom.n_sites)
    throw ConfigError("make_stationary_system: parameter/geometry site mismatch");
  if (!(kappa > 0.0)) throw ConfigError("make_stationary_system: kappa must be positive");
  DrivenSystem sys;
  sys.basis = FockBasis(params.n_sites, n_max);
  sys.lattice = geom;
  sys.scheme = make_unmodulated(geom.v_min);
  sys.reservoir.kappa = kappa;
  sys.j_hop = 0.0;
  sys.has_interactions = false;
  sys.h_static = build_hamiltonian(sys.basis, params);
  sys.h_int = Operator::Zero(sys.basis.dim(), sys.basis.dim());
  sys.h_hop = Operator::Zero(sys.basis.dim(), sys.basis.dim());
  return sys;
}

namespace {

// Time-dependent generator on the reachable coordinate set:
// L(t) = l0 + u(t) k_int + f(t) k_hop.
struct RestrictedGenerators {
  Restriction set;
  Eigen::MatrixXcd l0, k_int, k_hop;
  Eigen::VectorXd current_w;  // kappa-weighted drain occupancy on diagonal coords
  bool has_int = false;
};

RestrictedGenerators build_restricted(const DrivenSystem& sys,
                                      const std::vector<int>& extra_seeds) {
  const int d = sys.basis.dim();
  const Operator pump = creation(sys.basis, 0);
  const Operator drain = annihilation(sys.basis, sys.basis.n_sites - 1);
  SparseOp l0 = commutator_super(sys.h_static);
  l0 += SparseOp(sys.reservoir.kappa * dissipator_super(pump));
  l0 += SparseOp(sys.reservoir.kappa * dissipator_super(drain));
  const SparseOp k_int = commutator_super(sys.h_int);
  const SparseOp k_hop = commutator_super(Operator(-sys.j_hop * sys.h_hop));

  std::vector<int> seeds = diagonal_coords(d);
  seeds.insert(seeds.end(), extra_seeds.begin(), extra_seeds.end());
  RestrictedGenerators g;
  g.set = reachable_restriction({&l0, &k_int, &k_hop}, seeds, d * d);
  g.l0 = restrict_to(l0, g.set);
  g.k_int = restrict_to(k_int, g.set);
  g.k_hop = restrict_to(k_hop, g.set);
  g.has_int = sys.has_interactions && g.k_int.cwiseAbs().maxCoeff() > 0.0;
  g.current_w = Eigen::VectorXd::Zero(g.set.dim());
  for (int i = 0; i < g.set.dim(); ++i) {
    const int c = g.set.coords[static_cast<std::size_t>(i)];
    if (c % d == c / d)
      g.current_w[i] = sys.reservoir.kappa * sys.basis.occupation(c % d, sys.basis.n_sites - 1);
  }
  return g;
}

double restricted_current(const RestrictedGenerators& g, const Eigen::VectorXcd& y) {
  cd total = 0.0;
  for (int i = 0; i < g.set.dim(); ++i)
    if (g.current_w[i] != 0.0) total += g.current_w[i] * y[i];
  return total.real();
}

// RHS on a state of `cols` stacked restricted vectors, plus one trailing
// current-integral component when `augmented` is set.
OdeRhs make_restricted_rhs(const DrivenSystem& sys, const RestrictedGenerators& g, int cols,
                           bool augmented) {
  const int m = g.set.dim();
  return [&sys, &g, m, cols, augmented](double t, const Eigen::VectorXcd& y,
                                        Eigen::VectorXcd& dy) {
    const double f = tunneling_factor(sys.scheme, t);
    const double u = g.has_int ? interaction_at(sys.scheme, sys.lattice, t) : 0.0;
    Eigen::Map<const Eigen::MatrixXcd> ym(y.data(), m, cols);
    Eigen::Map<Eigen::MatrixXcd> dym(dy.data(), m, cols);
    dym.noalias() = g.l0 * ym;
    dym.noalias() += f * (g.k_hop * ym);
    if (g.has_int) dym.noalias() += u * (g.k_int * ym);
    if (augmented) {
      cd s = 0.0;
      for (int i = 0; i < m; ++i)
        if (g.current_w[i] != 0.0) s += g.current_w[i] * y[i];
      dy[m * cols] = s;
    }
  };
}

Eigen::MatrixXcd one_period_map(const DrivenSystem& sys, const RestrictedGenerators& g,
                                double period, const SolverOptions& opt) {
  const int m = g.set.dim();
  Eigen::VectorXcd state(m * m);
  Eigen::Map<Eigen::MatrixXcd>(state.data(), m, m) = Eigen::MatrixXcd::Identity(m, m);
  OdeOptions oo;
  oo.rel_tol = opt.floquet_rel_tol;
  oo.abs_tol = std::min(opt.abs_tol, 1e-12);
  oo.max_step = sys.max_time_step();
  const OdeRhs rhs = make_restricted_rhs(sys, g, m, false);
  integrate_ode(rhs, state, 0.0, period, oo);
  return Eigen::Map<Eigen::MatrixXcd>(state.data(), m, m);
}

}  // namespace

PeriodMap build_period_map(const DrivenSystem& sys, const SolverOptions& opt) {
  const double period = common_period(sys.scheme);
  if (!(period > 0.0)) throw SolverError("build_period_map: scheme has no drive period");
  const RestrictedGenerators g = build_restricted(sys, {});
  PeriodMap pm;
  pm.map = one_period_map(sys, g, period, opt);
  pm.set = g.set;
  pm.current_w = g.current_w;
  pm.period = period;
  return pm;
}

CurrentTrace floquet_trace(const PeriodMap& pm, const Operator& rho0, long n_periods,
                           long stride) {
  if (stride < 1) stride = 1;
  Eigen::VectorXcd y = gather(rho0, pm.set);
  for (const int c : nonzero_coords(rho0))
    if (pm.set.inverse[static_cast<std::size_t>(c)] < 0)
      throw ConfigError("floquet_trace: initial state leaves the reachable coordinate set");
  CurrentTrace trace;
  auto record = [&](long k) {
    cd total = 0.0;
    for (int i = 0; i < pm.set.dim(); ++i)
      if (pm.current_w[i] != 0.0) total += pm.current_w[i] * y[i];
    trace.times.push_back(static_cast<double>(k) * pm.period);
    trace.current.push_back(total.real());
  };
  record(0);
  Eigen::VectorXcd tmp(y.size());
  for (long k = 1; k <= n_periods; ++k) {
    tmp.noalias() = pm.map * y;
    y.swap(tmp);
    if (k % stride == 0 || k == n_periods) record(k);
  }
  return trace;
}

PropagationResult propagate(const DrivenSystem& sys, const Operator& rho0, double t_final,
                            int n_samples, const SolverOptions& opt) {
  if (rho0.rows() != sys.basis.dim()) throw ConfigError("propagate: state does not match basis");
  const RestrictedGenerators g = build_restricted(sys, nonzero_coords(rho0));
  Eigen::VectorXcd y = gather(rho0, g.set);

  std::vector<double> samples;
  if (n_samples > 0) {
    samples.reserve(static_cast<std::size_t>(n_samples) + 1);
    for (int i = 0; i <= n_samples; ++i)
      samples.push_back(t_final * static_cast<double>(i) / n_samples);
  }
  PropagationResult out;
  OdeObserver obs = [&](double t, const Eigen::VectorXcd& yt) {
    out.trace.times.push_back(t);
    out.trace.current.push_back(restricted_current(g, yt));
  };
  OdeOptions oo;
  oo.rel_tol = opt.rel_tol;
  oo.abs_tol = opt.abs_tol;
  oo.max_step = sys.max_time_step();
  const OdeRhs rhs = make_restricted_rhs(sys, g, 1, false);
  integrate_ode(rhs, y, 0.0, t_final, oo, samples.empty() ? nullptr : &samples,
                samples.empty() ? nullptr : &obs);
  out.rho_final = scatter(y, g.set);
  return out;
}

PropagationResult propagate_full(const std::function<Operator(double)>& h_of_t,
                                 const ReservoirSpec& r, const FockBasis& basis,
                                 const Operator& rho0, double t_final, int n_samples,
                                 const SolverOptions& opt, double max_step) {
  const int d = basis.dim();
  if (rho0.rows() != d) throw ConfigError("propagate_full: state does not match basis");
  const Operator pump = creation(basis, 0);
  const Operator drain = annihilation(basis, basis.n_sites - 1);
  const Operator pump_sq = pump.adjoint() * pump;
  const Operator drain_sq = drain.adjoint() * drain;
  const double kappa = r.kappa;

  OdeRhs rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
    Eigen::Map<const Operator> rho(y.data(), d, d);
    Eigen::Map<Operator> drho(dy.data(), d, d);
    const Operator h = h_of_t(t);
    drho.noalias() = -kI * (h * rho - rho * h);
    if (kappa != 0.0) {
      drho.noalias() += kappa * (pump * rho * pump.adjoint());
      drho.noalias() -= (0.5 * kappa) * (pump_sq * rho + rho * pump_sq);
      drho.noalias() += kappa * (drain * rho * drain.adjoint());
      drho.noalias() -= (0.5 * kappa) * (drain_sq * rho + rho * drain_sq);
    }
  };

  Eigen::VectorXcd y(d * d);
  Eigen::Map<Operator>(y.data(), d, d) = rho0;
  std::vector<double> samples;
  if (n_samples > 0)
    for (int i = 0; i <= n_samples; ++i)
      samples.push_back(t_final * static_cast<double>(i) / n_samples);
  PropagationResult out;
  OdeObserver obs = [&](double t, const Eigen::VectorXcd& yt) {
    Eigen::Map<const Operator> rho(yt.data(), d, d);
    double occ = 0.0;
    for (int k = 0; k < d; ++k) occ += basis.occupation(k, basis.n_sites - 1) * rho(k, k).real();
    out.trace.times.push_back(t);
    out.trace.current.push_back(kappa * occ);
  };
  OdeOptions oo;
  oo.rel_tol = opt.rel_tol;
  oo.abs_tol = opt.abs_tol;
  if (max_step > 0.0) oo.max_step = max_step;
  integrate_ode(rhs, y, 0.0, t_final, oo, samples.empty() ? nullptr : &samples,
                samples.empty() ? nullptr : &obs);
  out.rho_final = Eigen::Map<Operator>(y.data(), d, d);
  return out;
}

FloquetSteady floquet_steady_current(const DrivenSystem& sys, const SolverOptions& opt,
                                     const PeriodMap* precomputed) {
  const PeriodMap pm = precomputed ? *precomputed : build_period_map(sys, opt);
  const RestrictedGenerators g = build_restricted(sys, {});
  const int m = g.set.dim();
  if (pm.set.coords != g.set.coords)
    throw SolverError("floquet_steady_current: period map built for a different system");

  Eigen::MatrixXcd bordered(m + 1, m);
  bordered.topRows(m) = pm.map - Eigen::MatrixXcd::Identity(m, m);
  const int d = sys.basis.dim();
  for (int j = 0; j < m; ++j) {
    const int c = g.set.coords[static_cast<std::size_t>(j)];
    bordered(m, j) = (c % d == c / d) ? 1.0 : 0.0;
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m + 1);
  rhs[m] = 1.0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(bordered);
  if (qr.rank() < m)
    throw SolverError("floquet_steady_current: period map has a degenerate fixed point");
  const Eigen::VectorXcd x = qr.solve(rhs);

  Operator rho0 = hermitize(scatter(x, g.set));
  rho0 /= rho0.trace().real();

  Eigen::VectorXcd aug(m + 1);
  aug.head(m) = gather(rho0, g.set);
  aug[m] = 0.0;
  OdeOptions oo;
  oo.rel_tol = opt.floquet_rel_tol;
  oo.abs_tol = std::min(opt.abs_tol, 1e-12);
  oo.max_step = sys.max_time_step();
  const OdeRhs rhs_aug = make_restricted_rhs(sys, g, 1, true);
  integrate_ode(rhs_aug, aug, 0.0, pm.period, oo);

  FloquetSteady out;
  out.rho_start = rho0;
  out.mean_current = aug[m].real() / pm.period;
  const Eigen::VectorXcd y0 = gather(rho0, g.set);
  out.fixed_point_residual = (aug.head(m) - y0).norm() / y0.norm();
  return out;
}

CurrentTrace steady_current_protocol(const DrivenSystem& sys, const SolverOptions& opt,
                                     bool throw_on_timeout) {
  const double period = common_period(sys.scheme);
  if (!(period > 0.0))
    throw SolverError("steady_current_protocol: scheme has no drive period");
  const RestrictedGenerators g = build_restricted(sys, {});
  const int m = g.set.dim();

  Eigen::VectorXcd aug(m + 1);
  aug.head(m) = gather(vacuum_state(sys.basis), g.set);
  OdeOptions oo;
  oo.rel_tol = opt.rel_tol;
  oo.abs_tol = opt.abs_tol;
  oo.max_step = sys.max_time_step();
  const OdeRhs rhs = make_restricted_rhs(sys, g, 1, true);

  const double t_max = opt.t_max_in_kappa_units / sys.reservoir.kappa;
  const long max_periods = static_cast<long>(std::ceil(t_max / period));
  CurrentTrace trace;
  double prev = 0.0;
  int streak = 0;
  for (long k = 1; k <= max_periods; ++k) {
    aug[m] = 0.0;
    integrate_ode(rhs, aug, (k - 1) * period, k * period, oo);
    const double mean_k = aug[m].real() / period;
    trace.times.push_back(k * period);
    trace.current.push_back(mean_k);
    if (k > 1 && std::abs(mean_k - prev) <= opt.steady_tol * std::abs(mean_k))
      ++streak;
    else
      streak = 0;
    prev = mean_k;
    if (streak >= opt.steady_consecutive) {
      trace.converged = true;
      trace.steady_value = mean_k;
      return trace;
    }
  }
  trace.steady_value = prev;
  if (throw_on_timeout) {
    char msg[192];
    const std::size_t n = trace.current.size();
    std::snprintf(msg, sizeof msg,
                  "steady_current_protocol: no convergence within t_max; last period averages "
                  "%.6e %.6e %.6e",
                  n >= 3 ? trace.current[n - 3] : 0.0, n >= 2 ? trace.current[n - 2] : 0.0,
                  n >= 1 ? trace.current[n - 1] : 0.0);
    throw SolverError(msg);
  }
  return trace;
}

double steady_current(const DrivenSystem& sys, const SolverOptions& opt) {
  if (sys.scheme.kind == DriveKind::none)
    return stationary_state(sys.hamiltonian_at(0.0), sys.reservoir, sys.basis).current;
  if (opt.method == SteadyMethod::protocol)
    return steady_current_protocol(sys, opt).steady_value;
  return floquet_steady_current(sys, opt).mean_current;
}

}  // namespace modlat
