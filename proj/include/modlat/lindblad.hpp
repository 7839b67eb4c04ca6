#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "modlat/fock.hpp"
#include "modlat/lattice.hpp"
#include "modlat/modulation.hpp"
#include "modlat/ode.hpp"

namespace modlat {

using SparseOp = Eigen::SparseMatrix<std::complex<double>>;

// Particle pump attached to the first site (jump a_1†) and drain to the last
// (jump a_N), both at rate kappa. The transport observable is the drain
// current I = kappa * <n_N>.
struct ReservoirSpec {
  double kappa = 0.0;
  void validate() const;
};

// Superoperator algebra in column-major vectorization:
// vec(A X B) = (B^T kron A) vec(X).
SparseOp spre(const Operator& a);
SparseOp spost(const Operator& b);
SparseOp sandwich(const Operator& a, const Operator& b);
SparseOp commutator_super(const Operator& h);      // -i (spre - spost)
SparseOp dissipator_super(const Operator& jump);   // L.L† sandwich - anticommutator halves
SparseOp liouvillian_matrix(const Operator& h, const ReservoirSpec& r, const FockBasis& basis);

// Direct action of the master equation on a density matrix.
Operator liouvillian_apply(const Operator& h, const ReservoirSpec& r, const FockBasis& basis,
                           const Operator& rho);

Operator vacuum_state(const FockBasis& basis);
double drain_current(const Operator& rho, const ReservoirSpec& r, const FockBasis& basis);

// Coordinate subset of the vectorized space closed under a family of
// generators (every generator column inside the set has all its rows inside).
// Propagation, steady-state solves, and period maps run on this subset and
// are exact for initial states supported on it.
struct Restriction {
  std::vector<int> coords;   // ascending full-space coordinates
  std::vector<int> inverse;  // full coordinate -> local index, -1 if absent
  int full_dim = 0;
  int dim() const { return static_cast<int>(coords.size()); }
};

Restriction reachable_restriction(const std::vector<const SparseOp*>& generators,
                                  const std::vector<int>& seed_coords, int full_dim);
Eigen::MatrixXcd restrict_to(const SparseOp& op, const Restriction& r);
Eigen::VectorXcd gather(const Operator& rho, const Restriction& r);
Operator scatter(const Eigen::VectorXcd& y, const Restriction& r);
std::vector<int> nonzero_coords(const Operator& rho, double tol = 1e-300);

enum class SteadyMethod { floquet, protocol };

struct SolverOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double floquet_rel_tol = 1e-10;  // per-step tolerance when building the period map
  double t_max_in_kappa_units = 50.0;
  double steady_tol = 1e-4;        // per-period relative change declaring convergence
  int steady_consecutive = 3;
  SteadyMethod method = SteadyMethod::floquet;
};

struct CurrentTrace {
  std::vector<double> times;
  std::vector<double> current;  // kappa * <n_N>
  double steady_value = 0.0;
  bool converged = false;
};

struct PropagationResult {
  CurrentTrace trace;
  Operator rho_final;
};

struct StationaryResult {
  Operator rho;
  double current = 0.0;
  double residual = 0.0;         // full-space ||L rho||_F after the restricted solve
  double min_eigenvalue = 0.0;   // monitored, not projected
};

// Unique kernel of the time-independent Liouvillian, solved on the subset
// reachable from the vacuum and verified against the full operator.
StationaryResult stationary_state(const Operator& h, const ReservoirSpec& r,
                                  const FockBasis& basis);

// Amplitude-modulated open lattice with uniform hopping scale j_hop:
// H(t) = h_static + U(V(t)) h_int - j_hop f(t) h_hop, site energies gauged so
// the depth-uniform part is removed.
struct DrivenSystem {
  FockBasis basis;
  LatticeSpec lattice;
  ModulationScheme scheme;
  ReservoirSpec reservoir;
  double j_hop = 0.0;
  bool has_interactions = false;
  Operator h_static;
  Operator h_int;   // sum_j n_j (n_j - 1) / 2
  Operator h_hop;   // sum_links (a†_j a_{j-1} + h.c.)

  Operator hamiltonian_at(double t) const;
  double max_time_step() const;  // (1/20) of the fastest drive period; inf if static
};

DrivenSystem make_driven_system(const LatticeSpec& spec, const ModulationScheme& scheme,
                                int n_max, double j_over_kappa, const TunnelingFit& fit);

// Constant-Hamiltonian system (per-link tunneling and per-site interactions
// baked in, no drive); geom supplies geometry metadata only.
DrivenSystem make_stationary_system(const BoseHubbardParams& params, const LatticeSpec& geom,
                                    int n_max, double kappa);

// Restricted propagation from rho0 (restriction seeded by its support),
// sampling the drain current on a uniform grid.
PropagationResult propagate(const DrivenSystem& sys, const Operator& rho0, double t_final,
                            int n_samples, const SolverOptions& opt);

// Full-space propagation for arbitrary time-dependent Hamiltonians; the
// reference path the restricted engine is tested against.
PropagationResult propagate_full(const std::function<Operator(double)>& h_of_t,
                                 const ReservoirSpec& r, const FockBasis& basis,
                                 const Operator& rho0, double t_final, int n_samples,
                                 const SolverOptions& opt, double max_step = 0.0);

// One-period propagator of the driven dynamics on the reachable subset.
// Building it costs one matrix-valued integration; applying it advances a
// state by a full period at matrix-vector cost.
struct PeriodMap {
  Restriction set;
  Eigen::MatrixXcd map;
  Eigen::VectorXd current_w;  // kappa-weighted drain occupancy per coordinate
  double period = 0.0;
};

PeriodMap build_period_map(const DrivenSystem& sys, const SolverOptions& opt);

// Stroboscopic evolution from rho0: the drain current recorded at every
// `stride`-th period boundary (drive phase zero) for n_periods periods.
CurrentTrace floquet_trace(const PeriodMap& pm, const Operator& rho0, long n_periods,
                           long stride);

struct FloquetSteady {
  Operator rho_start;             // steady state at phase t = 0
  double mean_current = 0.0;      // period average of kappa <n_N>
  double fixed_point_residual = 0.0;
};

// Steady state of the periodically driven system: one-period propagator on
// the reachable subset, its trace-normalized fixed point, then a single
// augmented pass for the period-averaged current.
FloquetSteady floquet_steady_current(const DrivenSystem& sys, const SolverOptions& opt,
                                     const PeriodMap* precomputed = nullptr);

// Period-by-period detection: averages the current over successive periods
// until the relative change stays below steady_tol for steady_consecutive
// periods. times/current hold the per-period averages.
CurrentTrace steady_current_protocol(const DrivenSystem& sys, const SolverOptions& opt,
                                     bool throw_on_timeout = true);

// Dispatch: constant schemes use the stationary kernel, driven ones the
// method selected in opt.
double steady_current(const DrivenSystem& sys, const SolverOptions& opt);

}  // namespace modlat
