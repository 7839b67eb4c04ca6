#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "modlat/errors.hpp"
#include "modlat/fock.hpp"
#include "modlat/lattice.hpp"
#include "modlat/lindblad.hpp"
#include "modlat/modulation.hpp"
#include "modlat/ode.hpp"

namespace {

using namespace modlat;
using std::complex;

const double kTau = 2.0 * std::acos(-1.0);

Operator random_op(int d, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Operator m(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) m(r, c) = complex<double>(u(gen), u(gen));
  return m;
}

Operator random_density(int d, unsigned seed) {
  const Operator a = random_op(d, seed);
  Operator rho = a * a.adjoint();
  rho /= rho.trace().real();
  return rho;
}

Eigen::VectorXcd vec_of(const Operator& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

BoseHubbardParams two_site_params(double delta2, double u_val, double j_val) {
  BoseHubbardParams p;
  p.n_sites = 2;
  p.depth = 15.0;
  p.omega = {0.0, delta2};
  p.u = {u_val, u_val};
  p.j = {j_val};
  return p;
}

LatticeSpec two_site_geom(double delta2) {
  LatticeSpec s;
  s.n_sites = 2;
  s.delta = {delta2};
  return s;
}

}  // namespace

TEST_SUITE("unit_lindblad") {

TEST_CASE("vectorization identities hold on random matrices") {
  const int d = 4;
  const Operator a = random_op(d, 11);
  const Operator b = random_op(d, 22);
  const Operator x = random_op(d, 33);

  CHECK((spre(a) * vec_of(x) - vec_of(a * x)).norm() < 1e-12);
  CHECK((spost(b) * vec_of(x) - vec_of(x * b)).norm() < 1e-12);
  CHECK((sandwich(a, b) * vec_of(x) - vec_of(a * x * b)).norm() < 1e-12);

  const Operator h = a + a.adjoint();
  const complex<double> im(0.0, 1.0);
  CHECK((commutator_super(h) * vec_of(x) - vec_of(-im * (h * x - x * h))).norm() < 1e-12);

  const Operator dis =
      b * x * b.adjoint() - 0.5 * (b.adjoint() * b * x + x * b.adjoint() * b);
  CHECK((dissipator_super(b) * vec_of(x) - vec_of(dis)).norm() < 1e-12);
}

TEST_CASE("liouvillian matrix matches the direct action and conserves structure") {
  FockBasis basis(2, 2);
  const Operator h = build_hamiltonian(basis, two_site_params(0.3, 0.6, 0.02));
  const ReservoirSpec r{0.01};
  const Operator rho = random_density(basis.dim(), 7);

  const Operator applied = liouvillian_apply(h, r, basis, rho);
  const SparseOp l = liouvillian_matrix(h, r, basis);
  CHECK((l * vec_of(rho) - vec_of(applied)).norm() < 1e-12);

  CHECK(std::abs(applied.trace()) < 1e-13);
  CHECK((applied - applied.adjoint()).norm() < 1e-13);

  CHECK_THROWS_AS(liouvillian_apply(h, r, FockBasis(2, 1), rho), ConfigError);
}

TEST_CASE("reservoir rates must be positive") {
  CHECK_THROWS_AS(ReservoirSpec{0.0}.validate(), ConfigError);
  CHECK_THROWS_AS(ReservoirSpec{-1.0}.validate(), ConfigError);
  CHECK_NOTHROW(ReservoirSpec{0.5}.validate());
}

TEST_CASE("balanced pump and drain on one site fill every rung uniformly") {
  const ReservoirSpec r{0.04};

  FockBasis two_level(1, 1);
  const StationaryResult ss = stationary_state(Operator::Zero(2, 2), r, two_level);
  CHECK(ss.rho(1, 1).real() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(ss.current == doctest::Approx(0.5 * r.kappa).epsilon(1e-10));
  CHECK(ss.residual < 1e-10);
  CHECK(ss.min_eigenvalue > -1e-10);

  FockBasis three_level(1, 2);
  const StationaryResult ws = stationary_state(Operator::Zero(3, 3), r, three_level);
  CHECK(ws.rho(0, 0).real() == doctest::Approx(1.0 / 3).epsilon(1e-9));
  CHECK(ws.current == doctest::Approx(r.kappa).epsilon(1e-9));
}

TEST_CASE("kernel agrees with a dense eigensolve of the full liouvillian") {
  FockBasis basis(2, 2);
  const Operator h = build_hamiltonian(basis, two_site_params(0.1, 0.6, 0.04));
  const ReservoirSpec r{0.02};
  const StationaryResult ss = stationary_state(h, r, basis);

  const Eigen::MatrixXcd l = Eigen::MatrixXcd(liouvillian_matrix(h, r, basis));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(l);
  int k0 = 0;
  for (int k = 1; k < l.rows(); ++k)
    if (std::abs(es.eigenvalues()[k]) < std::abs(es.eigenvalues()[k0])) k0 = k;
  REQUIRE(std::abs(es.eigenvalues()[k0]) < 1e-12);

  const Eigen::VectorXcd v = es.eigenvectors().col(k0);
  Operator rho = Eigen::Map<const Operator>(v.data(), basis.dim(), basis.dim());
  const complex<double> tr = rho.trace();
  REQUIRE(std::abs(tr) > 1e-6);
  rho /= tr;
  rho = 0.5 * (rho + rho.adjoint());

  CHECK((rho - ss.rho).norm() < 1e-8);
  CHECK(drain_current(rho, r, basis) == doctest::Approx(ss.current).epsilon(1e-8));
}

TEST_CASE("full propagation relaxes onto the kernel") {
  FockBasis basis(2, 2);
  const Operator h = build_hamiltonian(basis, two_site_params(0.1, 0.0, 0.02));
  const ReservoirSpec r{0.01};
  const double target = stationary_state(h, r, basis).current;

  SolverOptions opt;
  const auto h_of_t = [&](double) { return h; };
  const PropagationResult res =
      propagate_full(h_of_t, r, basis, vacuum_state(basis), 30.0 / r.kappa, 40, opt);
  CHECK(res.trace.current.back() == doctest::Approx(target).epsilon(1e-6));
  CHECK(std::abs(res.rho_final.trace().real() - 1.0) < 1e-8);
  CHECK(res.trace.times.size() == res.trace.current.size());
}

TEST_CASE("restricted propagation matches the kernel and the full-space path") {
  DrivenSystem sys =
      make_stationary_system(two_site_params(0.1, 0.566, 0.02), two_site_geom(0.1), 2, 0.01);
  SolverOptions opt;
  const double t_final = 30.0 / sys.reservoir.kappa;

  const double kernel = steady_current(sys, opt);
  const PropagationResult res = propagate(sys, vacuum_state(sys.basis), t_final, 40, opt);
  CHECK(res.trace.current.back() == doctest::Approx(kernel).epsilon(1e-6));

  const auto h_of_t = [&](double t) { return sys.hamiltonian_at(t); };
  const PropagationResult full = propagate_full(h_of_t, sys.reservoir, sys.basis,
                                                vacuum_state(sys.basis), t_final, 40, opt);
  CHECK(res.trace.current.back() ==
        doctest::Approx(full.trace.current.back()).epsilon(1e-7));

  CHECK_THROWS_AS(propagate(sys, Operator::Zero(3, 3), t_final, 4, opt), ConfigError);
}

TEST_CASE("closed evolution preserves trace, purity, and energy") {
  FockBasis basis(2, 2);
  const Operator h = build_hamiltonian(basis, two_site_params(0.1, 0.3, 0.05));
  const SparseOp gen = commutator_super(h);

  Operator rho0 = Operator::Zero(basis.dim(), basis.dim());
  rho0(basis.index_of({1, 1}), basis.index_of({1, 1})) = 1.0;

  Eigen::VectorXcd y = vec_of(rho0);
  OdeOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-12;
  opt.max_step = 5.0;
  integrate_ode([&](double, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) { dv = gen * v; },
                y, 0.0, 200.0, opt);

  const Operator rho = Eigen::Map<const Operator>(y.data(), basis.dim(), basis.dim());
  CHECK(std::abs(rho.trace().real() - 1.0) < 1e-8);
  CHECK(std::abs((rho * rho).trace().real() - 1.0) < 1e-8);
  CHECK(std::abs((h * rho).trace().real() - (h * rho0).trace().real()) < 1e-8);
  CHECK((rho - rho.adjoint()).norm() < 1e-8);
}

TEST_CASE("a uniform site-energy shift leaves the steady current unchanged") {
  FockBasis basis(3, 1);
  BoseHubbardParams p;
  p.n_sites = 3;
  p.depth = 15.0;
  p.omega = {0.0, 0.2, -0.1};
  p.u = {0.0, 0.0, 0.0};
  p.j = {0.03, 0.03};
  const Operator h = build_hamiltonian(basis, p);
  const ReservoirSpec r{0.015};

  const double base = stationary_state(h, r, basis).current;
  const double shifted = stationary_state(h + 0.7 * total_number(basis), r, basis).current;
  CHECK(shifted == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("reachable towers close at the expected sizes") {
  struct Case {
    int sites, n_max, expect;
  };
  for (const Case& c : {Case{5, 1, 252}, Case{2, 2, 19}, Case{2, 1, 6}}) {
    FockBasis basis(c.sites, c.n_max);
    const int d = basis.dim();
    BoseHubbardParams p;
    p.n_sites = c.sites;
    p.depth = 15.0;
    p.omega.assign(static_cast<std::size_t>(c.sites), 0.0);
    for (int j = 1; j < c.sites; ++j) p.omega[static_cast<std::size_t>(j)] = 0.1 * j;
    p.u.assign(static_cast<std::size_t>(c.sites), 0.6);
    p.j.assign(static_cast<std::size_t>(c.sites - 1), 0.0);
    const Operator h_static = build_hamiltonian(basis, p);
    Operator h_hop = Operator::Zero(d, d);
    for (int j = 1; j < c.sites; ++j) {
      const Operator hop = creation(basis, j) * annihilation(basis, j - 1);
      h_hop += hop + hop.adjoint();
    }
    const SparseOp l0 = liouvillian_matrix(h_static, ReservoirSpec{0.01}, basis);
    const SparseOp k_hop = commutator_super(h_hop);
    std::vector<int> seeds;
    for (int i = 0; i < d; ++i) seeds.push_back(i * (d + 1));

    const Restriction set = reachable_restriction({&l0, &k_hop}, seeds, d * d);
    CHECK(set.dim() == c.expect);
    CHECK(set.full_dim == d * d);
    for (int i = 0; i < set.dim(); ++i)
      CHECK(set.inverse[static_cast<std::size_t>(set.coords[static_cast<std::size_t>(i)])] == i);
  }
}

TEST_CASE("restriction rejects generators that leak off the coordinate set") {
  FockBasis basis(2, 1);
  const Operator h_static = build_hamiltonian(basis, two_site_params(0.1, 0.0, 0.0));
  const SparseOp l0 = liouvillian_matrix(h_static, ReservoirSpec{0.01}, basis);

  // Without hopping nothing reaches the drain site: the closure of the vacuum
  // holds only the two pump-ladder populations.
  const Restriction diag_set = reachable_restriction({&l0}, {0}, 16);
  CHECK(diag_set.dim() == 2);

  Operator h_hop = Operator::Zero(4, 4);
  const Operator hop = creation(basis, 1) * annihilation(basis, 0);
  h_hop += hop + hop.adjoint();
  const SparseOp k_hop = commutator_super(h_hop);
  CHECK_THROWS_AS(restrict_to(k_hop, diag_set), SolverError);

  CHECK_THROWS_AS(reachable_restriction({&l0}, {16}, 16), ConfigError);
}

TEST_CASE("gather and scatter are inverse on the support") {
  FockBasis basis(2, 2);
  const Operator vac = vacuum_state(basis);
  CHECK(nonzero_coords(vac) == std::vector<int>{0});

  const Operator h_static = build_hamiltonian(basis, two_site_params(0.1, 0.6, 0.0));
  const SparseOp l0 = liouvillian_matrix(h_static, ReservoirSpec{0.01}, basis);
  const Restriction set = reachable_restriction({&l0}, {0}, 81);
  const Eigen::VectorXcd y = gather(vac, set);
  CHECK((scatter(y, set) - vac).norm() == 0.0);
}

TEST_CASE("floquet fixed point agrees with period-averaged relaxation") {
  LatticeSpec spec = two_site_geom(0.1);
  const TunnelingFit fit = fit_tunneling(spec);
  const ModulationScheme drive =
      make_polychromatic(spec.link_offsets(), spec.v_min, spec.v_max, fit.beta);
  DrivenSystem sys = make_driven_system(spec, drive, 1, 2.0, fit);

  SolverOptions fl;
  const double floq = steady_current(sys, fl);
  CHECK(floq > 0.0);

  SolverOptions pr = fl;
  pr.method = SteadyMethod::protocol;
  pr.t_max_in_kappa_units = 200.0;
  const double prot = steady_current(sys, pr);
  CHECK(prot == doctest::Approx(floq).epsilon(5e-2));
}

TEST_CASE("stroboscopic evolution stays on the reachable subset") {
  LatticeSpec spec = two_site_geom(0.1);
  const TunnelingFit fit = fit_tunneling(spec);
  const ModulationScheme drive =
      make_polychromatic(spec.link_offsets(), spec.v_min, spec.v_max, fit.beta);
  DrivenSystem sys = make_driven_system(spec, drive, 1, 2.0, fit);

  SolverOptions opt;
  const PeriodMap pm = build_period_map(sys, opt);
  CHECK(pm.period == doctest::Approx(kTau / 0.1).epsilon(1e-12));
  CHECK(pm.set.dim() == 6);

  const CurrentTrace tr = floquet_trace(pm, vacuum_state(sys.basis), 40, 5);
  REQUIRE(tr.times.size() == 9);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == doctest::Approx(40.0 * pm.period));
  CHECK(tr.current.front() == 0.0);
  CHECK(tr.current.back() > 0.0);

  Operator off_tower = Operator::Zero(4, 4);
  off_tower(0, 1) = 0.5;
  off_tower(1, 0) = 0.5;
  CHECK_THROWS_AS(floquet_trace(pm, off_tower, 4, 1), ConfigError);

  DrivenSystem wide = make_driven_system(spec, drive, 2, 2.0, fit);
  CHECK_THROWS_AS(floquet_steady_current(wide, opt, &pm), SolverError);

  const FloquetSteady fs = floquet_steady_current(sys, opt, &pm);
  CHECK(fs.fixed_point_residual < 1e-8);
  CHECK(std::abs(fs.rho_start.trace().real() - 1.0) < 1e-10);
  CHECK(fs.mean_current == doctest::Approx(steady_current(sys, opt)).epsilon(1e-12));
}

TEST_CASE("static schemes have no drive period to map") {
  DrivenSystem sys =
      make_stationary_system(two_site_params(0.1, 0.0, 0.02), two_site_geom(0.1), 1, 0.01);
  SolverOptions opt;
  CHECK_THROWS_AS(build_period_map(sys, opt), SolverError);
  CHECK_THROWS_AS(steady_current_protocol(sys, opt), SolverError);
}

TEST_CASE("zero hopping blocks transport") {
  FockBasis basis(2, 1);
  const Operator h = build_hamiltonian(basis, two_site_params(0.0, 0.0, 0.0));
  const StationaryResult ss = stationary_state(h, ReservoirSpec{0.01}, basis);
  CHECK(std::abs(ss.current) < 1e-12);
  const int pumped = basis.index_of({1, 0});
  CHECK(ss.rho(pumped, pumped).real() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a disconnected interior site degenerates the kernel") {
  FockBasis basis(3, 1);
  BoseHubbardParams p;
  p.n_sites = 3;
  p.depth = 15.0;
  p.omega = {0.0, 0.1, 0.2};
  p.u = {0.0, 0.0, 0.0};
  p.j = {0.0, 0.0};
  const Operator h = build_hamiltonian(basis, p);
  CHECK_THROWS_AS(stationary_state(h, ReservoirSpec{0.01}, basis), SolverError);
}

TEST_CASE("driven system assembly") {
  LatticeSpec spec;
  spec.delta = {-0.1, 0.3, -0.4, 0.2};
  const TunnelingFit fit = fit_tunneling(spec);
  const ModulationScheme drive =
      make_polychromatic(spec.link_offsets(), spec.v_min, spec.v_max, fit.beta);

  DrivenSystem sys = make_driven_system(spec, drive, 2, 15.0, fit);
  CHECK(sys.basis.dim() == 243);
  CHECK(sys.j_hop == doctest::Approx(fit.j_max));
  CHECK(sys.reservoir.kappa == doctest::Approx(fit.j_max / 15.0));
  CHECK(sys.has_interactions);

  const Operator h = sys.hamiltonian_at(0.37);
  CHECK((h - h.adjoint()).norm() < 1e-12);

  const double u0 = onsite_interaction(spec, depth_at(drive, 0.0));
  const Operator expect0 = sys.h_static + u0 * sys.h_int -
                           sys.j_hop * tunneling_factor(drive, 0.0) * sys.h_hop;
  CHECK((sys.hamiltonian_at(0.0) - expect0).norm() < 1e-12);

  CHECK(sys.max_time_step() <= (kTau / fastest_frequency(drive)) / 20.0 + 1e-12);

  DrivenSystem hard = make_driven_system(spec, drive, 1, 15.0, fit);
  CHECK_FALSE(hard.has_interactions);
  CHECK(hard.basis.dim() == 32);

  CHECK_THROWS_AS(make_driven_system(spec, drive, 1, 0.0, fit), ConfigError);
}

TEST_CASE("vacuum state and drain current basics") {
  FockBasis basis(2, 2);
  const Operator vac = vacuum_state(basis);
  CHECK(vac.trace().real() == doctest::Approx(1.0));
  CHECK(vac(0, 0).real() == doctest::Approx(1.0));

  const ReservoirSpec r{0.25};
  Operator rho = Operator::Zero(basis.dim(), basis.dim());
  rho(basis.index_of({0, 2}), basis.index_of({0, 2})) = 1.0;
  CHECK(drain_current(rho, r, basis) == doctest::Approx(0.5).epsilon(1e-12));
}

}
