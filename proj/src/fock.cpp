#include "modlat/fock.hpp"

#include <cmath>
#include <cstdio>

namespace modlat {

FockBasis::FockBasis(int sites, int max_occ) : n_sites(sites), n_max(max_occ) {
  if (sites < 1) throw ConfigError("fock basis needs at least one site");
  if (max_occ < 1) throw ConfigError("fock basis needs max occupation >= 1");
  const long long radix = max_occ + 1;
  long long d = 1;
  place_.assign(sites, 0);
  for (int j = sites - 1; j >= 0; --j) {
    place_[j] = static_cast<int>(d);
    d *= radix;
    if (d > (1 << 26)) throw ConfigError("fock basis dimension too large");
  }
  dim_ = static_cast<int>(d);
}

int FockBasis::index_of(const std::vector<int>& occupations) const {
  if (static_cast<int>(occupations.size()) != n_sites)
    throw ConfigError("occupation list length does not match site count");
  int idx = 0;
  for (int j = 0; j < n_sites; ++j) {
    const int n = occupations[j];
    if (n < 0 || n > n_max) throw ConfigError("occupation outside [0, n_max]");
    idx += n * place_[j];
  }
  return idx;
}

std::vector<int> FockBasis::state_of(int index) const {
  if (index < 0 || index >= dim_) throw ConfigError("basis index out of range");
  std::vector<int> occ(n_sites);
  for (int j = 0; j < n_sites; ++j) {
    occ[j] = (index / place_[j]) % (n_max + 1);
  }
  return occ;
}

int FockBasis::occupation(int index, int site) const {
  return (index / place_[site]) % (n_max + 1);
}

Operator annihilation(const FockBasis& basis, int site) {
  if (site < 0 || site >= basis.n_sites) throw ConfigError("site index out of range");
  const int d = basis.dim();
  Operator a = Operator::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    const int occ = basis.occupation(n, site);
    if (occ == 0) continue;
    auto state = basis.state_of(n);
    state[site] = occ - 1;
    a(basis.index_of(state), n) = std::sqrt(static_cast<double>(occ));
  }
  return a;
}

Operator creation(const FockBasis& basis, int site) {
  return annihilation(basis, site).adjoint();
}

Operator number_op(const FockBasis& basis, int site) {
  if (site < 0 || site >= basis.n_sites) throw ConfigError("site index out of range");
  const int d = basis.dim();
  Operator n = Operator::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = basis.occupation(k, site);
  return n;
}

Operator total_number(const FockBasis& basis) {
  const int d = basis.dim();
  Operator n = Operator::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    int total = 0;
    for (int j = 0; j < basis.n_sites; ++j) total += basis.occupation(k, j);
    n(k, k) = total;
  }
  return n;
}

Operator build_hamiltonian(const FockBasis& basis, const BoseHubbardParams& params) {
  if (params.n_sites != basis.n_sites)
    throw ConfigError("hamiltonian parameters do not match basis site count");
  const int d = basis.dim();
  Operator h = Operator::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    double diag = 0.0;
    for (int j = 0; j < basis.n_sites; ++j) {
      const double n = basis.occupation(k, j);
      diag += params.omega[j] * n + 0.5 * params.u[j] * n * (n - 1.0);
    }
    h(k, k) = diag;
  }
  for (int j = 1; j < basis.n_sites; ++j) {
    const Operator hop = creation(basis, j) * annihilation(basis, j - 1);
    h -= params.j[j - 1] * (hop + hop.adjoint());
  }
  return h;
}

void write_operator_triplets(std::ostream& os, const Operator& op, double drop_tol) {
  long long nnz = 0;
  for (int c = 0; c < op.cols(); ++c)
    for (int r = 0; r < op.rows(); ++r)
      if (std::abs(op(r, c)) > drop_tol) ++nnz;
  char line[128];
  std::snprintf(line, sizeof line, "dims %ld %ld %lld\n", static_cast<long>(op.rows()),
                static_cast<long>(op.cols()), nnz);
  os << line;
  for (int c = 0; c < op.cols(); ++c) {
    for (int r = 0; r < op.rows(); ++r) {
      const std::complex<double> v = op(r, c);
      if (std::abs(v) <= drop_tol) continue;
      std::snprintf(line, sizeof line, "%d %d %.12g %.12g\n", r, c, v.real(), v.imag());
      os << line;
    }
  }
}

}  // namespace modlat
