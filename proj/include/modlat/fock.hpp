#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <vector>

#include "modlat/errors.hpp"
#include "modlat/lattice.hpp"

namespace modlat {

using Operator = Eigen::MatrixXcd;

// Number-truncated bosonic product basis. States are ordered
// lexicographically with site 1 as the most significant digit, so index
// arithmetic is positional in base (n_max + 1) and serialized operators are
// reproducible across builds.
struct FockBasis {
  int n_sites = 0;
  int n_max = 0;

  FockBasis() = default;
  FockBasis(int sites, int max_occ);

  int dim() const { return dim_; }
  int index_of(const std::vector<int>& occupations) const;
  std::vector<int> state_of(int index) const;
  int occupation(int index, int site) const;

 private:
  int dim_ = 0;
  std::vector<int> place_;  // positional weight per site
};

// Annihilation operator on `site` (0-based): <m|a|n> = sqrt(n_site) when m is
// n lowered at `site`. Above the truncation nothing exists, so a† (the
// adjoint) ends the ladder at n_max: [a, a†] deviates from 1 on states with
// n_site = n_max, by -(n_max) instead of +1 there.
Operator annihilation(const FockBasis& basis, int site);
Operator creation(const FockBasis& basis, int site);
Operator number_op(const FockBasis& basis, int site);
Operator total_number(const FockBasis& basis);

// H = sum_j omega_j n_j + (1/2) sum_j u_j n_j (n_j - 1)
//     - sum_{j>=1} J_j (a†_j a_{j-1} + a†_{j-1} a_j)
Operator build_hamiltonian(const FockBasis& basis, const BoseHubbardParams& params);

// Writes nonzero entries as "row col real imag" lines (0-based indices,
// 12 significant digits), preceded by a "dims rows cols nnz" header line.
void write_operator_triplets(std::ostream& os, const Operator& op, double drop_tol = 0.0);

}  // namespace modlat
