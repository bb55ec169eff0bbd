#pragma once

#include <vector>

#include "qsl/linalg.hpp"

namespace qsl {

/// Signed Kraus form: rho -> sum_k V_k rho V_k^dagger - sum_k U_k rho U_k^dagger.
struct Superoperator {
  Index dim_n = 0;
  std::vector<ComplexMatrix> plus_ops;
  std::vector<ComplexMatrix> minus_ops;

  Index r_plus() const { return static_cast<Index>(plus_ops.size()); }
  Index r_minus() const { return static_cast<Index>(minus_ops.size()); }
  Index rank() const { return r_plus() + r_minus(); }
  /// Throws DimensionError unless every operator is dim_n x dim_n.
  void validate() const;
};

struct Lindbladian {
  ComplexMatrix hamiltonian;
  std::vector<ComplexMatrix> jumps;

  Index dim_n() const { return hamiltonian.rows(); }
  Index n_jumps() const { return static_cast<Index>(jumps.size()); }
};

/// The N^2 x N^2 rearranged superoperator matrix, viewed as an N x N grid of
/// N x N blocks. Block indices are 0-based.
struct ReshapedMatrix {
  Index dim_n = 0;
  ComplexMatrix matrix;

  auto block(Index k, Index l) { return matrix.block(k * dim_n, l * dim_n, dim_n, dim_n); }
  auto block(Index k, Index l) const { return matrix.block(k * dim_n, l * dim_n, dim_n, dim_n); }
  /// Block row k as an N x N^2 matrix.
  auto block_row(Index k) const { return matrix.middleRows(k * dim_n, dim_n); }
};

}  // namespace qsl
