#pragma once

// Deterministic completion of a rank-r Hermitian reshaped matrix from one of
// its block rows.

#include <cstdint>
#include <vector>

#include "qsl/linalg.hpp"
#include "qsl/types.hpp"

namespace qsl {

struct ReconstructOptions {
  /// Relative threshold for the anchor-block rank check and the pseudo-inverse;
  /// negative selects max(N, r) * epsilon.
  double rtol = -1;
  /// Index a of the supplied block row (its diagonal block is K_aa).
  Index anchor = 0;
  /// Replace the output by (K + K^dagger) / 2.
  bool hermitize = false;
  std::uint64_t rsvd_seed = 0;
  Index oversample = 10;
  int power_iters = 2;
};

/// Given blocks K_a1 .. K_aN of row a:
///   U S J^dagger = K_a (rank-r randomized SVD),
///   K_ka = K_ak^dagger, C_k = K_ka pinv(J_a^dagger), K_k = C_k J^dagger,
/// where J_a holds the rows of J belonging to block column a.
/// Throws AssumptionViolation when K_aa has fewer than r singular values
/// above rtol * sigma_max.
ReshapedMatrix reconstruct_full(const std::vector<ComplexMatrix>& row_blocks, Index r,
                                const ReconstructOptions& options = {});

/// Numerical rank of a matrix: singular values above rtol * sigma_max.
Index numerical_rank(const ComplexMatrix& a, double rtol);

}  // namespace qsl
