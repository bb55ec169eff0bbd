#include "qsl/reconstruct.hpp"

#include <limits>
#include <string>

namespace qsl {

Index numerical_rank(const ComplexMatrix& a, double rtol) {
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<ComplexMatrix> svd(a);
  const RealVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0) return 0;
  return (s.array() > rtol * s(0)).count();
}

ReshapedMatrix reconstruct_full(const std::vector<ComplexMatrix>& row_blocks, Index r,
                                const ReconstructOptions& opt) {
  const auto n = static_cast<Index>(row_blocks.size());
  detail::require(n >= 1, "reconstruct_full: no blocks");
  for (const auto& b : row_blocks)
    detail::require(b.rows() == n && b.cols() == n, "reconstruct_full: expected " + std::to_string(n) + " blocks of " +
                                                        std::to_string(n) + "x" + std::to_string(n));
  detail::require(r >= 1 && r <= n, "reconstruct_full: rank " + std::to_string(r) + " outside [1, N]");
  detail::require(opt.anchor >= 0 && opt.anchor < n, "reconstruct_full: anchor outside the block row");

  const double rtol = opt.rtol >= 0 ? opt.rtol
                                    : static_cast<double>(std::max(n, r)) * std::numeric_limits<double>::epsilon();
  const Index a = opt.anchor;
  const Index observed = numerical_rank(row_blocks[static_cast<std::size_t>(a)], rtol);
  if (observed < r)
    throw AssumptionViolation("reconstruct_full: anchor block has numerical rank " + std::to_string(observed) +
                                  ", below the requested rank " + std::to_string(r),
                              static_cast<long>(observed));

  ComplexMatrix row(n, n * n);
  for (Index l = 0; l < n; ++l) row.middleCols(l * n, n) = row_blocks[static_cast<std::size_t>(l)];

  const auto svd = randomized_svd(row, r, opt.oversample, opt.power_iters, opt.rsvd_seed);
  const ComplexMatrix& j = svd.right;  // N^2 x r
  const ComplexMatrix pinv_ja = pseudo_inverse(ComplexMatrix(j.middleRows(a * n, n).adjoint()), rtol);  // N x r

  ReshapedMatrix out;
  out.dim_n = n;
  out.matrix.resize(n * n, n * n);
  const ComplexMatrix jt = j.adjoint();
  for (Index k = 0; k < n; ++k) {
    if (k == a) {
      // C_a J^dagger with C_a = K_aa pinv(J_a^dagger) = U S
      out.matrix.middleRows(k * n, n) = svd.left * svd.singular_values.cast<Complex>().asDiagonal() * jt;
      continue;
    }
    const ComplexMatrix k_ka = row_blocks[static_cast<std::size_t>(k)].adjoint();
    const ComplexMatrix c = k_ka * pinv_ja;
    out.matrix.middleRows(k * n, n) = c * jt;
  }
  if (opt.hermitize) out.matrix = (0.5 * (out.matrix + out.matrix.adjoint())).eval();
  return out;
}

}  // namespace qsl
