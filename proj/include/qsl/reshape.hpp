#pragma once

// Vectorization and reshaping calculus. vec stacks columns; reshape_R maps
// entry (k, l) of block (i, j) to position (l*N + k, j*N + i), so that
// R(B kron C) = vec(C) vec(B)^T and R(R(A)) = A.

#include <cmath>
#include <string>

#include "qsl/linalg.hpp"
#include "qsl/types.hpp"

namespace qsl {

/// Integer N with N*N == side, or -1.
inline Index exact_sqrt(Index side) {
  if (side < 0) return -1;
  auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(side))));
  while (n * n > side) --n;
  while ((n + 1) * (n + 1) <= side) ++n;
  return n * n == side ? n : -1;
}

template <typename Derived>
Vec<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& a) {
  detail::require(a.rows() == a.cols(), "vec: expected a square matrix, got " + std::to_string(a.rows()) + "x" +
                                            std::to_string(a.cols()));
  return a.eval().reshaped();
}

template <typename Derived>
Mat<typename Derived::Scalar> unvec(const Eigen::MatrixBase<Derived>& v) {
  const Index n = exact_sqrt(v.size());
  detail::require(v.cols() == 1 && n > 0, "unvec: length " + std::to_string(v.size()) + " is not a perfect square");
  return v.eval().reshaped(n, n);
}

/// tr[A^dagger B].
template <typename DA, typename DB>
typename DA::Scalar hs_inner(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "hs_inner: shape mismatch");
  return (a.array().conjugate() * b.array()).sum();
}

template <typename DB, typename DC>
Mat<typename DB::Scalar> kron(const Eigen::MatrixBase<DB>& b, const Eigen::MatrixBase<DC>& c) {
  detail::require(b.size() > 0 && c.size() > 0, "kron: empty operand");
  const Index r = c.rows(), s = c.cols();
  Mat<typename DB::Scalar> out(b.rows() * r, b.cols() * s);
  for (Index j = 0; j < b.cols(); ++j)
    for (Index i = 0; i < b.rows(); ++i) out.block(i * r, j * s, r, s) = b(i, j) * c;
  return out;
}

template <typename Derived>
Mat<typename Derived::Scalar> reshape_R(const Eigen::MatrixBase<Derived>& a) {
  const Index n = exact_sqrt(a.rows());
  detail::require(a.rows() == a.cols() && n > 0,
                  "reshape_R: expected an N^2 x N^2 matrix, got " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()));
  Mat<typename Derived::Scalar> out(a.rows(), a.cols());
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      for (Index l = 0; l < n; ++l)
        for (Index k = 0; k < n; ++k) out(l * n + k, j * n + i) = a(i * n + k, j * n + l);
  return out;
}

/// mat(S) with vec(S rho) = mat(S) vec(rho).
ComplexMatrix superop_matrix(const Superoperator& s);

/// sum vec(V_k) vec(V_k)^dagger - sum vec(U_k) vec(U_k)^dagger, built from
/// outer products without forming Kronecker products.
ReshapedMatrix choi_reshape(const Superoperator& s);

}  // namespace qsl
