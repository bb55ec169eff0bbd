#pragma once

// Dense linear-algebra facade over Eigen: SVD variants, pseudo-inverse,
// least squares and seeded Gaussian sketches.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <type_traits>

#include "qsl/errors.hpp"

namespace qsl {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Rng = std::mt19937_64;

/// Deterministic stream splitting: mixes (master, stream) with splitmix64 so
/// that nearby seeds yield unrelated generators.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_a, std::uint64_t stream_b);

namespace detail {
template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}
}  // namespace detail

/// Standard Gaussian entries; for complex scalars the real and imaginary
/// parts are N(0, 1/2) so that E|z|^2 = 1.
template <typename Scalar>
Mat<Scalar> gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Mat<Scalar> out(rows, cols);
  if constexpr (detail::is_complex<Scalar>::value) {
    using Real = typename Scalar::value_type;
    std::normal_distribution<Real> dist(Real(0), std::sqrt(Real(0.5)));
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) {
        const Real re = dist(rng);
        const Real im = dist(rng);
        out(i, j) = Scalar(re, im);
      }
  } else {
    std::normal_distribution<Scalar> dist(Scalar(0), Scalar(1));
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) out(i, j) = dist(rng);
  }
  return out;
}

ComplexMatrix complex_gaussian(Index rows, Index cols, std::uint64_t seed);
ComplexMatrix complex_gaussian(Index rows, Index cols, Rng& rng);

template <typename Scalar>
struct SvdResult {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  Mat<Scalar> left;
  Vec<Real> singular_values;
  Mat<Scalar> right;

  Index rank() const { return singular_values.size(); }
  Mat<Scalar> reconstruct() const {
    return left * singular_values.template cast<Scalar>().asDiagonal() * right.adjoint();
  }
};

/// Top-k singular triplets from a full (divide-and-conquer) SVD.
template <typename Derived>
SvdResult<typename Derived::Scalar> truncated_svd(const Eigen::MatrixBase<Derived>& a, Index k) {
  using Scalar = typename Derived::Scalar;
  const Index kmax = std::min(a.rows(), a.cols());
  detail::require(k >= 1 && k <= kmax,
                  "truncated_svd: k=" + std::to_string(k) + " outside [1, " + std::to_string(kmax) + "]");
  Eigen::BDCSVD<Mat<Scalar>> svd(a.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult<Scalar> out;
  out.left = svd.matrixU().leftCols(k);
  out.singular_values = svd.singularValues().head(k);
  out.right = svd.matrixV().leftCols(k);
  return out;
}

/// Randomized range finder with power iterations followed by an SVD of the
/// projected matrix. Oversampling is capped so the sketch never exceeds
/// min(rows, cols) columns.
template <typename Derived>
SvdResult<typename Derived::Scalar> randomized_svd(const Eigen::MatrixBase<Derived>& a, Index k,
                                                   Index oversample = 10, int power_iters = 2,
                                                   std::uint64_t seed = 0) {
  using Scalar = typename Derived::Scalar;
  const Index kmax = std::min(a.rows(), a.cols());
  detail::require(k >= 1 && k <= kmax,
                  "randomized_svd: k=" + std::to_string(k) + " outside [1, " + std::to_string(kmax) + "]");
  detail::require(oversample >= 0 && power_iters >= 0, "randomized_svd: negative parameters");
  const Index width = std::min(k + oversample, kmax);

  Rng rng(seed);
  const Mat<Scalar> omega = gaussian_matrix<Scalar>(a.cols(), width, rng);
  auto orthonormal = [width](const Mat<Scalar>& y) {
    Eigen::HouseholderQR<Mat<Scalar>> qr(y);
    return Mat<Scalar>(qr.householderQ() * Mat<Scalar>::Identity(y.rows(), width));
  };
  Mat<Scalar> q = orthonormal(a * omega);
  for (int it = 0; it < power_iters; ++it) {
    const Mat<Scalar> z = orthonormal(a.adjoint() * q);
    q = orthonormal(a * z);
  }
  const Mat<Scalar> small = q.adjoint() * a;
  Eigen::BDCSVD<Mat<Scalar>> svd(small, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult<Scalar> out;
  out.left = q * svd.matrixU().leftCols(k);
  out.singular_values = svd.singularValues().head(k);
  out.right = svd.matrixV().leftCols(k);
  return out;
}

/// Moore-Penrose pseudo-inverse. Singular values at or below rtol * sigma_max are
/// dropped; a negative rtol selects max(rows, cols) * epsilon.
template <typename Derived>
Mat<typename Derived::Scalar> pseudo_inverse(const Eigen::MatrixBase<Derived>& a, double rtol = -1.0) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  detail::require(a.rows() > 0 && a.cols() > 0, "pseudo_inverse: empty matrix");
  if (rtol < 0)
    rtol = static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<Real>::epsilon();
  Eigen::BDCSVD<Mat<Scalar>> svd(a.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const Real cutoff = s.size() > 0 ? Real(rtol) * s(0) : Real(0);
  Vec<Scalar> inv(s.size());
  for (Index i = 0; i < s.size(); ++i) inv(i) = (s(i) > cutoff && s(i) > Real(0)) ? Scalar(Real(1) / s(i)) : Scalar(0);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

enum class LsMethod { qr, normal_equations };

/// min ||A X - B||_F. Householder QR on well-posed tall systems, complete
/// orthogonal decomposition (minimum-norm solution) otherwise. The normal
/// equations path is opt-in and falls back to QR when the Gram matrix is
/// poorly conditioned.
template <typename DA, typename DB>
Mat<typename DA::Scalar> least_squares(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                                       LsMethod method = LsMethod::qr) {
  using Scalar = typename DA::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  detail::require(a.rows() == b.rows(), "least_squares: A has " + std::to_string(a.rows()) +
                                            " rows but B has " + std::to_string(b.rows()));
  detail::require(a.cols() > 0, "least_squares: A has no columns");
  const Real eps = std::numeric_limits<Real>::epsilon();

  if (method == LsMethod::normal_equations && a.rows() >= a.cols()) {
    Mat<Scalar> gram = Mat<Scalar>::Zero(a.cols(), a.cols());
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(a.adjoint());
    Eigen::LLT<Mat<Scalar>> llt(gram.template selfadjointView<Eigen::Lower>());
    if (llt.info() == Eigen::Success) {
      const auto d = llt.matrixLLT().diagonal().real();
      const Real ratio = d.minCoeff() / d.maxCoeff();
      // squared ratio bounds the Gram condition number
      if (ratio * ratio > Real(1e6) * eps) return llt.solve(a.adjoint() * b);
    }
  }

  if (a.rows() >= a.cols()) {
    Eigen::HouseholderQR<Mat<Scalar>> qr(a.eval());
    const auto d = qr.matrixQR().diagonal().cwiseAbs();
    if (d.maxCoeff() > Real(0) && d.minCoeff() > Real(1e-10) * d.maxCoeff()) return qr.solve(b.eval());
  }
  Eigen::CompleteOrthogonalDecomposition<Mat<Scalar>> cod(a.eval());
  return cod.solve(b.eval());
}

}  // namespace qsl
