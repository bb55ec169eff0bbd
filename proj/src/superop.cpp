#include "qsl/superop.hpp"

#include <string>

namespace qsl {

namespace {

void require_square(const ComplexMatrix& m, Index n, const char* what) {
  detail::require(m.rows() == n && m.cols() == n, std::string(what) + ": expected " + std::to_string(n) + "x" +
                                                      std::to_string(n) + ", got " + std::to_string(m.rows()) +
                                                      "x" + std::to_string(m.cols()));
}

}  // namespace

ComplexMatrix apply_superop(const Superoperator& s, const ComplexMatrix& rho) {
  s.validate();
  require_square(rho, s.dim_n, "apply_superop");
  ComplexMatrix out = ComplexMatrix::Zero(s.dim_n, s.dim_n);
  for (const auto& v : s.plus_ops) out.noalias() += v * rho * v.adjoint();
  for (const auto& u : s.minus_ops) out.noalias() -= u * rho * u.adjoint();
  return out;
}

ComplexMatrix lindblad_drift(const Lindbladian& l) {
  const Index n = l.dim_n();
  require_square(l.hamiltonian, n, "Lindbladian hamiltonian");
  ComplexMatrix q = Complex(0, -1) * l.hamiltonian;
  for (const auto& j : l.jumps) {
    require_square(j, n, "Lindbladian jump");
    q.noalias() -= 0.5 * j.adjoint() * j;
  }
  return q;
}

ComplexMatrix lindblad_apply(const Lindbladian& l, const ComplexMatrix& rho) {
  const ComplexMatrix q = lindblad_drift(l);
  require_square(rho, l.dim_n(), "lindblad_apply");
  ComplexMatrix out = q * rho + rho * q.adjoint();
  for (const auto& j : l.jumps) out.noalias() += j * rho * j.adjoint();
  return out;
}

Superoperator lindblad_canonical(const Lindbladian& l, double rtol) {
  const Index n = l.dim_n();
  const Index nj = l.n_jumps();
  const Index dim = nj + 2;
  const ComplexMatrix q = lindblad_drift(l);

  ComplexMatrix span(n * n, dim);
  span.col(0) = q.reshaped();
  span.col(1) = ComplexMatrix::Identity(n, n).reshaped();
  for (Index k = 0; k < nj; ++k) span.col(2 + k) = l.jumps[k].reshaped();

  Eigen::HouseholderQR<ComplexMatrix> qr(span);
  const ComplexMatrix basis = qr.householderQ() * ComplexMatrix::Identity(n * n, dim);
  const ComplexMatrix r = qr.matrixQR().topRows(dim).triangularView<Eigen::Upper>();
  const RealVector rdiag = r.diagonal().cwiseAbs();
  if (rdiag.minCoeff() <= rtol * rdiag.maxCoeff())
    throw DegeneracyError("lindblad_canonical: {vec(I), vec(Q), vec(J_k)} is linearly dependent");

  // vec(Q)vec(I)^dagger + vec(I)vec(Q)^dagger + sum vec(J)vec(J)^dagger = span * gamma * span^dagger
  ComplexMatrix gamma = ComplexMatrix::Identity(dim, dim);
  gamma(0, 0) = gamma(1, 1) = 0;
  gamma(0, 1) = gamma(1, 0) = 1;
  const ComplexMatrix small = r * gamma * r.adjoint();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (small + small.adjoint()));
  const RealVector& lambda = eig.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();

  Superoperator out;
  out.dim_n = n;
  for (Index i = dim - 1; i >= 0; --i) {
    const double li = lambda(i);
    if (std::abs(li) <= rtol * scale)
      throw DegeneracyError("lindblad_canonical: reshaped Lindbladian has rank below N_J + 2");
    const ComplexMatrix op = std::sqrt(std::abs(li)) * ComplexVector(basis * eig.eigenvectors().col(i)).reshaped(n, n);
    (li > 0 ? out.plus_ops : out.minus_ops).push_back(op);
  }
  return out;
}

ComplexMatrix haar_isometry(Index dim, Index cols, Rng& rng) {
  detail::require(cols >= 1 && cols <= dim, "haar_isometry: need 1 <= cols <= dim");
  const ComplexMatrix g = complex_gaussian(dim, cols, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(dim, cols);
  for (Index j = 0; j < cols; ++j) {
    const Complex d = qr.matrixQR()(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

Superoperator random_channel(Index n, Index kraus_rank, std::uint64_t seed) {
  detail::require(n >= 1, "random_channel: n must be positive");
  detail::require(kraus_rank >= 1 && kraus_rank <= n * n,
                  "random_channel: kraus_rank " + std::to_string(kraus_rank) + " outside [1, n^2]");
  const ComplexMatrix g = complex_gaussian(kraus_rank * n, n, seed);
  // polar factor G (G^dagger G)^{-1/2} = U Z^dagger from the thin SVD of G
  Eigen::BDCSVD<ComplexMatrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const ComplexMatrix w = svd.matrixU() * svd.matrixV().adjoint();

  ComplexMatrix kraus_cols(n * n, kraus_rank);
  for (Index k = 0; k < kraus_rank; ++k) kraus_cols.col(k) = w.middleRows(k * n, n).reshaped();
  // HS-orthogonalise: the columns of P * Sigma give the same Choi matrix
  Eigen::BDCSVD<ComplexMatrix> orth(kraus_cols, Eigen::ComputeThinU);
  Superoperator out;
  out.dim_n = n;
  for (Index k = 0; k < kraus_rank; ++k)
    out.plus_ops.push_back(orth.singularValues()(k) * ComplexVector(orth.matrixU().col(k)).reshaped(n, n));
  return out;
}

Lindbladian random_lindbladian(Index n, Index n_jumps, std::uint64_t seed) {
  detail::require(n >= 1 && n_jumps >= 1, "random_lindbladian: need n >= 1 and n_jumps >= 1");
  Rng rng(seed);
  Lindbladian l;
  const ComplexMatrix g = complex_gaussian(n, n, rng);
  l.hamiltonian = 0.5 * (g + g.adjoint());
  l.hamiltonian /= l.hamiltonian.norm();
  for (Index k = 0; k < n_jumps; ++k) {
    ComplexMatrix j = complex_gaussian(n, n, rng);
    l.jumps.push_back(j / j.norm());
  }
  return l;
}

ComplexMatrix random_density(Index n, Rng& rng) {
  detail::require(n >= 2, "random_density: n must be at least 2");
  const ComplexMatrix g = complex_gaussian(n, n, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

ComplexMatrix random_density(Index n, std::uint64_t seed) {
  Rng rng(seed);
  return random_density(n, rng);
}

ComplexMatrix random_observable(Index n, Rng& rng) {
  detail::require(n >= 2, "random_observable: n must be at least 2");
  const ComplexMatrix g = complex_gaussian(n, n, rng);
  ComplexMatrix o = (g + g.adjoint()) / std::sqrt(2.0);
  return o / o.norm();
}

ComplexMatrix random_observable(Index n, std::uint64_t seed) {
  Rng rng(seed);
  return random_observable(n, rng);
}

ReshapedMatrix haar_low_rank_hermitian(Index n, Index r_plus, Index r_minus, std::uint64_t seed) {
  const Index r = r_plus + r_minus;
  detail::require(n >= 1 && r_plus >= 0 && r_minus >= 0 && r >= 1 && r <= n * n,
                  "haar_low_rank_hermitian: rank " + std::to_string(r) + " outside [1, n^2]");
  Rng rng(seed);
  const ComplexMatrix p = haar_isometry(n * n, r, rng);
  std::normal_distribution<double> dist(0.0, 1.0);
  RealVector d(r);
  for (Index i = 0; i < r; ++i) {
    const double mag = std::abs(dist(rng)) + 0.5;
    d(i) = i < r_plus ? mag : -mag;
  }
  ReshapedMatrix out{n, p * d.cast<Complex>().asDiagonal() * p.adjoint()};
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint());
  return out;
}

Superoperator signed_kraus_from_reshaped(const ReshapedMatrix& k, double rtol) {
  const Index n = k.dim_n;
  detail::require(k.matrix.rows() == n * n && k.matrix.cols() == n * n, "signed_kraus_from_reshaped: bad shape");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (k.matrix + k.matrix.adjoint()));
  const RealVector& lambda = eig.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();
  Superoperator out;
  out.dim_n = n;
  for (Index i = lambda.size() - 1; i >= 0; --i) {
    if (std::abs(lambda(i)) <= rtol * scale) continue;
    const ComplexMatrix op = std::sqrt(std::abs(lambda(i))) * ComplexVector(eig.eigenvectors().col(i)).reshaped(n, n);
    (lambda(i) > 0 ? out.plus_ops : out.minus_ops).push_back(op);
  }
  return out;
}

}  // namespace qsl
