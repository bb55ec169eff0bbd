#pragma once

// Linear sensing operators X -> [<A_1, X>, ..., <A_M, X>] (unscaled) together
// with the two least-squares half-steps used by alternating minimisation on
// X = U V^dagger.

#include <memory>
#include <vector>

#include "qsl/linalg.hpp"
#include "qsl/measurement.hpp"

namespace qsl {

class SensingOperator {
 public:
  virtual ~SensingOperator() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual Index size() const = 0;

  virtual ComplexVector apply(const ComplexMatrix& x) const = 0;

  /// argmin_U ||A(U V^dagger) - b||.
  virtual ComplexMatrix solve_left(const ComplexMatrix& v, const ComplexVector& b, LsMethod method) const = 0;
  /// argmin_V ||A(U V^dagger) - b||.
  virtual ComplexMatrix solve_right(const ComplexMatrix& u, const ComplexVector& b, LsMethod method) const = 0;

  /// Explicit linear systems: A(U V^dagger) = left_system(V) vec(U)
  /// = right_system(U) vec(conj(V)).
  virtual ComplexMatrix left_system(const ComplexMatrix& v) const = 0;
  virtual ComplexMatrix right_system(const ComplexMatrix& u) const = 0;
};

/// General sensing matrices A_m of size d1 x d2, stored as columns conj(vec(A_m)).
class DenseSensing final : public SensingOperator {
 public:
  DenseSensing(Index d1, Index d2, ComplexMatrix conj_vec_columns);
  static DenseSensing from_matrices(const std::vector<ComplexMatrix>& a);

  Index rows() const override { return d1_; }
  Index cols() const override { return d2_; }
  Index size() const override { return table_.cols(); }

  ComplexVector apply(const ComplexMatrix& x) const override;
  ComplexMatrix solve_left(const ComplexMatrix& v, const ComplexVector& b, LsMethod method) const override;
  ComplexMatrix solve_right(const ComplexMatrix& u, const ComplexVector& b, LsMethod method) const override;
  ComplexMatrix left_system(const ComplexMatrix& v) const override;
  ComplexMatrix right_system(const ComplexMatrix& u) const override;

  /// Scales every sensing matrix by c.
  DenseSensing scaled(double c) const;
  const ComplexMatrix& table() const { return table_; }

 private:
  Index d1_, d2_;
  ComplexMatrix table_;  // (d1*d2) x M
};

/// p copies of one shared N x N observable set acting on X = [X_1 ... X_p]
/// (N x Np). Measurements are ordered block-major: [A(X_1); ...; A(X_p)].
class StackedBlockSensing final : public SensingOperator {
 public:
  StackedBlockSensing(const std::vector<ComplexMatrix>& observables, Index blocks);

  Index rows() const override { return n_; }
  Index cols() const override { return n_ * blocks_; }
  Index size() const override { return m_o_ * blocks_; }
  Index blocks() const { return blocks_; }
  Index observable_count() const { return m_o_; }

  ComplexVector apply(const ComplexMatrix& x) const override;
  ComplexMatrix solve_left(const ComplexMatrix& v, const ComplexVector& b, LsMethod method) const override;
  /// Decouples into one shared-design least-squares problem with p right-hand sides.
  ComplexMatrix solve_right(const ComplexMatrix& u, const ComplexVector& b, LsMethod method) const override;
  ComplexMatrix left_system(const ComplexMatrix& v) const override;
  ComplexMatrix right_system(const ComplexMatrix& u) const override;

  /// Dense equivalent (block-diagonal sensing matrices), for cross-checks.
  DenseSensing to_dense() const;

 private:
  Index n_, m_o_, blocks_;
  ComplexMatrix table_;  // N^2 x M_O, columns conj(vec(O_m))
};

/// Random pairs: sensing matrices conj(rho_0) kron O on N^2 x N^2.
/// Blockwise: a single N x N block with the shared observables.
std::unique_ptr<SensingOperator> make_sensing(const SensingDesign& d);

/// Dense random-pair sensing operator.
DenseSensing random_pair_sensing(const SensingDesign& d);

}  // namespace qsl
