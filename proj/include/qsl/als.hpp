#pragma once

// Alternating least squares on X = U V^dagger, its Nesterov-accelerated
// variant with loss-ratio restarts, and the three first-block-row strategies
// built on top of them (per-block, stacked, and stacked-on-a-subset).

#include <cstdint>
#include <functional>
#include <vector>

#include "qsl/linalg.hpp"
#include "qsl/sensing.hpp"

namespace qsl {

struct FactorPair {
  ComplexMatrix left;   // d1 x r
  ComplexMatrix right;  // d2 x r

  ComplexMatrix product() const { return left * right.adjoint(); }
  Index rank() const { return left.cols(); }
};

/// Reported once per sweep. `base` is the point the sweep started from (the
/// extrapolated point, or the reverted iterate after a restart).
struct IterationEvent {
  Index iteration = 0;
  bool restarted = false;
  double beta = 0;
  const FactorPair* base = nullptr;
  const FactorPair* result = nullptr;
  double loss = 0;
};

struct SolverConfig {
  Index rank = 1;
  Index max_iter = 300;
  double gamma = 1e-8;
  double eta = 1.2;
  double beta = 1.0;
  std::uint64_t seed = 0;
  double lambda_reg = 0;
  LsMethod ls_method = LsMethod::qr;
  int threads = 1;
  std::function<void(const IterationEvent&)> observer;

  void validate() const;
};

struct SolveReport {
  FactorPair factors;
  double final_loss = 0;
  /// f + lambda ||U^dagger U - V^dagger V||_F^2 at the returned factors; equals
  /// final_loss when lambda_reg = 0. Diagnostic only.
  double regularized_loss = 0;
  Index iterations = 0;
  Index restarts = 0;
  bool converged = false;
  std::vector<double> loss_trace;
  double wall_time = 0;
};

/// (1/2M) ||A(X) - b||^2.
double sensing_loss(const SensingOperator& op, const ComplexVector& b, const ComplexMatrix& x);
/// sensing_loss + lambda ||U^dagger U - V^dagger V||_F^2.
double sensing_loss(const SensingOperator& op, const ComplexVector& b, const FactorPair& f, double lambda);

/// Independent standard complex Gaussian factors of the given shapes.
FactorPair random_factors(Index d1, Index d2, Index r, std::uint64_t seed);

/// One sweep: V <- argmin f(U, .), then U <- argmin f(., V).
FactorPair als_sweep(const SensingOperator& op, const ComplexVector& b, const FactorPair& start, LsMethod method);

SolveReport als_solve(const SensingOperator& op, const ComplexVector& b, const SolverConfig& config);
SolveReport nesterov_als_solve(const SensingOperator& op, const ComplexVector& b, const SolverConfig& config);

/// Variants starting from explicit factors instead of a seeded draw.
SolveReport als_solve(const SensingOperator& op, const ComplexVector& b, const SolverConfig& config,
                      FactorPair start);
SolveReport nesterov_als_solve(const SensingOperator& op, const ComplexVector& b, const SolverConfig& config,
                               FactorPair start);

struct FirstRowEstimate {
  std::vector<ComplexMatrix> blocks;  // N blocks, N x N each
  std::vector<Index> subset;          // blocks solved jointly (ALS-I, ALS-N); empty for ALS-P
  Index iterations = 0;
  Index restarts = 0;
  double final_loss = 0;

  /// [K_1 ... K_N] as an N x N^2 matrix.
  ComplexMatrix stacked() const;
};

/// Each block solved independently by Nesterov-ALS with seed derive_seed(seed, l).
/// Results do not depend on `threads`.
FirstRowEstimate solve_first_row_parallel(const std::vector<ComplexMatrix>& observables,
                                          const std::vector<ComplexVector>& b_blocks, Index n,
                                          const SolverConfig& config);

/// One stacked problem over the whole block row with a shared left factor.
FirstRowEstimate solve_first_row_joint(const std::vector<ComplexMatrix>& observables,
                                       const std::vector<ComplexVector>& b_blocks, Index n,
                                       const SolverConfig& config);

/// Stacked problem over the anchor block plus ceil(ratio N) - 1 sampled blocks,
/// then one least-squares solve per remaining block with the left factor fixed.
/// Uses the same solver seed as the joint strategy, so ratio = 1 reproduces it.
FirstRowEstimate solve_first_row_subset(const std::vector<ComplexMatrix>& observables,
                                        const std::vector<ComplexVector>& b_blocks, Index n, double subset_ratio,
                                        const SolverConfig& config, Index anchor = 0);

/// The sorted index set used by solve_first_row_subset.
std::vector<Index> sample_subset(Index n, double subset_ratio, Index anchor, std::uint64_t seed);

}  // namespace qsl
