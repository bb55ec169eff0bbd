#pragma once

// Measurement designs and simulated data: random (state, observable) pairs,
// the blockwise design that isolates one block row of the reshaped matrix,
// Gaussian noise and a sampled restricted-isometry probe.
//
// Block and state indices are 0-based throughout; the serialized
// "row_index" field is 1-based.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qsl/linalg.hpp"
#include "qsl/types.hpp"

namespace qsl {

enum class DesignKind { random_pairs, blockwise };
/// pauli: iid scaled Pauli strings; random: random density matrices and
/// Hermitian observables; pauli_basis: every scaled Pauli string exactly once.
enum class ObservableSource { pauli, random, pauli_basis };
enum class NoiseMode { synthetic, physical };

struct StatePair {
  ComplexMatrix rho0;
  ComplexMatrix obs;
};

struct SensingDesign {
  DesignKind kind = DesignKind::blockwise;
  ObservableSource source = ObservableSource::random;
  Index dim_n = 0;
  std::vector<StatePair> pairs;            // random_pairs
  std::vector<ComplexMatrix> observables;  // blockwise, shared by every block
  Index row = 0;                           // blockwise anchor block row
  std::uint64_t seed = 0;
  double observable_norm = 1.0;

  /// M for random pairs, M_O for blockwise designs.
  Index size() const;
  std::string id() const;
  void validate() const;
};

struct MeasurementSet {
  std::string design_ref;
  DesignKind kind = DesignKind::blockwise;
  RealVector values;                 // random_pairs: length M
  std::vector<ComplexVector> blocks;  // blockwise: blocks[l] = b_{row, l}, length M_O each
  double sigma = 0;
  NoiseMode noise_mode = NoiseMode::synthetic;
  std::uint64_t seed = 0;
};

/// One of I, sigma_x, sigma_y, sigma_z (index 0..3).
ComplexMatrix pauli(int index);
/// Tensor product P_{i_1} x ... x P_{i_n}, optionally divided by sqrt(2^n).
ComplexMatrix pauli_string(const std::vector<int>& indices, bool scaled);

std::vector<ComplexMatrix> sample_pauli(int n_qubits, Index count, bool scaled, std::uint64_t seed);
/// All 4^n strings in lexicographic order.
std::vector<ComplexMatrix> pauli_basis(int n_qubits, bool scaled);

/// log2(n) when n is a power of two, -1 otherwise.
int qubit_count(Index n);

/// `observable_norm` rescales random-source observables from unit Frobenius
/// norm to the given Frobenius norm (sqrt(N) gives a unit RMS spectrum, as for
/// unscaled Pauli strings). Pauli sources are unaffected.
SensingDesign build_random_design(Index n, Index m, ObservableSource source, std::uint64_t seed,
                                  double observable_norm = 1.0);
SensingDesign build_blockwise_design(Index n, Index m_o, ObservableSource source, Index row, std::uint64_t seed,
                                     double observable_norm = 1.0);

/// Four unit-trace pure states and coefficients with
///   E_{lk} = 1 * rho^{kl} + i * rho'^{kl} - (1+i)/2 * E_kk - (1+i)/2 * E_ll .
struct StateCombination {
  std::array<Complex, 4> coeffs;
  std::array<ComplexMatrix, 4> states;

  ComplexMatrix combine() const;
};

/// Requires k != l; the diagonal case uses E_kk directly.
StateCombination synth_state_combination(Index k, Index l, Index n);

/// e_r e_c^T.
ComplexMatrix matrix_unit(Index n, Index r, Index c);

/// Random pairs: Re tr[(S rho)^dagger O] + N(0, sigma^2).
/// Blockwise: b_{kl}^m = tr[S(E_{lk})^dagger O^m] for the design's row k.
/// Synthetic noise is N(0, sigma^2) on the real and imaginary parts of each
/// complex value; physical noise perturbs the real raw measurements of the
/// 3N - 2 prepared states before they are combined.
MeasurementSet simulate_measurements(const Superoperator& s, const SensingDesign& d, double sigma,
                                     NoiseMode mode, std::uint64_t seed);

struct RipEstimate {
  double c0 = 0;
  double c1 = 0;
  double c = 0;
  double delta = 0;
};

/// Sampled (optimistic) RIP constants of the 1/sqrt(M)-scaled sensing map
/// over random unit-Frobenius rank-r matrices.
RipEstimate empirical_rip_probe(const SensingDesign& d, Index r, Index n_samples, std::uint64_t seed);

std::string to_string(DesignKind k);
std::string to_string(ObservableSource s);
std::string to_string(NoiseMode m);
DesignKind parse_design_kind(const std::string& s);
ObservableSource parse_source(const std::string& s);
NoiseMode parse_noise_mode(const std::string& s);

}  // namespace qsl
