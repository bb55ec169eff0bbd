#pragma once

// Ground-truth superoperators: application, Lindbladian canonical form and
// seeded random generators.

#include <cstdint>

#include "qsl/reshape.hpp"
#include "qsl/types.hpp"

namespace qsl {

ComplexMatrix apply_superop(const Superoperator& s, const ComplexMatrix& rho);

/// -i[H, rho] + sum_k (J rho J^dagger - 1/2 {J^dagger J, rho}), evaluated as
/// Q rho + rho Q^dagger + sum_k J rho J^dagger with Q = -iH - 1/2 sum J^dagger J.
ComplexMatrix lindblad_apply(const Lindbladian& l, const ComplexMatrix& rho);

/// Q = -iH - 1/2 sum_k J_k^dagger J_k.
ComplexMatrix lindblad_drift(const Lindbladian& l);

/// HS-orthogonal signed-Kraus form with r_plus = N_J + 1, r_minus = 1.
/// The reshaped matrix vec(Q)vec(I)^dagger + vec(I)vec(Q)^dagger + sum vec(J)vec(J)^dagger
/// lives in span{vec(I), vec(Q), vec(J_k)}; it is diagonalised there and split
/// by eigenvalue sign. Throws DegeneracyError when that span or the spectrum
/// has fewer than N_J + 2 nonzero directions.
Superoperator lindblad_canonical(const Lindbladian& l, double rtol = 1e-10);

/// Kraus operators V_k with sum V_k^dagger V_k = I, HS-orthogonal.
/// Built from the polar factor of an (rN) x N complex Gaussian.
Superoperator random_channel(Index n, Index kraus_rank, std::uint64_t seed);

/// H = (G + G^dagger)/2 and jumps iid complex Gaussian, each unit Frobenius norm.
Lindbladian random_lindbladian(Index n, Index n_jumps, std::uint64_t seed);

/// G G^dagger / tr(G G^dagger).
ComplexMatrix random_density(Index n, std::uint64_t seed);
ComplexMatrix random_density(Index n, Rng& rng);

/// (G + G^dagger)/sqrt(2), rescaled to unit Frobenius norm.
ComplexMatrix random_observable(Index n, std::uint64_t seed);
ComplexMatrix random_observable(Index n, Rng& rng);

/// P D P^dagger with P the first r columns of a Haar unitary on C^{N^2} and
/// D holding r_plus entries |g| + 0.5 and r_minus entries -(|g| + 0.5).
ReshapedMatrix haar_low_rank_hermitian(Index n, Index r_plus, Index r_minus, std::uint64_t seed);

/// Signed-Kraus factors of a Hermitian reshaped matrix: eigenvectors with
/// |lambda| > rtol * max|lambda| become sqrt|lambda| unvec(p).
Superoperator signed_kraus_from_reshaped(const ReshapedMatrix& k, double rtol = 1e-10);

/// Haar unitary columns via QR of a complex Gaussian with the phases of R's
/// diagonal absorbed into Q.
ComplexMatrix haar_isometry(Index dim, Index cols, Rng& rng);

}  // namespace qsl
