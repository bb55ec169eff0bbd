#include <cmath>

#include "doctest.h"
#include "qsl/measurement.hpp"
#include "qsl/superop.hpp"
#include "support.hpp"

using namespace qsl;

namespace {

double sample_std(const std::vector<double>& x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

TEST_CASE("single-qubit Paulis and strings") {
  const Complex i(0, 1);
  CHECK(pauli(0) == ComplexMatrix::Identity(2, 2));
  CHECK(pauli(1) == (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished());
  CHECK(pauli(2) == (ComplexMatrix(2, 2) << 0, -i, i, 0).finished());
  CHECK(pauli(3) == (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished());
  CHECK_THROWS(pauli(4));

  CHECK(pauli_string({1, 3}, false) == kron(pauli(1), pauli(3)));
  CHECK(std::abs(pauli_string({2, 1, 0}, true).norm() - 1.0) <= 1e-14);

  const auto basis = pauli_basis(2, true);
  REQUIRE(basis.size() == 16);
  CHECK(basis[1] == pauli_string({0, 1}, true));
  CHECK(basis[4] == pauli_string({1, 0}, true));
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = 0; b < basis.size(); ++b)
      CHECK(std::abs(hs_inner(basis[a], basis[b]) - Complex(a == b ? 1.0 : 0.0)) <= 1e-14);

  CHECK(qubit_count(8) == 3);
  CHECK(qubit_count(6) == -1);
  CHECK(sample_pauli(2, 5, false, 3).size() == 5);
  CHECK(sample_pauli(2, 5, false, 3)[4] == sample_pauli(2, 5, false, 3)[4]);
}

TEST_CASE("design construction and validation") {
  const SensingDesign r = build_random_design(3, 20, ObservableSource::random, 1);
  CHECK(r.size() == 20);
  CHECK(r.kind == DesignKind::random_pairs);
  for (const auto& p : r.pairs) {
    CHECK(std::abs(p.rho0.trace() - Complex(1)) <= 1e-13);
    CHECK(test::is_hermitian(p.obs, 1e-14));
  }
  const SensingDesign scaled = build_random_design(3, 20, ObservableSource::random, 1, 2.0);
  CHECK(std::abs(scaled.pairs[4].obs.norm() - 2.0) <= 1e-13);
  CHECK(test::rel_diff(scaled.pairs[4].obs, 2.0 * r.pairs[4].obs) <= 1e-15);
  CHECK(scaled.id() != r.id());

  const SensingDesign b = build_blockwise_design(4, 30, ObservableSource::pauli, 2, 5);
  CHECK(b.size() == 30);
  CHECK(b.row == 2);
  CHECK(b.observables.size() == 30);
  CHECK_NOTHROW(b.validate());
  CHECK(build_blockwise_design(4, 30, ObservableSource::pauli, 2, 5).id() == b.id());

  CHECK_THROWS_AS(build_blockwise_design(3, 10, ObservableSource::pauli, 0, 1), ConfigError);
  CHECK_THROWS_AS(build_blockwise_design(4, 10, ObservableSource::random, 4, 1), ConfigError);
  CHECK_THROWS_AS(build_random_design(2, 15, ObservableSource::pauli_basis, 1), ConfigError);
  CHECK_THROWS_AS(build_random_design(2, 0, ObservableSource::random, 1), ConfigError);
}

TEST_CASE("state combinations reproduce matrix units exactly") {
  // E_21 at N = 2 (1-based), i.e. k = 0, l = 1 in 0-based indices
  const StateCombination c = synth_state_combination(0, 1, 2);
  const ComplexMatrix e21 = (ComplexMatrix(2, 2) << 0, 0, 1, 0).finished();
  CHECK((c.combine() - e21).norm() <= 1e-15);
  CHECK(c.coeffs[0] == Complex(1, 0));
  CHECK(c.coeffs[1] == Complex(0, 1));

  for (Index n = 2; n <= 5; ++n)
    for (Index k = 0; k < n; ++k)
      for (Index l = 0; l < n; ++l) {
        if (k == l) continue;
        const StateCombination s = synth_state_combination(k, l, n);
        CHECK((s.combine() - matrix_unit(n, l, k)).norm() <= 1e-14);
        for (const auto& st : s.states) {
          CHECK(std::abs(st.trace() - Complex(1)) <= 1e-15);
          CHECK(test::is_hermitian(st, 1e-15));
          CHECK((st * st - st).norm() <= 1e-14);  // pure
        }
      }
  CHECK_THROWS(synth_state_combination(1, 1, 3));
}

TEST_CASE("noiseless random-pair measurements equal Re tr[S(rho)^dagger O]") {
  const Superoperator s = random_channel(3, 2, 4);
  const SensingDesign d = build_random_design(3, 40, ObservableSource::random, 9);
  const MeasurementSet m = simulate_measurements(s, d, 0.0, NoiseMode::synthetic, 1);
  REQUIRE(m.values.size() == 40);
  CHECK(m.design_ref == d.id());
  for (Index i = 0; i < 40; ++i) {
    const ComplexMatrix out = apply_superop(s, d.pairs[i].rho0);
    const double ref = (out.adjoint() * d.pairs[i].obs).trace().real();
    CHECK(std::abs(m.values(i) - ref) <= 1e-14);
  }
}

TEST_CASE("noiseless blockwise measurements read one block row of K") {
  const Index n = 3;
  for (Index row = 0; row < n; ++row) {
    const Superoperator s = lindblad_canonical(random_lindbladian(n, 1, 2));
    const ReshapedMatrix k = choi_reshape(s);
    const SensingDesign d = build_blockwise_design(n, 12, ObservableSource::random, row, 3);
    for (NoiseMode mode : {NoiseMode::synthetic, NoiseMode::physical}) {
      const MeasurementSet m = simulate_measurements(s, d, 0.0, mode, 5);
      REQUIRE(m.blocks.size() == static_cast<std::size_t>(n));
      for (Index l = 0; l < n; ++l)
        for (Index j = 0; j < 12; ++j) {
          const ComplexMatrix& o = d.observables[j];
          const Complex direct = (apply_superop(s, matrix_unit(n, l, row)).adjoint() * o).trace();
          const Complex via_k = (o.adjoint() * k.block(row, l)).trace();
          CHECK(std::abs(m.blocks[l](j) - direct) <= 1e-13);
          CHECK(std::abs(direct - via_k) <= 1e-13);
        }
    }
  }
}

TEST_CASE("synthetic noise has the requested standard deviation") {
  const double sigma = 1e-4;
  const Superoperator s = random_channel(4, 2, 1);

  const SensingDesign b = build_blockwise_design(4, 200, ObservableSource::random, 0, 2);
  const MeasurementSet clean = simulate_measurements(s, b, 0.0, NoiseMode::synthetic, 3);
  const MeasurementSet noisy = simulate_measurements(s, b, sigma, NoiseMode::synthetic, 3);
  std::vector<double> re, im;
  for (std::size_t l = 0; l < clean.blocks.size(); ++l)
    for (Index j = 0; j < 200; ++j) {
      const Complex e = noisy.blocks[l](j) - clean.blocks[l](j);
      re.push_back(e.real());
      im.push_back(e.imag());
    }
  CHECK(sample_std(re) >= 0.9e-4);
  CHECK(sample_std(re) <= 1.1e-4);
  CHECK(sample_std(im) >= 0.9e-4);
  CHECK(sample_std(im) <= 1.1e-4);

  const SensingDesign r = build_random_design(4, 800, ObservableSource::random, 2);
  const MeasurementSet rc = simulate_measurements(s, r, 0.0, NoiseMode::synthetic, 3);
  const MeasurementSet rn = simulate_measurements(s, r, sigma, NoiseMode::synthetic, 3);
  std::vector<double> e;
  for (Index j = 0; j < 800; ++j) e.push_back(rn.values(j) - rc.values(j));
  CHECK(sample_std(e) >= 0.9e-4);
  CHECK(sample_std(e) <= 1.1e-4);

  // same seed, same noise
  CHECK(simulate_measurements(s, r, sigma, NoiseMode::synthetic, 3).values == rn.values);
}

TEST_CASE("physical noise perturbs raw state measurements") {
  const Superoperator s = random_channel(3, 1, 8);
  const SensingDesign b = build_blockwise_design(3, 50, ObservableSource::random, 1, 2);
  const MeasurementSet clean = simulate_measurements(s, b, 0.0, NoiseMode::physical, 4);
  const MeasurementSet noisy = simulate_measurements(s, b, 1e-3, NoiseMode::physical, 4);
  double max_dev = 0;
  for (std::size_t l = 0; l < clean.blocks.size(); ++l)
    max_dev = std::max(max_dev, (noisy.blocks[l] - clean.blocks[l]).cwiseAbs().maxCoeff());
  CHECK(max_dev > 0);
  CHECK(max_dev < 1e-2);
  // the diagonal block is a single real measurement per observable
  const MeasurementSet again = simulate_measurements(s, b, 1e-3, NoiseMode::physical, 4);
  CHECK(again.blocks[1] == noisy.blocks[1]);
  CHECK(noisy.blocks[1].imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("RIP probe on complete and degenerate designs") {
  const SensingDesign full = build_random_design(2, 16, ObservableSource::pauli_basis, 0);
  const RipEstimate e = empirical_rip_probe(full, 1, 50, 1);
  CHECK(e.delta <= 1e-12);
  CHECK(std::abs(e.c - 1.0 / 16.0) <= 1e-14);

  const SensingDesign block_full = build_blockwise_design(2, 4, ObservableSource::pauli_basis, 0, 0);
  const RipEstimate eb = empirical_rip_probe(block_full, 2, 50, 1);
  CHECK(eb.delta <= 1e-12);
  CHECK(std::abs(eb.c - 0.25) <= 1e-14);

  const SensingDesign one = build_random_design(3, 1, ObservableSource::random, 2);
  CHECK(empirical_rip_probe(one, 1, 200, 1).delta > 0.9);

  const SensingDesign pauli = build_blockwise_design(4, 64, ObservableSource::pauli, 0, 7);
  const RipEstimate ep = empirical_rip_probe(pauli, 2, 200, 3);
  CHECK(ep.delta < 0.9);
  CHECK(ep.c0 <= ep.c1);
  CHECK_THROWS_AS(empirical_rip_probe(pauli, 2, 0, 3), ConfigError);
}

TEST_CASE("enum names round trip") {
  for (auto k : {DesignKind::random_pairs, DesignKind::blockwise}) CHECK(parse_design_kind(to_string(k)) == k);
  for (auto s : {ObservableSource::pauli, ObservableSource::random, ObservableSource::pauli_basis})
    CHECK(parse_source(to_string(s)) == s);
  for (auto m : {NoiseMode::synthetic, NoiseMode::physical}) CHECK(parse_noise_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_source("gaussian"), ConfigError);
}
