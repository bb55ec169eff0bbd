#include "doctest.h"
#include "qsl/sensing.hpp"
#include "qsl/superop.hpp"
#include "support.hpp"

using namespace qsl;

namespace {

std::vector<ComplexMatrix> random_matrices(Index d1, Index d2, Index m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ComplexMatrix> out;
  for (Index i = 0; i < m; ++i) out.push_back(complex_gaussian(d1, d2, rng));
  return out;
}

}  // namespace

TEST_CASE("dense apply evaluates HS inner products") {
  const auto a = random_matrices(3, 4, 15, 1);
  const DenseSensing op = DenseSensing::from_matrices(a);
  CHECK(op.rows() == 3);
  CHECK(op.cols() == 4);
  CHECK(op.size() == 15);
  const ComplexMatrix x = complex_gaussian(3, 4, 2);
  const ComplexVector y = op.apply(x);
  for (Index m = 0; m < 15; ++m) CHECK(std::abs(y(m) - (a[m].adjoint() * x).trace()) <= 1e-13);
  CHECK_THROWS_AS(op.apply(ComplexMatrix(4, 3)), DimensionError);
  CHECK_THROWS_AS(DenseSensing::from_matrices({}), DimensionError);
}

TEST_CASE("explicit half-step systems reproduce apply") {
  const auto a = random_matrices(4, 3, 30, 3);
  const DenseSensing op = DenseSensing::from_matrices(a);
  const ComplexMatrix u = complex_gaussian(4, 2, 4), v = complex_gaussian(3, 2, 5);
  const ComplexVector y = op.apply(u * v.adjoint());
  const ComplexVector yl = op.left_system(v) * u.reshaped();
  const ComplexMatrix zc = v.conjugate();
  const ComplexVector yr = op.right_system(u) * zc.reshaped();
  CHECK((yl - y).norm() <= 1e-12 * y.norm());
  CHECK((yr - y).norm() <= 1e-12 * y.norm());
}

TEST_CASE("half-steps solve exactly consistent systems") {
  const auto a = random_matrices(4, 4, 40, 6);
  const DenseSensing op = DenseSensing::from_matrices(a);
  const ComplexMatrix u = complex_gaussian(4, 2, 7), v = complex_gaussian(4, 2, 8);
  const ComplexVector b = op.apply(u * v.adjoint());
  for (LsMethod method : {LsMethod::qr, LsMethod::normal_equations}) {
    const ComplexMatrix v_hat = op.solve_right(u, b, method);
    CHECK(test::rel_diff(v_hat, v) <= 1e-10);
    const ComplexMatrix u_hat = op.solve_left(v, b, method);
    CHECK(test::rel_diff(u_hat, u) <= 1e-10);
  }
  CHECK_THROWS_AS(op.solve_left(v, ComplexVector(3), LsMethod::qr), DimensionError);
}

TEST_CASE("stacked block sensing agrees with its dense equivalent") {
  const Index n = 3, p = 4;
  auto obs = random_matrices(n, n, 10, 9);
  for (auto& o : obs) o = 0.5 * (o + o.adjoint()).eval();
  const StackedBlockSensing op(obs, p);
  const DenseSensing dense = op.to_dense();
  CHECK(op.rows() == n);
  CHECK(op.cols() == n * p);
  CHECK(op.size() == 10 * p);
  CHECK(dense.size() == op.size());

  const ComplexMatrix x = complex_gaussian(n, n * p, 10);
  const ComplexVector y = op.apply(x);
  CHECK((y - dense.apply(x)).norm() <= 1e-12 * y.norm());
  // block-major ordering
  for (Index l = 0; l < p; ++l)
    for (Index m = 0; m < 10; ++m)
      CHECK(std::abs(y(l * 10 + m) - (obs[m].adjoint() * x.middleCols(l * n, n)).trace()) <= 1e-12);

  const ComplexMatrix u = complex_gaussian(n, 2, 11), v = complex_gaussian(n * p, 2, 12);
  CHECK(test::rel_diff(op.left_system(v), dense.left_system(v)) <= 1e-13);
  CHECK(test::rel_diff(op.right_system(u), dense.right_system(u)) <= 1e-13);

  const ComplexVector b = op.apply(u * v.adjoint()) + 1e-3 * complex_gaussian(op.size(), 1, 13).col(0);
  CHECK(test::rel_diff(op.solve_right(u, b, LsMethod::qr), dense.solve_right(u, b, LsMethod::qr)) <= 1e-10);
  CHECK(test::rel_diff(op.solve_left(v, b, LsMethod::qr), dense.solve_left(v, b, LsMethod::qr)) <= 1e-10);
}

TEST_CASE("random-pair sensing of K returns tr[S(rho)^dagger O]") {
  const Superoperator s = random_channel(3, 2, 14);
  const SensingDesign d = build_random_design(3, 25, ObservableSource::random, 15);
  const DenseSensing op = random_pair_sensing(d);
  CHECK(op.rows() == 9);
  CHECK(op.cols() == 9);
  const ComplexVector y = op.apply(choi_reshape(s).matrix);
  const MeasurementSet m = simulate_measurements(s, d, 0.0, NoiseMode::synthetic, 0);
  for (Index i = 0; i < 25; ++i) {
    CHECK(std::abs(y(i).real() - m.values(i)) <= 1e-13);
    CHECK(std::abs(y(i).imag()) <= 1e-13);
  }
}

TEST_CASE("make_sensing dispatches on the design kind") {
  const auto r = make_sensing(build_random_design(2, 10, ObservableSource::random, 1));
  CHECK(r->rows() == 4);
  CHECK(r->size() == 10);
  const SensingDesign bd = build_blockwise_design(2, 6, ObservableSource::random, 0, 1);
  const auto b = make_sensing(bd);
  CHECK(b->rows() == 2);
  CHECK(b->cols() == 2);
  CHECK(b->size() == 6);
  const ComplexMatrix x = complex_gaussian(2, 2, 3);
  CHECK(std::abs(b->apply(x)(5) - hs_inner(bd.observables[5], x)) <= 1e-14);
}

TEST_CASE("scaled sensing multiplies the measurements") {
  const DenseSensing op = DenseSensing::from_matrices(random_matrices(2, 3, 8, 16));
  const ComplexMatrix x = complex_gaussian(2, 3, 17);
  CHECK((op.scaled(3.0).apply(x) - 3.0 * op.apply(x)).norm() <= 1e-13);
}
