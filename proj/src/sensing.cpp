#include "qsl/sensing.hpp"

#include <string>

#include "qsl/reshape.hpp"

namespace qsl {

namespace {

void require_factor(const ComplexMatrix& f, Index rows, const char* what) {
  detail::require(f.rows() == rows && f.cols() >= 1, std::string(what) + ": factor has " + std::to_string(f.rows()) +
                                                         " rows, expected " + std::to_string(rows));
}

void require_values(const ComplexVector& b, Index m) {
  detail::require(b.size() == m, "sensing: " + std::to_string(b.size()) + " measurements supplied, operator has " +
                                     std::to_string(m));
}

Eigen::Map<const ComplexMatrix> sensing_matrix(const ComplexMatrix& table, Index m, Index d1, Index d2) {
  return Eigen::Map<const ComplexMatrix>(table.data() + m * d1 * d2, d1, d2);
}

// Rows vec(S_m conj(V))^T for sensing matrices S_m = column m of `table` viewed as d1 x d2.
ComplexMatrix left_rows(const ComplexMatrix& table, Index d1, Index d2, const ComplexMatrix& v) {
  const Index m = table.cols(), r = v.cols();
  const ComplexMatrix vc = v.conjugate();
  ComplexMatrix out(m, d1 * r);
  ComplexMatrix g(d1, r);
  for (Index i = 0; i < m; ++i) {
    g.noalias() = sensing_matrix(table, i, d1, d2) * vc;
    out.row(i) = g.reshaped().transpose();
  }
  return out;
}

// Rows vec(S_m^T U)^T.
ComplexMatrix right_rows(const ComplexMatrix& table, Index d1, Index d2, const ComplexMatrix& u) {
  const Index m = table.cols(), r = u.cols();
  ComplexMatrix out(m, d2 * r);
  ComplexMatrix g(d2, r);
  for (Index i = 0; i < m; ++i) {
    g.noalias() = sensing_matrix(table, i, d1, d2).transpose() * u;
    out.row(i) = g.reshaped().transpose();
  }
  return out;
}

}  // namespace

DenseSensing::DenseSensing(Index d1, Index d2, ComplexMatrix conj_vec_columns)
    : d1_(d1), d2_(d2), table_(std::move(conj_vec_columns)) {
  detail::require(d1 >= 1 && d2 >= 1, "DenseSensing: dimensions must be positive");
  detail::require(table_.rows() == d1 * d2 && table_.cols() >= 1, "DenseSensing: table has wrong shape");
}

DenseSensing DenseSensing::from_matrices(const std::vector<ComplexMatrix>& a) {
  detail::require(!a.empty(), "DenseSensing: no sensing matrices");
  const Index d1 = a.front().rows(), d2 = a.front().cols();
  ComplexMatrix table(d1 * d2, static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    detail::require(a[i].rows() == d1 && a[i].cols() == d2, "DenseSensing: sensing matrices differ in shape");
    table.col(static_cast<Index>(i)) = a[i].reshaped().conjugate();
  }
  return DenseSensing(d1, d2, std::move(table));
}

ComplexVector DenseSensing::apply(const ComplexMatrix& x) const {
  detail::require(x.rows() == d1_ && x.cols() == d2_, "DenseSensing::apply: iterate has wrong shape");
  return table_.transpose() * x.reshaped();
}

ComplexMatrix DenseSensing::left_system(const ComplexMatrix& v) const {
  require_factor(v, d2_, "DenseSensing::left_system");
  return left_rows(table_, d1_, d2_, v);
}

ComplexMatrix DenseSensing::right_system(const ComplexMatrix& u) const {
  require_factor(u, d1_, "DenseSensing::right_system");
  return right_rows(table_, d1_, d2_, u);
}

ComplexMatrix DenseSensing::solve_left(const ComplexMatrix& v, const ComplexVector& b, LsMethod method) const {
  require_values(b, size());
  const ComplexMatrix x = least_squares(left_system(v), b, method);
  return x.reshaped(d1_, v.cols());
}

ComplexMatrix DenseSensing::solve_right(const ComplexMatrix& u, const ComplexVector& b, LsMethod method) const {
  require_values(b, size());
  const ComplexMatrix z = least_squares(right_system(u), b, method);
  return z.reshaped(d2_, u.cols()).conjugate();
}

DenseSensing DenseSensing::scaled(double c) const { return DenseSensing(d1_, d2_, c * table_); }

StackedBlockSensing::StackedBlockSensing(const std::vector<ComplexMatrix>& observables, Index blocks)
    : n_(0), m_o_(static_cast<Index>(observables.size())), blocks_(blocks) {
  detail::require(!observables.empty(), "StackedBlockSensing: no observables");
  detail::require(blocks >= 1, "StackedBlockSensing: need at least one block");
  n_ = observables.front().rows();
  table_.resize(n_ * n_, m_o_);
  for (Index m = 0; m < m_o_; ++m) {
    const auto& o = observables[static_cast<std::size_t>(m)];
    detail::require(o.rows() == n_ && o.cols() == n_, "StackedBlockSensing: observables differ in shape");
    table_.col(m) = o.reshaped().conjugate();
  }
}

ComplexVector StackedBlockSensing::apply(const ComplexMatrix& x) const {
  detail::require(x.rows() == n_ && x.cols() == n_ * blocks_, "StackedBlockSensing::apply: iterate has wrong shape");
  const ComplexMatrix y = table_.transpose() * x.reshaped(n_ * n_, blocks_);
  return y.reshaped();
}

ComplexMatrix StackedBlockSensing::left_system(const ComplexMatrix& v) const {
  require_factor(v, n_ * blocks_, "StackedBlockSensing::left_system");
  ComplexMatrix out(m_o_ * blocks_, n_ * v.cols());
  for (Index j = 0; j < blocks_; ++j)
    out.middleRows(j * m_o_, m_o_) = left_rows(table_, n_, n_, v.middleRows(j * n_, n_));
  return out;
}

ComplexMatrix StackedBlockSensing::right_system(const ComplexMatrix& u) const {
  require_factor(u, n_, "StackedBlockSensing::right_system");
  const Index r = u.cols();
  const ComplexMatrix shared = right_rows(table_, n_, n_, u);  // M_O x (N r), columns (b, k) -> k*N + b
  ComplexMatrix out = ComplexMatrix::Zero(m_o_ * blocks_, n_ * blocks_ * r);
  for (Index j = 0; j < blocks_; ++j)
    for (Index k = 0; k < r; ++k)
      out.block(j * m_o_, k * n_ * blocks_ + j * n_, m_o_, n_) = shared.middleCols(k * n_, n_);
  return out;
}

ComplexMatrix StackedBlockSensing::solve_left(const ComplexMatrix& v, const ComplexVector& b, LsMethod method) const {
  require_values(b, size());
  const ComplexMatrix x = least_squares(left_system(v), b, method);
  return x.reshaped(n_, v.cols());
}

ComplexMatrix StackedBlockSensing::solve_right(const ComplexMatrix& u, const ComplexVector& b,
                                               LsMethod method) const {
  require_values(b, size());
  require_factor(u, n_, "StackedBlockSensing::solve_right");
  const Index r = u.cols();
  const ComplexMatrix shared = right_rows(table_, n_, n_, u);
  const ComplexMatrix rhs = b.reshaped(m_o_, blocks_);
  const ComplexMatrix z = least_squares(shared, rhs, method);  // (N r) x p
  ComplexMatrix v(n_ * blocks_, r);
  for (Index j = 0; j < blocks_; ++j) v.middleRows(j * n_, n_) = z.col(j).reshaped(n_, r).conjugate();
  return v;
}

DenseSensing StackedBlockSensing::to_dense() const {
  const Index d2 = n_ * blocks_;
  ComplexMatrix table = ComplexMatrix::Zero(n_ * d2, m_o_ * blocks_);
  // columns j*N..(j+1)*N of an N x Np matrix occupy a contiguous N^2 range of its vec
  for (Index j = 0; j < blocks_; ++j) table.block(j * n_ * n_, j * m_o_, n_ * n_, m_o_) = table_;
  return DenseSensing(n_, d2, std::move(table));
}

DenseSensing random_pair_sensing(const SensingDesign& d) {
  detail::require(d.kind == DesignKind::random_pairs, "random_pair_sensing: design is not a random-pair design");
  detail::require(!d.pairs.empty(), "random_pair_sensing: empty design");
  const Index n = d.dim_n;
  ComplexMatrix table(n * n * n * n, static_cast<Index>(d.pairs.size()));
  for (std::size_t i = 0; i < d.pairs.size(); ++i) {
    // A = conj(rho_0) kron O; store conj(vec(A)) = vec(rho_0 kron conj(O))
    table.col(static_cast<Index>(i)) = vec(kron(d.pairs[i].rho0, d.pairs[i].obs.conjugate()));
  }
  return DenseSensing(n * n, n * n, std::move(table));
}

std::unique_ptr<SensingOperator> make_sensing(const SensingDesign& d) {
  if (d.kind == DesignKind::random_pairs) return std::make_unique<DenseSensing>(random_pair_sensing(d));
  detail::require(!d.observables.empty(), "make_sensing: empty design");
  return std::make_unique<StackedBlockSensing>(d.observables, 1);
}

}  // namespace qsl
