#include "qsl/reshape.hpp"

namespace qsl {

void Superoperator::validate() const {
  detail::require(dim_n >= 1, "Superoperator: dim_n must be positive");
  auto check = [this](const std::vector<ComplexMatrix>& ops, const char* which) {
    for (std::size_t k = 0; k < ops.size(); ++k)
      detail::require(ops[k].rows() == dim_n && ops[k].cols() == dim_n,
                      std::string("Superoperator: ") + which + " operator " + std::to_string(k) + " is " +
                          std::to_string(ops[k].rows()) + "x" + std::to_string(ops[k].cols()) + ", expected " +
                          std::to_string(dim_n) + "x" + std::to_string(dim_n));
  };
  check(plus_ops, "plus");
  check(minus_ops, "minus");
}

ComplexMatrix superop_matrix(const Superoperator& s) {
  s.validate();
  const Index n2 = s.dim_n * s.dim_n;
  ComplexMatrix out = ComplexMatrix::Zero(n2, n2);
  for (const auto& v : s.plus_ops) out += kron(v.conjugate(), v);
  for (const auto& u : s.minus_ops) out -= kron(u.conjugate(), u);
  return out;
}

ReshapedMatrix choi_reshape(const Superoperator& s) {
  s.validate();
  const Index n2 = s.dim_n * s.dim_n;
  ComplexMatrix plus(n2, s.r_plus()), minus(n2, s.r_minus());
  for (Index k = 0; k < s.r_plus(); ++k) plus.col(k) = s.plus_ops[k].reshaped();
  for (Index k = 0; k < s.r_minus(); ++k) minus.col(k) = s.minus_ops[k].reshaped();
  ReshapedMatrix out{s.dim_n, ComplexMatrix::Zero(n2, n2)};
  if (s.r_plus() > 0) out.matrix.noalias() += plus * plus.adjoint();
  if (s.r_minus() > 0) out.matrix.noalias() -= minus * minus.adjoint();
  return out;
}

}  // namespace qsl
