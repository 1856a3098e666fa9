#include "qfel/ladder_operators.hpp"

#include <fmt/format.h>

#include "qfel/errors.hpp"
#include "qfel/operator_expression.hpp"

namespace qfel {

SparseOperator collective_jump(const CompositeBasis& basis, int mu, int nu) {
  const LadderWindow& w = basis.window();
  if (!w.contains(mu) || !w.contains(nu)) {
    throw DomainError(fmt::format("jump indices ({}, {}) outside window [{}, {}]", mu, nu,
                                  w.mu_min(), w.mu_max()));
  }
  return Expression::jump(mu, nu).on(basis);
}

SparseOperator photon_operator(const CompositeBasis& basis, PhotonKind kind) {
  switch (kind) {
    case PhotonKind::annihilate:
      return Expression::annihilate().on(basis);
    case PhotonKind::create:
      return Expression::create().on(basis);
    case PhotonKind::number:
      break;
  }
  return Expression::number().on(basis);
}

SparseOperator charge_operator(const CompositeBasis& basis) {
  std::vector<cplx> diag(basis.dimension());
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = static_cast<double>(basis.charge(i));
  return SparseOperator::diagonal(diag);
}

SparseOperator inversion_operator(const CompositeBasis& basis) {
  return (Expression::jump(0, 0) - Expression::jump(1, 1)).on(basis);
}

}  // namespace qfel
