#pragma once

#include <compare>
#include <map>
#include <vector>

#include "qfel/ladder_basis.hpp"
#include "qfel/sparse_operator.hpp"

namespace qfel {

enum class FactorKind { jump, annihilate, create, number };

struct Factor {
  FactorKind kind = FactorKind::number;
  int mu = 0;
  int nu = 0;

  friend auto operator<=>(const Factor&, const Factor&) = default;
};

/// Linear combination of operator products, kept symbolic until materialized
/// on a basis. Products are evaluated label by label, so intermediate states
/// may leave a charge sector as long as they stay inside the window and the
/// photon range 0..n_max; only the final state has to be a basis state.
///
/// A jump factor with an index outside the basis window evaluates to zero.
class Expression {
 public:
  // factors are stored left to right; the rightmost acts first
  using Product = std::vector<Factor>;

  Expression() = default;

  static Expression identity();
  static Expression jump(int mu, int nu);
  static Expression annihilate();
  static Expression create();
  static Expression number();

  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const std::map<Product, cplx>& terms() const { return terms_; }

  Expression adjoint() const;
  SparseOperator on(const CompositeBasis& basis) const;

  Expression& operator+=(const Expression& rhs);
  Expression& operator-=(const Expression& rhs);
  Expression& operator*=(cplx scale);

  friend Expression operator+(Expression lhs, const Expression& rhs) { return lhs += rhs; }
  friend Expression operator-(Expression lhs, const Expression& rhs) { return lhs -= rhs; }
  friend Expression operator*(Expression e, cplx scale) { return e *= scale; }
  friend Expression operator*(cplx scale, Expression e) { return e *= scale; }
  friend Expression operator*(const Expression& lhs, const Expression& rhs);

 private:
  void add(const Product& product, cplx coefficient);

  std::map<Product, cplx> terms_;
};

Expression commutator(const Expression& a, const Expression& b);

}  // namespace qfel
