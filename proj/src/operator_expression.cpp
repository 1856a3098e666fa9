#include "qfel/operator_expression.hpp"

#include <algorithm>
#include <cmath>

namespace qfel {

namespace {

// Applies one factor to (occupation, photons) in place; false when the image is zero
// or leaves the truncated space.
bool apply_factor(const Factor& f, const LadderWindow& window, int n_max, Occupation& m,
                  int& photons, double& amplitude) {
  switch (f.kind) {
    case FactorKind::number:
      if (photons == 0) return false;
      amplitude *= photons;
      return true;
    case FactorKind::annihilate:
      if (photons == 0) return false;
      amplitude *= std::sqrt(static_cast<double>(photons));
      --photons;
      return true;
    case FactorKind::create:
      if (photons >= n_max) return false;
      ++photons;
      amplitude *= std::sqrt(static_cast<double>(photons));
      return true;
    case FactorKind::jump: {
      if (!window.contains(f.mu) || !window.contains(f.nu)) return false;
      int& from = m[window.slot(f.nu)];
      if (from == 0) return false;
      if (f.mu == f.nu) {
        amplitude *= from;
        return true;
      }
      int& to = m[window.slot(f.mu)];
      amplitude *= std::sqrt(static_cast<double>(from) * (to + 1));
      --from;
      ++to;
      return true;
    }
  }
  return false;
}

Factor adjoint_factor(const Factor& f) {
  switch (f.kind) {
    case FactorKind::annihilate:
      return {FactorKind::create, 0, 0};
    case FactorKind::create:
      return {FactorKind::annihilate, 0, 0};
    case FactorKind::jump:
      return {FactorKind::jump, f.nu, f.mu};
    case FactorKind::number:
      break;
  }
  return f;
}

}  // namespace

Expression Expression::identity() {
  Expression e;
  e.terms_.emplace(Product{}, cplx{1.0, 0.0});
  return e;
}

Expression Expression::jump(int mu, int nu) {
  Expression e;
  e.terms_.emplace(Product{{FactorKind::jump, mu, nu}}, cplx{1.0, 0.0});
  return e;
}

Expression Expression::annihilate() {
  Expression e;
  e.terms_.emplace(Product{{FactorKind::annihilate, 0, 0}}, cplx{1.0, 0.0});
  return e;
}

Expression Expression::create() {
  Expression e;
  e.terms_.emplace(Product{{FactorKind::create, 0, 0}}, cplx{1.0, 0.0});
  return e;
}

Expression Expression::number() {
  Expression e;
  e.terms_.emplace(Product{{FactorKind::number, 0, 0}}, cplx{1.0, 0.0});
  return e;
}

void Expression::add(const Product& product, cplx coefficient) {
  auto [it, inserted] = terms_.try_emplace(product, coefficient);
  if (!inserted) it->second += coefficient;
  if (std::abs(it->second) < kPruneTolerance) terms_.erase(it);
}

Expression Expression::adjoint() const {
  Expression out;
  for (const auto& [product, c] : terms_) {
    Product reversed;
    reversed.reserve(product.size());
    for (auto it = product.rbegin(); it != product.rend(); ++it) {
      reversed.push_back(adjoint_factor(*it));
    }
    out.add(reversed, std::conj(c));
  }
  return out;
}

Expression& Expression::operator+=(const Expression& rhs) {
  for (const auto& [product, c] : rhs.terms_) add(product, c);
  return *this;
}

Expression& Expression::operator-=(const Expression& rhs) {
  for (const auto& [product, c] : rhs.terms_) add(product, -c);
  return *this;
}

Expression& Expression::operator*=(cplx scale) {
  if (std::abs(scale) == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [product, c] : terms_) c *= scale;
  return *this;
}

Expression operator*(const Expression& lhs, const Expression& rhs) {
  Expression out;
  for (const auto& [pl, cl] : lhs.terms_) {
    for (const auto& [pr, cr] : rhs.terms_) {
      Expression::Product joined;
      joined.reserve(pl.size() + pr.size());
      joined.insert(joined.end(), pl.begin(), pl.end());
      joined.insert(joined.end(), pr.begin(), pr.end());
      out.add(joined, cl * cr);
    }
  }
  return out;
}

Expression commutator(const Expression& a, const Expression& b) { return a * b - b * a; }

SparseOperator Expression::on(const CompositeBasis& basis) const {
  const LadderWindow& window = basis.window();
  const SymmetricElectronBasis& electron = basis.electron();
  const int n_max = basis.n_max();
  std::vector<MatrixEntry> entries;
  Occupation m;
  for (const auto& [product, c] : terms_) {
    const bool reachable = std::all_of(product.begin(), product.end(), [&](const Factor& f) {
      return f.kind != FactorKind::jump || (window.contains(f.mu) && window.contains(f.nu));
    });
    if (!reachable) continue;
    for (std::size_t col = 0; col < basis.dimension(); ++col) {
      m = basis.occupation(col);
      int photons = basis.photons(col);
      double amplitude = 1.0;
      bool alive = true;
      for (auto it = product.rbegin(); it != product.rend() && alive; ++it) {
        alive = apply_factor(*it, window, n_max, m, photons, amplitude);
      }
      if (!alive) continue;
      const auto e = electron.index_of(m);
      if (!e) continue;
      const auto row = basis.index_of(*e, photons);
      if (!row) continue;
      entries.push_back({*row, col, c * amplitude});
    }
  }
  return SparseOperator(basis.dimension(), entries);
}

}  // namespace qfel
