#include "qfel/sparse_operator.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qfel/errors.hpp"

namespace qfel {

namespace {

void require_same_dim(const SparseOperator& a, const SparseOperator& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DomainError(fmt::format("{}: dimension mismatch {} vs {}", what, a.dim(), b.dim()));
  }
}

}  // namespace

SparseOperator::SparseOperator(std::size_t dim)
    : matrix_(static_cast<std::ptrdiff_t>(dim), static_cast<std::ptrdiff_t>(dim)) {}

SparseOperator::SparseOperator(std::size_t dim, std::span<const MatrixEntry> entries)
    : SparseOperator(dim) {
  std::vector<Eigen::Triplet<cplx, std::ptrdiff_t>> triplets;
  triplets.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row >= dim || e.col >= dim) {
      throw DomainError(fmt::format("entry ({}, {}) outside dimension {}", e.row, e.col, dim));
    }
    triplets.emplace_back(static_cast<std::ptrdiff_t>(e.row),
                          static_cast<std::ptrdiff_t>(e.col), e.value);
  }
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  prune();
}

SparseOperator::SparseOperator(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw DomainError("operator matrix must be square");
  prune();
}

SparseOperator SparseOperator::identity(std::size_t dim) {
  std::vector<cplx> ones(dim, cplx{1.0, 0.0});
  return diagonal(ones);
}

SparseOperator SparseOperator::diagonal(std::span<const cplx> values) {
  std::vector<MatrixEntry> entries;
  entries.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) entries.push_back({i, i, values[i]});
  return SparseOperator(values.size(), entries);
}

cplx SparseOperator::coeff(std::size_t row, std::size_t col) const {
  return matrix_.coeff(static_cast<std::ptrdiff_t>(row), static_cast<std::ptrdiff_t>(col));
}

std::vector<MatrixEntry> SparseOperator::entries() const {
  std::vector<MatrixEntry> out;
  out.reserve(nnz());
  for (std::ptrdiff_t c = 0; c < matrix_.outerSize(); ++c) {
    for (Matrix::InnerIterator it(matrix_, c); it; ++it) {
      out.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()),
                     it.value()});
    }
  }
  std::sort(out.begin(), out.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return out;
}

Eigen::MatrixXcd SparseOperator::to_dense() const { return Eigen::MatrixXcd(matrix_); }

SparseOperator SparseOperator::adjoint() const {
  return SparseOperator(Matrix(matrix_.adjoint()));
}

double SparseOperator::one_norm() const {
  double best = 0.0;
  for (std::ptrdiff_t c = 0; c < matrix_.outerSize(); ++c) {
    double column = 0.0;
    for (Matrix::InnerIterator it(matrix_, c); it; ++it) column += std::abs(it.value());
    best = std::max(best, column);
  }
  return best;
}

Eigen::VectorXcd SparseOperator::apply(const Eigen::VectorXcd& v) const {
  if (static_cast<std::size_t>(v.size()) != dim()) {
    throw DomainError(fmt::format("apply: vector length {} vs dimension {}", v.size(), dim()));
  }
  return matrix_ * v;
}

SparseOperator& SparseOperator::operator+=(const SparseOperator& rhs) {
  require_same_dim(*this, rhs, "operator+");
  matrix_ += rhs.matrix_;
  prune();
  return *this;
}

SparseOperator& SparseOperator::operator-=(const SparseOperator& rhs) {
  require_same_dim(*this, rhs, "operator-");
  matrix_ -= rhs.matrix_;
  prune();
  return *this;
}

SparseOperator& SparseOperator::operator*=(cplx scale) {
  matrix_ *= scale;
  prune();
  return *this;
}

SparseOperator operator*(const SparseOperator& lhs, const SparseOperator& rhs) {
  require_same_dim(lhs, rhs, "operator*");
  return SparseOperator(SparseOperator::Matrix(lhs.matrix_ * rhs.matrix_));
}

void SparseOperator::prune() {
  matrix_.prune([](const std::ptrdiff_t&, const std::ptrdiff_t&, const cplx& v) {
    return std::abs(v) >= kPruneTolerance;
  });
  matrix_.makeCompressed();
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b, "commutator");
  return SparseOperator(SparseOperator::Matrix(a.matrix() * b.matrix() - b.matrix() * a.matrix()));
}

double max_abs_difference(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b, "max_abs_difference");
  const SparseOperator::Matrix diff = a.matrix() - b.matrix();
  double best = 0.0;
  for (std::ptrdiff_t c = 0; c < diff.outerSize(); ++c) {
    for (SparseOperator::Matrix::InnerIterator it(diff, c); it; ++it) {
      best = std::max(best, std::abs(it.value()));
    }
  }
  return best;
}

double max_abs_difference_on_columns(const SparseOperator& a, const SparseOperator& b,
                                     std::span<const std::size_t> columns) {
  require_same_dim(a, b, "max_abs_difference_on_columns");
  const SparseOperator::Matrix diff = a.matrix() - b.matrix();
  double best = 0.0;
  for (const std::size_t c : columns) {
    for (SparseOperator::Matrix::InnerIterator it(diff, static_cast<std::ptrdiff_t>(c)); it;
         ++it) {
      best = std::max(best, std::abs(it.value()));
    }
  }
  return best;
}

double max_hermiticity_defect(const SparseOperator& a, std::span<const std::size_t> states) {
  std::vector<char> inside(a.dim(), 0);
  for (const std::size_t s : states) inside.at(s) = 1;
  const SparseOperator::Matrix diff = a.matrix() - SparseOperator::Matrix(a.matrix().adjoint());
  double best = 0.0;
  for (std::ptrdiff_t c = 0; c < diff.outerSize(); ++c) {
    if (!inside[static_cast<std::size_t>(c)]) continue;
    for (SparseOperator::Matrix::InnerIterator it(diff, c); it; ++it) {
      if (inside[static_cast<std::size_t>(it.row())]) best = std::max(best, std::abs(it.value()));
    }
  }
  return best;
}

void write_operator(std::ostream& out, const SparseOperator& op) {
  const auto entries = op.entries();
  fmt::print(out, "{} {}\n", op.dim(), entries.size());
  for (const auto& e : entries) {
    fmt::print(out, "{} {} {:.17g} {:.17g}\n", e.row, e.col, e.value.real(), e.value.imag());
  }
}

SparseOperator read_operator(std::istream& in) {
  std::size_t dim = 0;
  std::size_t nnz = 0;
  if (!(in >> dim >> nnz)) throw DomainError("operator dump: missing 'dim nnz' header");
  std::vector<MatrixEntry> entries;
  entries.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t r = 0;
    std::size_t c = 0;
    double re = 0.0;
    double im = 0.0;
    if (!(in >> r >> c >> re >> im)) {
      throw DomainError(fmt::format("operator dump: truncated at entry {}", k));
    }
    entries.push_back({r, c, {re, im}});
  }
  return SparseOperator(dim, entries);
}

}  // namespace qfel
