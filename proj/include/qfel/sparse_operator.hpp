#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace qfel {

using cplx = std::complex<double>;

inline constexpr double kPruneTolerance = 1e-15;

struct MatrixEntry {
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Square complex sparse matrix. Duplicate entries are summed on
/// construction and magnitudes below kPruneTolerance are dropped.
class SparseOperator {
 public:
  using Matrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor, std::ptrdiff_t>;

  SparseOperator() = default;
  explicit SparseOperator(std::size_t dim);
  SparseOperator(std::size_t dim, std::span<const MatrixEntry> entries);
  explicit SparseOperator(Matrix matrix);

  static SparseOperator identity(std::size_t dim);
  static SparseOperator diagonal(std::span<const cplx> values);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t nnz() const { return static_cast<std::size_t>(matrix_.nonZeros()); }
  const Matrix& matrix() const { return matrix_; }

  cplx coeff(std::size_t row, std::size_t col) const;
  // Entries sorted by (row, col).
  std::vector<MatrixEntry> entries() const;
  Eigen::MatrixXcd to_dense() const;

  SparseOperator adjoint() const;
  double one_norm() const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

  SparseOperator& operator+=(const SparseOperator& rhs);
  SparseOperator& operator-=(const SparseOperator& rhs);
  SparseOperator& operator*=(cplx scale);

  friend SparseOperator operator+(SparseOperator lhs, const SparseOperator& rhs) {
    return lhs += rhs;
  }
  friend SparseOperator operator-(SparseOperator lhs, const SparseOperator& rhs) {
    return lhs -= rhs;
  }
  friend SparseOperator operator*(SparseOperator op, cplx scale) { return op *= scale; }
  friend SparseOperator operator*(cplx scale, SparseOperator op) { return op *= scale; }
  friend SparseOperator operator*(const SparseOperator& lhs, const SparseOperator& rhs);

 private:
  void prune();

  Matrix matrix_;
};

/// AB - BA.
SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);

/// Largest |a_ij - b_ij| over all entries.
double max_abs_difference(const SparseOperator& a, const SparseOperator& b);

/// Largest |a_ij - b_ij| over the given columns (all rows).
double max_abs_difference_on_columns(const SparseOperator& a, const SparseOperator& b,
                                     std::span<const std::size_t> columns);

/// Largest |a_ij - conj(a_ji)| with both i and j in `states`.
double max_hermiticity_defect(const SparseOperator& a, std::span<const std::size_t> states);

/// Text dump: a header line "dim nnz", then "row col re im" per entry,
/// zero-based, sorted by (row, col).
void write_operator(std::ostream& out, const SparseOperator& op);
SparseOperator read_operator(std::istream& in);

}  // namespace qfel
