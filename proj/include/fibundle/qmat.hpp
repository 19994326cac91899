#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <vector>

namespace fibundle {

using Rat = mpq_class;

// Dense matrix over Q.  Elimination runs fraction-free (Bareiss) on a
// denominator-cleared integer copy; divisions happen only at the exact
// division steps and during the final back-substitution.
class QMat {
 public:
  QMat() = default;
  QMat(std::int64_t rows, std::int64_t cols);

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }

  const Rat& at(std::int64_t r, std::int64_t c) const { return a_[r * cols_ + c]; }
  Rat& at(std::int64_t r, std::int64_t c) { return a_[r * cols_ + c]; }

  friend bool operator==(const QMat&, const QMat&) = default;

 private:
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<Rat> a_;
};

std::int64_t q_rank(const QMat& m);

// Nullspace basis, one column per free column (cols x nullity).
QMat q_kernel(const QMat& m);

QMat q_mul(const QMat& a, const QMat& b);

// Square matrices only; the 0 x 0 matrix is invertible.
bool q_invertible(const QMat& m);

}  // namespace fibundle
