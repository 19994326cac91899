#pragma once

#include <cstdint>
#include <vector>

#include "fibundle/field.hpp"

namespace fibundle {

// Dense matrix over F_p, entries stored reduced in [0, p).  Rank decisions in
// this project are exact by construction; no floating point is involved
// anywhere in the elimination paths.
class FpMat {
 public:
  FpMat() = default;
  FpMat(std::int64_t rows, std::int64_t cols, std::uint32_t p);

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  std::uint32_t prime() const { return p_; }

  std::uint32_t at(std::int64_t r, std::int64_t c) const { return a_[r * cols_ + c]; }
  void set(std::int64_t r, std::int64_t c, std::uint32_t v) { a_[r * cols_ + c] = v; }

  std::uint32_t* row(std::int64_t r) { return a_.data() + r * cols_; }
  const std::uint32_t* row(std::int64_t r) const { return a_.data() + r * cols_; }

  friend bool operator==(const FpMat&, const FpMat&) = default;

 private:
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::uint32_t p_ = kDefaultPrime;
  std::vector<std::uint32_t> a_;
};

struct FpEchelon {
  std::int64_t rank = 0;
  std::vector<std::int64_t> pivot_cols;
};

// Forward row echelon in place: rows end up permuted, pivot rows hold the
// echelon content, and everything below a pivot is logically zero (the
// storage there is unspecified).  Blocked with a SIMD multiply-accumulate
// update for primes below 2^15; plain exact arithmetic otherwise.
FpEchelon fp_echelon(FpMat& m);

std::int64_t fp_rank(FpMat m);

// Nullspace basis: one column per free column of m (cols x nullity).
FpMat fp_kernel(const FpMat& m);

FpMat fp_mul(const FpMat& a, const FpMat& b);

// Square matrices only; the 0 x 0 matrix is invertible.
bool fp_invertible(const FpMat& m);

std::uint32_t fp_inv(std::uint32_t a, std::uint32_t p);

namespace detail {
// 0 = choose automatically (up to two worker threads inside eliminations).
// Batch drivers that parallelize at a coarser grain set this to 1 in their
// workers to avoid oversubscription.
extern thread_local int linalg_threads_override;
}  // namespace detail

}  // namespace fibundle
