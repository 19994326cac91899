#include "fibundle/qmat.hpp"

#include <stdexcept>
#include <utility>

namespace fibundle {

namespace {

using i64 = std::int64_t;

struct IntEchelon {
  i64 rank = 0;
  std::vector<i64> pivot_cols;
  std::vector<std::vector<mpz_class>> rows;  // echelon rows, integer, pivoted
};

// Fraction-free (Bareiss) forward elimination with row pivoting and column
// skipping.  Each step divides exactly by the previous pivot, so entries stay
// the size of minors of the input.
IntEchelon bareiss_echelon(const QMat& m) {
  const i64 rows = m.rows(), cols = m.cols();
  std::vector<std::vector<mpz_class>> a(static_cast<std::size_t>(rows));
  for (i64 i = 0; i < rows; ++i) {
    mpz_class lcm = 1;
    for (i64 j = 0; j < cols; ++j) {
      mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), m.at(i, j).get_den().get_mpz_t());
    }
    a[i].resize(static_cast<std::size_t>(cols));
    for (i64 j = 0; j < cols; ++j) {
      const Rat& v = m.at(i, j);
      a[i][j] = v.get_num() * (lcm / v.get_den());
    }
  }
  IntEchelon out;
  mpz_class prev_piv = 1;
  i64 r = 0;
  mpz_class tmp;
  for (i64 c = 0; c < cols && r < rows; ++c) {
    i64 piv = -1;
    for (i64 i = r; i < rows; ++i) {
      if (a[i][c] != 0) {
        piv = i;
        break;
      }
    }
    if (piv < 0) continue;
    if (piv != r) std::swap(a[piv], a[r]);
    const mpz_class& pv = a[r][c];
    for (i64 i = r + 1; i < rows; ++i) {
      if (a[i][c] == 0) {
        // Still rescale so the Bareiss divisibility pattern is preserved.
        for (i64 j = c + 1; j < cols; ++j) {
          tmp = a[i][j] * pv;
          mpz_divexact(a[i][j].get_mpz_t(), tmp.get_mpz_t(), prev_piv.get_mpz_t());
        }
      } else {
        const mpz_class f = a[i][c];
        for (i64 j = c + 1; j < cols; ++j) {
          tmp = a[i][j] * pv - f * a[r][j];
          mpz_divexact(a[i][j].get_mpz_t(), tmp.get_mpz_t(), prev_piv.get_mpz_t());
        }
        a[i][c] = 0;
      }
    }
    prev_piv = pv;
    out.pivot_cols.push_back(c);
    ++r;
  }
  out.rank = r;
  a.resize(static_cast<std::size_t>(r));
  out.rows = std::move(a);
  return out;
}

}  // namespace

QMat::QMat(i64 rows, i64 cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
  a_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), Rat(0));
}

std::int64_t q_rank(const QMat& m) { return bareiss_echelon(m).rank; }

QMat q_kernel(const QMat& m) {
  IntEchelon ech = bareiss_echelon(m);
  const i64 cols = m.cols();
  std::vector<bool> is_pivot(static_cast<std::size_t>(cols), false);
  for (i64 c : ech.pivot_cols) is_pivot[static_cast<std::size_t>(c)] = true;
  std::vector<i64> free_cols;
  for (i64 c = 0; c < cols; ++c) {
    if (!is_pivot[static_cast<std::size_t>(c)]) free_cols.push_back(c);
  }
  const i64 nf = static_cast<i64>(free_cols.size());
  QMat basis(cols, nf);
  for (i64 f = 0; f < nf; ++f) basis.at(free_cols[f], f) = 1;
  for (i64 i = ech.rank - 1; i >= 0; --i) {
    const std::vector<mpz_class>& urow = ech.rows[static_cast<std::size_t>(i)];
    const i64 pc = ech.pivot_cols[i];
    for (i64 f = 0; f < nf; ++f) {
      Rat sum = 0;
      if (free_cols[f] > pc) sum += urow[free_cols[f]];
      for (i64 j = i + 1; j < ech.rank; ++j) {
        const i64 pcj = ech.pivot_cols[j];
        if (urow[pcj] != 0 && basis.at(pcj, f) != 0) sum += Rat(urow[pcj]) * basis.at(pcj, f);
      }
      if (sum != 0) {
        Rat val = -sum / Rat(urow[pc]);
        val.canonicalize();
        basis.at(pc, f) = val;
      }
    }
  }
  return basis;
}

QMat q_mul(const QMat& a, const QMat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("q_mul dimension mismatch");
  QMat c(a.rows(), b.cols());
  for (i64 i = 0; i < a.rows(); ++i) {
    for (i64 k = 0; k < a.cols(); ++k) {
      const Rat& av = a.at(i, k);
      if (av == 0) continue;
      for (i64 j = 0; j < b.cols(); ++j) {
        if (b.at(k, j) != 0) c.at(i, j) += av * b.at(k, j);
      }
    }
  }
  return c;
}

bool q_invertible(const QMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("q_invertible requires a square matrix");
  if (m.rows() == 0) return true;
  return q_rank(m) == m.rows();
}

}  // namespace fibundle
