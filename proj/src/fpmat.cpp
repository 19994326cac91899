#include "fibundle/fpmat.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <vector>

#if defined(__AVX512BW__)
#include <immintrin.h>
#endif

namespace fibundle {

namespace detail {
thread_local int linalg_threads_override = 0;
}  // namespace detail

namespace {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// Reduction modulo p for dividends below a caller-supplied bound (< 2^63),
// Granlund-Montgomery style: q = floor(x * ceil(2^S / p) / 2^S) is floor(x/p)
// or one above it once 2^S exceeds the bound, and a single fix-up settles it.
struct BoundedMod {
  u64 magic = 0;
  u32 p = 2;
  int shift = 0;

  BoundedMod(u32 prime, u64 bound) : p(prime) {
    int bits = 64 - __builtin_clzll(bound | 1);
    shift = bits + 1;
    magic = static_cast<u64>(((static_cast<unsigned __int128>(1) << shift) + p - 1) / p);
  }

  u32 operator()(u64 x) const {
    const u64 q = static_cast<u64>((static_cast<unsigned __int128>(x) * magic) >> shift);
    std::int64_t r = static_cast<std::int64_t>(x - q * p);
    if (r < 0) r += p;
    return static_cast<u32>(r);
  }
};

inline u32 mod_i64(i64 v, u32 p) {
  i64 r = v % static_cast<i64>(p);
  if (r < 0) r += p;
  return static_cast<u32>(r);
}

u64 pow_mod(u64 base, u64 exp, u64 mod) {
  unsigned __int128 acc = 1;
  unsigned __int128 b = base % mod;
  while (exp) {
    if (exp & 1) acc = acc * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return static_cast<u64>(acc);
}

}  // namespace

bool is_prime(u32 n) {
  if (n < 2) return false;
  for (u32 q : {2u, 3u, 5u, 7u, 11u, 13u}) {
    if (n % q == 0) return n == q;
  }
  u32 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic Miller-Rabin for 32-bit inputs.
  for (u64 a : {2ull, 7ull, 61ull}) {
    u64 x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = static_cast<u64>((static_cast<unsigned __int128>(x) * x) % n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

FieldSpec FieldSpec::fp(u32 p) {
  if (!is_prime(p)) throw std::invalid_argument("field characteristic must be prime");
  if (p > (1u << 31)) throw std::invalid_argument("prime field order must be below 2^31");
  return FieldSpec{Kind::PrimeField, p};
}

FieldSpec FieldSpec::rationals() { return FieldSpec{Kind::Rationals, 0}; }

FpMat::FpMat(i64 rows, i64 cols, u32 p) : rows_(rows), cols_(cols), p_(p) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
  a_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0);
}

u32 fp_inv(u32 a, u32 p) {
  if (a == 0) throw std::domain_error("fp_inv(0)");
  i64 t = 0, new_t = 1;
  i64 r = p, new_r = a;
  while (new_r != 0) {
    i64 q = r / new_r;
    t -= q * new_t;
    std::swap(t, new_t);
    r -= q * new_r;
    std::swap(r, new_r);
  }
  if (t < 0) t += p;
  return static_cast<u32>(t);
}

namespace {

// ---------------------------------------------------------------------------
// C -= A * B over F_p, dense row-major with leading dimensions.
//
// For p < 2^15 the operands are repacked in the balanced representation
// (entries in [-(p-1)/2, (p-1)/2] as int16); products of entry pairs are
// accumulated with vpmaddwd/vpdpwssd into int32 lanes, widened to int64 every
// `guard` steps so nothing ever wraps.  The reduction back to [0, p) happens
// once per output element.  Everything stays exact.
// ---------------------------------------------------------------------------

constexpr i64 kGemmJTile = 512;

#if defined(__AVX512BW__)

void gemm_sub_simd_range(u32* C, i64 ldc, const std::int32_t* apack, i64 kp,
                         const std::int16_t* bpack, i64 ldb2, i64 m, i64 j_begin, i64 j_end,
                         u32 p, int guard, i64 bigmul, const BoundedMod& fm) {
  for (i64 jt = j_begin; jt < j_end; jt += kGemmJTile) {
    const i64 jt_end = std::min(j_end, jt + kGemmJTile);
    i64 i = 0;
    for (; i + 4 <= m; i += 4) {
      const std::int32_t* a0 = apack + (i + 0) * kp;
      const std::int32_t* a1 = apack + (i + 1) * kp;
      const std::int32_t* a2 = apack + (i + 2) * kp;
      const std::int32_t* a3 = apack + (i + 3) * kp;
      for (i64 j0 = jt; j0 < jt_end; j0 += 16) {
        __m512i s0 = _mm512_setzero_si512(), s1 = _mm512_setzero_si512();
        __m512i s2 = _mm512_setzero_si512(), s3 = _mm512_setzero_si512();
        __m512i w0 = _mm512_setzero_si512(), w1 = _mm512_setzero_si512();
        __m512i w2 = _mm512_setzero_si512(), w3 = _mm512_setzero_si512();
        __m512i w4 = _mm512_setzero_si512(), w5 = _mm512_setzero_si512();
        __m512i w6 = _mm512_setzero_si512(), w7 = _mm512_setzero_si512();
        int g = 0;
        for (i64 kk = 0; kk < kp; ++kk) {
          __m512i bv = _mm512_loadu_si512(bpack + kk * ldb2 + 2 * j0);
          __m512i av0 = _mm512_set1_epi32(a0[kk]);
          __m512i av1 = _mm512_set1_epi32(a1[kk]);
          __m512i av2 = _mm512_set1_epi32(a2[kk]);
          __m512i av3 = _mm512_set1_epi32(a3[kk]);
#if defined(__AVX512VNNI__)
          s0 = _mm512_dpwssd_epi32(s0, av0, bv);
          s1 = _mm512_dpwssd_epi32(s1, av1, bv);
          s2 = _mm512_dpwssd_epi32(s2, av2, bv);
          s3 = _mm512_dpwssd_epi32(s3, av3, bv);
#else
          s0 = _mm512_add_epi32(s0, _mm512_madd_epi16(av0, bv));
          s1 = _mm512_add_epi32(s1, _mm512_madd_epi16(av1, bv));
          s2 = _mm512_add_epi32(s2, _mm512_madd_epi16(av2, bv));
          s3 = _mm512_add_epi32(s3, _mm512_madd_epi16(av3, bv));
#endif
          if (++g == guard) {
            w0 = _mm512_add_epi64(w0, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s0)));
            w1 = _mm512_add_epi64(w1, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s0, 1)));
            w2 = _mm512_add_epi64(w2, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s1)));
            w3 = _mm512_add_epi64(w3, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s1, 1)));
            w4 = _mm512_add_epi64(w4, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s2)));
            w5 = _mm512_add_epi64(w5, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s2, 1)));
            w6 = _mm512_add_epi64(w6, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s3)));
            w7 = _mm512_add_epi64(w7, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s3, 1)));
            s0 = _mm512_setzero_si512();
            s1 = _mm512_setzero_si512();
            s2 = _mm512_setzero_si512();
            s3 = _mm512_setzero_si512();
            g = 0;
          }
        }
        if (g) {
          w0 = _mm512_add_epi64(w0, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s0)));
          w1 = _mm512_add_epi64(w1, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s0, 1)));
          w2 = _mm512_add_epi64(w2, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s1)));
          w3 = _mm512_add_epi64(w3, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s1, 1)));
          w4 = _mm512_add_epi64(w4, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s2)));
          w5 = _mm512_add_epi64(w5, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s2, 1)));
          w6 = _mm512_add_epi64(w6, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s3)));
          w7 = _mm512_add_epi64(w7, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s3, 1)));
        }
        alignas(64) i64 buf[64];
        _mm512_store_si512(buf + 0, w0);
        _mm512_store_si512(buf + 8, w1);
        _mm512_store_si512(buf + 16, w2);
        _mm512_store_si512(buf + 24, w3);
        _mm512_store_si512(buf + 32, w4);
        _mm512_store_si512(buf + 40, w5);
        _mm512_store_si512(buf + 48, w6);
        _mm512_store_si512(buf + 56, w7);
        const i64 jn = std::min<i64>(16, jt_end - j0);
        for (int r = 0; r < 4; ++r) {
          u32* crow = C + (i + r) * ldc;
          for (i64 q = 0; q < jn; ++q) {
            u64 shifted = static_cast<u64>(static_cast<i64>(crow[j0 + q]) - buf[r * 16 + q] + bigmul);
            crow[j0 + q] = fm(shifted);
          }
        }
      }
    }
    for (; i < m; ++i) {  // tail rows, one at a time
      const std::int32_t* a0 = apack + i * kp;
      for (i64 j0 = jt; j0 < jt_end; j0 += 16) {
        __m512i s0 = _mm512_setzero_si512();
        __m512i w0 = _mm512_setzero_si512(), w1 = _mm512_setzero_si512();
        int g = 0;
        for (i64 kk = 0; kk < kp; ++kk) {
          __m512i bv = _mm512_loadu_si512(bpack + kk * ldb2 + 2 * j0);
          __m512i av0 = _mm512_set1_epi32(a0[kk]);
#if defined(__AVX512VNNI__)
          s0 = _mm512_dpwssd_epi32(s0, av0, bv);
#else
          s0 = _mm512_add_epi32(s0, _mm512_madd_epi16(av0, bv));
#endif
          if (++g == guard) {
            w0 = _mm512_add_epi64(w0, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s0)));
            w1 = _mm512_add_epi64(w1, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s0, 1)));
            s0 = _mm512_setzero_si512();
            g = 0;
          }
        }
        if (g) {
          w0 = _mm512_add_epi64(w0, _mm512_cvtepi32_epi64(_mm512_castsi512_si256(s0)));
          w1 = _mm512_add_epi64(w1, _mm512_cvtepi32_epi64(_mm512_extracti64x4_epi64(s0, 1)));
        }
        alignas(64) i64 buf[16];
        _mm512_store_si512(buf + 0, w0);
        _mm512_store_si512(buf + 8, w1);
        const i64 jn = std::min<i64>(16, jt_end - j0);
        u32* crow = C + i * ldc;
        for (i64 q = 0; q < jn; ++q) {
          u64 shifted = static_cast<u64>(static_cast<i64>(crow[j0 + q]) - buf[q] + bigmul);
          crow[j0 + q] = fm(shifted);
        }
      }
    }
  }
}

#endif  // __AVX512BW__

void gemm_sub_scalar(u32* C, i64 ldc, const u32* A, i64 lda, const u32* B, i64 ldb, i64 m, i64 n,
                     i64 k, u32 p) {
  // Unsigned accumulation with reductions spaced so u64 never wraps.
  const u64 per_term = static_cast<u64>(p - 1) * (p - 1);
  const i64 chunk = std::max<i64>(1, static_cast<i64>((~u64{0} - p) / (per_term + 1)));
  std::vector<u64> acc;
  for (i64 i = 0; i < m; ++i) {
    acc.assign(static_cast<std::size_t>(n), 0);
    const u32* arow = A + i * lda;
    for (i64 k0 = 0; k0 < k; k0 += chunk) {
      const i64 k1 = std::min(k, k0 + chunk);
      for (i64 kk = k0; kk < k1; ++kk) {
        const u64 av = arow[kk];
        if (!av) continue;
        const u32* brow = B + kk * ldb;
        for (i64 j = 0; j < n; ++j) acc[j] += av * brow[j];
      }
      if (k1 < k) {
        for (i64 j = 0; j < n; ++j) acc[j] %= p;
      }
    }
    u32* crow = C + i * ldc;
    for (i64 j = 0; j < n; ++j) {
      const u32 prod = static_cast<u32>(acc[j] % p);
      const u32 cur = crow[j];
      crow[j] = cur >= prod ? cur - prod : cur + p - prod;
    }
  }
}

// Entry point used by the echelon update and fp_mul.
void gemm_sub(u32* C, i64 ldc, const u32* A, i64 lda, const u32* B, i64 ldb, i64 m, i64 n, i64 k,
              u32 p, int threads) {
  if (m == 0 || n == 0 || k == 0) return;
#if defined(__AVX512BW__)
  if (p < (1u << 15)) {
    const i64 hp = (p - 1) / 2;
    const i64 hpb = std::max<i64>(hp, 1);  // p = 2 balances onto {0, -1}
    const int guard = static_cast<int>(
        std::min<i64>(1 << 20, std::max<i64>(1, ((static_cast<i64>(1) << 31) - 1) / (2 * hpb * hpb))));
    const i64 kp = (k + 1) / 2;
    const i64 npad = (n + 15) / 16 * 16;
    // A packed as int16 pairs merged into one int32 broadcast word per pair.
    std::vector<std::int32_t> apack(static_cast<std::size_t>(m) * kp);
    auto balance = [&](u32 v) -> std::int16_t {
      return static_cast<std::int16_t>(v > static_cast<u32>(hp) ? static_cast<int>(v) - static_cast<int>(p)
                                                                : static_cast<int>(v));
    };
    for (i64 i = 0; i < m; ++i) {
      const u32* arow = A + i * lda;
      for (i64 kk = 0; kk < kp; ++kk) {
        const std::uint16_t lo = static_cast<std::uint16_t>(balance(arow[2 * kk]));
        const std::uint16_t hi =
            2 * kk + 1 < k ? static_cast<std::uint16_t>(balance(arow[2 * kk + 1])) : 0;
        apack[i * kp + kk] =
            static_cast<std::int32_t>(static_cast<u32>(lo) | (static_cast<u32>(hi) << 16));
      }
    }
    // B packed as interleaved row pairs.
    std::vector<std::int16_t> bpack(static_cast<std::size_t>(kp) * 2 * npad, 0);
    const i64 ldb2 = 2 * npad;
    for (i64 kk = 0; kk < kp; ++kk) {
      const u32* b0 = B + 2 * kk * ldb;
      const u32* b1 = 2 * kk + 1 < k ? B + (2 * kk + 1) * ldb : nullptr;
      std::int16_t* dst = bpack.data() + kk * ldb2;
      for (i64 j = 0; j < n; ++j) {
        dst[2 * j] = balance(b0[j]);
        dst[2 * j + 1] = b1 ? balance(b1[j]) : std::int16_t{0};
      }
    }
    // |accumulated sum| <= kp * 2 * hpb^2; shift into [0, bound) with a
    // multiple of p before the bounded reduction.
    const u64 maxabs = static_cast<u64>(kp) * 2 * static_cast<u64>(hpb) * static_cast<u64>(hpb);
    const i64 bigmul = static_cast<i64>((maxabs / p + 2) * p);
    const BoundedMod fm(p, static_cast<u64>(bigmul) + maxabs + p);
    if (threads > 1 && n >= 2 * kGemmJTile) {
      const i64 half = (n / 2 + 15) / 16 * 16;
      std::thread th(gemm_sub_simd_range, C, ldc, apack.data(), kp, bpack.data(), ldb2, m, i64{0},
                     half, p, guard, bigmul, std::cref(fm));
      gemm_sub_simd_range(C, ldc, apack.data(), kp, bpack.data(), ldb2, m, half, n, p, guard,
                          bigmul, fm);
      th.join();
    } else {
      gemm_sub_simd_range(C, ldc, apack.data(), kp, bpack.data(), ldb2, m, 0, n, p, guard, bigmul,
                          fm);
    }
    return;
  }
#endif
  (void)threads;
  gemm_sub_scalar(C, ldc, A, lda, B, ldb, m, n, k, p);
}

// ---------------------------------------------------------------------------
// Echelon forms
// ---------------------------------------------------------------------------

FpEchelon echelon_simple(FpMat& M) {
  const u32 p = M.prime();
  const i64 rows = M.rows(), cols = M.cols();
  FpEchelon out;
  i64 r = 0;
  for (i64 c = 0; c < cols && r < rows; ++c) {
    i64 piv = -1;
    for (i64 i = r; i < rows; ++i) {
      if (M.at(i, c) != 0) {
        piv = i;
        break;
      }
    }
    if (piv < 0) continue;
    if (piv != r) {
      for (i64 j = 0; j < cols; ++j) {
        u32 tmp = M.at(r, j);
        M.set(r, j, M.at(piv, j));
        M.set(piv, j, tmp);
      }
    }
    const u32 pinv = fp_inv(M.at(r, c), p);
    for (i64 i = r + 1; i < rows; ++i) {
      const u32 f = M.at(i, c);
      if (!f) continue;
      const u64 mult = static_cast<u64>(f) * pinv % p;
      const u64 neg = p - static_cast<u32>(mult);
      const u32* prow = M.row(r);
      u32* irow = M.row(i);
      for (i64 j = c; j < cols; ++j) {
        irow[j] = static_cast<u32>((irow[j] + neg * prow[j]) % p);
      }
    }
    out.pivot_cols.push_back(c);
    ++r;
  }
  out.rank = r;
  return out;
}

constexpr i64 kPanelWidth = 512;     // trailing updates run at this inner dimension
constexpr i64 kSubPanelWidth = 64;   // scalar base case of the panel recursion
constexpr i64 kBlockedThreshold = 160;

int resolve_threads() {
  if (detail::linalg_threads_override > 0) return detail::linalg_threads_override;
  return static_cast<int>(std::max(1u, std::min(2u, std::thread::hardware_concurrency())));
}

// Multipliers of `nrows` rows starting at row_begin against the pivots whose
// absolute columns are pivot_cols[piv_begin .. piv_begin+npiv), row-major.
void gather_multipliers(const FpMat& M, i64 row_begin, i64 nrows, const std::vector<i64>& pivot_cols,
                        std::size_t piv_begin, i64 npiv, std::vector<u32>& out) {
  out.assign(static_cast<std::size_t>(nrows) * npiv, 0);
  for (i64 i = 0; i < nrows; ++i) {
    u32* dst = out.data() + i * npiv;
    const u32* row = M.row(row_begin + i);
    for (i64 q = 0; q < npiv; ++q) dst[q] = row[pivot_cols[piv_begin + static_cast<std::size_t>(q)]];
  }
}

// Unit lower-triangular update of the npiv pivot rows at r0.. over columns
// [cstart, cend): row j -= sum_{q<j} mult(j, q) * row q.  Blocked so that the
// cross-block work is one GEMM per block of kSubPanelWidth pivots.
void trsm_pivot_rows(FpMat& M, i64 r0, const std::vector<i64>& pivot_cols, std::size_t piv_begin,
                     i64 npiv, i64 cstart, i64 cend, int threads) {
  const u32 p = M.prime();
  const i64 width = cend - cstart;
  if (width <= 0 || npiv <= 1) return;
  std::vector<u32> lbuf;
  std::vector<i64> rowbuf(static_cast<std::size_t>(width));
  for (i64 b0 = 0; b0 < npiv; b0 += kSubPanelWidth) {
    const i64 bn = std::min(kSubPanelWidth, npiv - b0);
    if (b0 > 0) {
      gather_multipliers(M, r0 + b0, bn, pivot_cols, piv_begin, b0, lbuf);
      gemm_sub(M.row(r0 + b0) + cstart, M.cols(), lbuf.data(), b0, M.row(r0) + cstart, M.cols(), bn,
               width, b0, p, threads);
    }
    for (i64 j = 1; j < bn; ++j) {
      u32* trow = M.row(r0 + b0 + j) + cstart;
      bool loaded = false;
      for (i64 q = 0; q < j; ++q) {
        const u64 f = M.at(r0 + b0 + j, pivot_cols[piv_begin + static_cast<std::size_t>(b0 + q)]);
        if (!f) continue;
        if (!loaded) {
          for (i64 w = 0; w < width; ++w) rowbuf[w] = trow[w];
          loaded = true;
        }
        const u32* urow = M.row(r0 + b0 + q) + cstart;
        for (i64 w = 0; w < width; ++w) rowbuf[w] -= static_cast<i64>(f * urow[w]);
      }
      if (loaded) {
        for (i64 w = 0; w < width; ++w) trow[w] = mod_i64(rowbuf[w], p);
      }
    }
  }
}

// Base case: scalar factorization of columns [c0, c0+pw), rows [r0, rows),
// via an i64 column scratch with delayed reductions.  Touches nothing to the
// right of the block; row swaps apply to the full matrix rows.
i64 factor_panel_scalar(FpMat& M, i64 r0, i64 c0, i64 pw, std::vector<i64>& pivot_cols) {
  const u32 p = M.prime();
  const i64 rows = M.rows(), cols = M.cols();
  const i64 mrows = rows - r0;
  std::vector<i64> panel(static_cast<std::size_t>(pw) * mrows);
  for (i64 i = 0; i < mrows; ++i) {
    const u32* src = M.row(r0 + i) + c0;
    for (i64 pc = 0; pc < pw; ++pc) panel[pc * mrows + i] = src[pc];
  }
  i64 npiv = 0;
  for (i64 pc = 0; pc < pw; ++pc) {
    i64* col = panel.data() + pc * mrows;
    for (i64 i = npiv; i < mrows; ++i) col[i] = mod_i64(col[i], p);
    i64 piv = -1;
    for (i64 i = npiv; i < mrows; ++i) {
      if (col[i] != 0) {
        piv = i;
        break;
      }
    }
    if (piv < 0) continue;
    if (piv != npiv) {
      for (i64 pc2 = 0; pc2 < pw; ++pc2) {
        std::swap(panel[pc2 * mrows + piv], panel[pc2 * mrows + npiv]);
      }
      u32* ra = M.row(r0 + piv);
      u32* rb = M.row(r0 + npiv);
      for (i64 j = 0; j < c0; ++j) std::swap(ra[j], rb[j]);
      for (i64 j = c0 + pw; j < cols; ++j) std::swap(ra[j], rb[j]);
    }
    const u32 pinv = fp_inv(static_cast<u32>(col[npiv]), p);
    for (i64 i = npiv + 1; i < mrows; ++i) {
      col[i] = static_cast<i64>(static_cast<u64>(col[i]) * pinv % p);
    }
    for (i64 pc2 = pc + 1; pc2 < pw; ++pc2) {
      i64* col2 = panel.data() + pc2 * mrows;
      const u32 u = mod_i64(col2[npiv], p);
      col2[npiv] = u;
      if (!u) continue;
      const u64 uu = u;
      for (i64 i = npiv + 1; i < mrows; ++i) col2[i] -= static_cast<i64>(static_cast<u64>(col[i]) * uu);
    }
    pivot_cols.push_back(c0 + pc);
    ++npiv;
  }
  for (i64 pc = 0; pc < pw; ++pc) {
    const i64* col = panel.data() + pc * mrows;
    u32* base = M.row(r0) + c0 + pc;
    for (i64 i = 0; i < mrows; ++i) base[i * cols] = mod_i64(col[i], p);
  }
  return npiv;
}

// Recursive panel factorization: factor the left half, push its effect into
// the right half (pivot rows via TRSM, the block below via GEMM), then factor
// the right half.  Keeps the expensive updates at GEMM granularity.
i64 factor_panel(FpMat& M, i64 r0, i64 c0, i64 pw, std::vector<i64>& pivot_cols,
                 std::vector<u32>& lbuf, int threads) {
  if (pw <= kSubPanelWidth) return factor_panel_scalar(M, r0, c0, pw, pivot_cols);
  const u32 p = M.prime();
  i64 half = pw / 2 / kSubPanelWidth * kSubPanelWidth;
  if (half == 0) half = kSubPanelWidth;
  const std::size_t piv_begin = pivot_cols.size();
  const i64 np1 = factor_panel(M, r0, c0, half, pivot_cols, lbuf, threads);
  if (np1 > 0) {
    trsm_pivot_rows(M, r0, pivot_cols, piv_begin, np1, c0 + half, c0 + pw, threads);
    const i64 rb = M.rows() - (r0 + np1);
    if (rb > 0) {
      gather_multipliers(M, r0 + np1, rb, pivot_cols, piv_begin, np1, lbuf);
      gemm_sub(M.row(r0 + np1) + c0 + half, M.cols(), lbuf.data(), np1, M.row(r0) + c0 + half,
               M.cols(), rb, pw - half, np1, p, threads);
    }
  }
  const i64 np2 = factor_panel(M, r0 + np1, c0 + half, pw - half, pivot_cols, lbuf, threads);
  return np1 + np2;
}

FpEchelon echelon_blocked(FpMat& M) {
  const u32 p = M.prime();
  const i64 rows = M.rows(), cols = M.cols();
  const int threads = resolve_threads();
  FpEchelon out;
  std::vector<u32> lbuf;
  i64 r = 0, c0 = 0;
  while (r < rows && c0 < cols) {
    const i64 pw = std::min(kPanelWidth, cols - c0);
    const std::size_t piv_begin = out.pivot_cols.size();
    const i64 npiv = factor_panel(M, r, c0, pw, out.pivot_cols, lbuf, threads);
    const i64 ntrail = cols - c0 - pw;
    if (npiv > 0 && ntrail > 0) {
      trsm_pivot_rows(M, r, out.pivot_cols, piv_begin, npiv, c0 + pw, cols, threads);
      const i64 rb = rows - r - npiv;
      if (rb > 0) {
        gather_multipliers(M, r + npiv, rb, out.pivot_cols, piv_begin, npiv, lbuf);
        gemm_sub(M.row(r + npiv) + c0 + pw, cols, lbuf.data(), npiv, M.row(r) + c0 + pw, cols, rb,
                 ntrail, npiv, p, threads);
      }
    }
    r += npiv;
    c0 += pw;
  }
  out.rank = r;
  return out;
}

}  // namespace

FpEchelon fp_echelon(FpMat& m) {
  if (m.rows() == 0 || m.cols() == 0) return FpEchelon{};
  if (m.rows() < kBlockedThreshold || m.cols() < kBlockedThreshold || m.prime() >= (1u << 15)) {
    return echelon_simple(m);
  }
  return echelon_blocked(m);
}

std::int64_t fp_rank(FpMat m) { return fp_echelon(m).rank; }

FpMat fp_kernel(const FpMat& m) {
  const u32 p = m.prime();
  FpMat work = m;
  FpEchelon ech = fp_echelon(work);
  const i64 cols = m.cols();
  const i64 rank = ech.rank;
  std::vector<bool> is_pivot(static_cast<std::size_t>(cols), false);
  for (i64 c : ech.pivot_cols) is_pivot[static_cast<std::size_t>(c)] = true;
  std::vector<i64> free_cols;
  for (i64 c = 0; c < cols; ++c) {
    if (!is_pivot[static_cast<std::size_t>(c)]) free_cols.push_back(c);
  }
  const i64 nf = static_cast<i64>(free_cols.size());
  FpMat basis(cols, nf, p);
  if (nf == 0) return basis;
  for (i64 f = 0; f < nf; ++f) basis.set(free_cols[f], f, 1);
  // Back-substitute all free columns at once, descending over pivot blocks;
  // contributions of already-solved blocks enter through one GEMM per block,
  // the triangular part through exact i64 accumulators.  Entries left of a
  // pivot are logical zeros whose storage is unspecified; never read them.
  FpMat x(rank, nf, p);  // x.row(i) = solved values of pivot variable i
  constexpr i64 kBsBlock = 64;
  std::vector<u32> coef;
  std::vector<u64> acc(static_cast<std::size_t>(nf));
  for (i64 b_end = rank; b_end > 0;) {
    const i64 b_begin = std::max<i64>(0, b_end - kBsBlock);
    const i64 bn = b_end - b_begin;
    // Seed the block with the free-column entries of U.
    for (i64 i = b_begin; i < b_end; ++i) {
      const u32* urow = work.row(i);
      const i64 pc = ech.pivot_cols[i];
      u32* xr = x.row(i);
      for (i64 f = 0; f < nf; ++f) xr[f] = free_cols[f] > pc ? urow[free_cols[f]] : 0;
    }
    // x_block += U[block rows, later pivot cols] * x_later, as x -= (p - U) x.
    const i64 nlater = rank - b_end;
    if (nlater > 0) {
      coef.assign(static_cast<std::size_t>(bn) * nlater, 0);
      for (i64 i = 0; i < bn; ++i) {
        const u32* urow = work.row(b_begin + i);
        for (i64 j = 0; j < nlater; ++j) {
          const u32 v = urow[ech.pivot_cols[b_end + j]];
          coef[i * nlater + j] = v ? p - v : 0;
        }
      }
      gemm_sub(x.row(b_begin), nf, coef.data(), nlater, x.row(b_end), nf, bn, nf, nlater, p,
               resolve_threads());
    }
    // Triangular part within the block, bottom-up.
    for (i64 i = b_end - 1; i >= b_begin; --i) {
      const u32* urow = work.row(i);
      u32* xr = x.row(i);
      for (i64 f = 0; f < nf; ++f) acc[f] = xr[f];
      for (i64 j = i + 1; j < b_end; ++j) {
        const u64 c = urow[ech.pivot_cols[j]];
        if (!c) continue;
        const u32* xj = x.row(j);
        for (i64 f = 0; f < nf; ++f) acc[f] += c * xj[f];
      }
      const u32 pinv = fp_inv(urow[ech.pivot_cols[i]], p);
      for (i64 f = 0; f < nf; ++f) {
        const u32 v = static_cast<u32>(acc[f] % p);
        xr[f] = static_cast<u32>(static_cast<u64>(v ? p - v : 0) * pinv % p);
      }
    }
    b_end = b_begin;
  }
  for (i64 i = 0; i < rank; ++i) {
    const u32* xr = x.row(i);
    for (i64 f = 0; f < nf; ++f) basis.set(ech.pivot_cols[i], f, xr[f]);
  }
  return basis;
}

FpMat fp_mul(const FpMat& a, const FpMat& b) {
  if (a.cols() != b.rows() || a.prime() != b.prime()) {
    throw std::invalid_argument("fp_mul dimension or field mismatch");
  }
  FpMat c(a.rows(), b.cols(), a.prime());
  if (a.rows() == 0 || b.cols() == 0 || a.cols() == 0) return c;
  gemm_sub(c.row(0), c.cols(), a.row(0), a.cols(), b.row(0), b.cols(), a.rows(), b.cols(), a.cols(),
           a.prime(), 1);
  const u32 p = a.prime();
  for (i64 i = 0; i < c.rows(); ++i) {
    u32* row = c.row(i);
    for (i64 j = 0; j < c.cols(); ++j) row[j] = row[j] ? p - row[j] : 0;
  }
  return c;
}

bool fp_invertible(const FpMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("fp_invertible requires a square matrix");
  if (m.rows() == 0) return true;
  return fp_rank(m) == m.rows();
}

}  // namespace fibundle
