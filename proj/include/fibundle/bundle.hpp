#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fibundle/decomp.hpp"

namespace fibundle {

enum class PresetKind { Steiner, OmegaTarget, OmegaSource, P2SymQ };

// An (E, F) pair descriptor: the family, its w = dim Hom(E, F), ranks, first
// Chern classes where the arithmetic uses them, and the hypothesis flags.
//   steiner       E = O,          F = O(d)       on P^N
//   omega_target  E = O(-1),      F = Omega^p(p) on P^N
//   omega_source  E = Omega^p(p), F = O          on P^N
//   p2_symq       E = S^p Q,      F = S^r Q(d)   on P^2
struct PairPreset {
  PresetKind kind = PresetKind::Steiner;
  int N = 2;
  int d = 0;  // steiner / p2_symq twist
  int p = 0;  // omega variants / p2_symq
  int r = 0;  // p2_symq
  Int rkE = 1;
  Int rkF = 1;
  Int c1E = 0;  // populated for steiner only
  Int c1F = 0;
  int w = 3;
  bool basic = true;   // hypotheses (ipo1) + (ipo2)
  bool rigid = false;  // hypotheses (R)

  std::string name() const;
};

PairPreset steiner_preset(int N, int d);
PairPreset omega_target_preset(int N, int p);
PairPreset omega_source_preset(int N, int p);
PairPreset p2_symq_preset(int p, int r, int d);

// Production value of w for the third family, via the closed-form summation
// over the rank-2 splitting S^pQ (x) S^rQ = (+)_i S^{p+r-2i}Q (x) O(i).
// The independent oracle (h^0 via the Euler-sequence count) lives in tests.
Int p2_symq_w(int p, int r, int d);

enum class StabilityVerdict { Stable, StrictlySemistable, Unstable };

struct Classification {
  PairPreset preset;
  Shape shape;
  Int q;             // tits_form(w, shape)
  bool admissible;   // t rkF - s rkE >= N
  bool simple;       // q <= 1
  std::optional<Decomposition> decomposition;  // present iff q >= 1 (and t >= s)
  std::optional<StabilityVerdict> stability;   // steiner, N = 2, d in {1,2}, admissible
  bool fibonacci_shape;              // shape = (a_{k-1}, a_k) for some k
  bool semi_exceptional_shape;       // shape = n (a_{k-1}, a_k), n >= 1
  bool exceptional_range;            // steiner: 1 <= d <= N
  bool exceptional_steiner_stable;   // steiner d = 1 on a Fibonacci shape (any N)
};

Classification classify(const PairPreset& preset, Shape shape);

struct CokernelHomDims {
  Int hom_F_C;  // = t
  Int hom_E_C;  // = w t - s
  bool rigorous;  // false when the preset lacks the (R) flag: formula-only
};

CokernelHomDims cokernel_hom_dims(const PairPreset& preset, Shape shape);

// mu(S_n) = a_n / (a_n - a_{n-1}) with w = N + 1, reduced.
mpq_class steiner_slope(int N, std::size_t n);

// Exhaustive destabilizer scan: all (c, r) with 1 <= r < r_{n+1}, |c| <= cap
// and a_n/r_n <= c/r <= a_{n+1}/r_{n+1}.  Every hit must satisfy
// r_n c = a_n r, and the exact gap identity a_{n+1} r_n - a_n r_{n+1} = 1
// must hold; violations would falsify the stability argument.
struct StabilityStepReport {
  int N = 2;
  std::size_t n = 1;
  std::int64_t search_cap = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> hits;  // (c, r)
  bool all_slopes_match = false;
  bool gap_identity_ok = false;
};

StabilityStepReport verify_stability_step(int N, std::size_t n, std::int64_t search_cap);

// Splitting type O(a)^n (+) O(a+1)^m of a generic cokernel on the line:
// n + m = t - s and n a + m (a + 1) = d t.
struct SplittingType {
  std::int64_t a = 0;
  std::int64_t n = 0;
  std::int64_t m = 0;
};

SplittingType splitting_type_p1(int d, Shape shape);

// Fibonacci bundles for (O, O(d)) on P^N are exceptional exactly when d <= N.
bool exceptional_range(int N, int d);
// dim Ext^{N-1}(C_k, C_k) = a_k a_{k-1} binom(d-1, N), with w = binom(N+d, d).
Int exceptional_defect(int N, int d, std::size_t k);

// Exact rank / c1 agreement between the two resolutions of the same bundle:
// O(-2)^{a_k} -> O(-1)^{a_{k+1}} versus O(-1)^{a_{k-1}} -> Omega^{N-1}(N-1)^{a_k},
// both with w = N + 1.  Uses c1(Omega^{N-1}(N-1)) = 1 - N.
struct BeilinsonReport {
  Int rank_steiner, rank_fibonacci;
  Int c1_steiner, c1_fibonacci;
  bool ok = false;
};

BeilinsonReport beilinson_consistency(int N, std::size_t k);

// Generic syzygy bundle O -> O(d)^t on P^2, d in {1, 2}: stable iff t <= 3d.
bool syzygy_stable(int d, std::int64_t t);
// Hein's sufficient bound t <= 4d/5 + 1, for comparison reporting.
mpq_class hein_bound(int d);

Int binomial(long n, unsigned long k);

}  // namespace fibundle
