#include "fibundle/bundle.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace fibundle {

namespace {

using i64 = std::int64_t;

int w_from_int(const Int& w) {
  if (w < 3 || w > std::numeric_limits<int>::max()) {
    throw std::invalid_argument("preset w = " + w.get_str() + " outside the supported range");
  }
  return static_cast<int>(w.get_si());
}

}  // namespace

Int binomial(long n, unsigned long k) {
  if (n < 0) throw std::invalid_argument("binomial with negative n");
  Int out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), k);
  return out;
}

std::string PairPreset::name() const {
  switch (kind) {
    case PresetKind::Steiner:
      return "steiner(N=" + std::to_string(N) + ",d=" + std::to_string(d) + ")";
    case PresetKind::OmegaTarget:
      return "omega_target(N=" + std::to_string(N) + ",p=" + std::to_string(p) + ")";
    case PresetKind::OmegaSource:
      return "omega_source(N=" + std::to_string(N) + ",p=" + std::to_string(p) + ")";
    case PresetKind::P2SymQ:
      return "p2_symq(p=" + std::to_string(p) + ",r=" + std::to_string(r) + ",d=" + std::to_string(d) + ")";
  }
  return "?";
}

PairPreset steiner_preset(int N, int d) {
  if (N < 2) throw std::invalid_argument("steiner preset requires N >= 2");
  if (d < 1) throw std::invalid_argument("steiner preset requires d >= 1");
  PairPreset ps;
  ps.kind = PresetKind::Steiner;
  ps.N = N;
  ps.d = d;
  ps.rkE = 1;
  ps.rkF = 1;
  ps.c1E = 0;
  ps.c1F = d;
  ps.w = w_from_int(binomial(N + d, static_cast<unsigned long>(d)));
  ps.basic = true;
  ps.rigid = N >= 3 || d <= 2;
  return ps;
}

PairPreset omega_target_preset(int N, int p) {
  if (N < 2) throw std::invalid_argument("omega preset requires N >= 2");
  if (p <= 0 || p >= N) throw std::invalid_argument("omega_target requires 0 < p < N");
  PairPreset ps;
  ps.kind = PresetKind::OmegaTarget;
  ps.N = N;
  ps.p = p;
  ps.rkE = 1;
  ps.rkF = binomial(N, static_cast<unsigned long>(p));
  ps.w = w_from_int(binomial(N + 1, static_cast<unsigned long>(N - p)));
  ps.basic = true;
  ps.rigid = true;
  return ps;
}

PairPreset omega_source_preset(int N, int p) {
  if (N < 2) throw std::invalid_argument("omega preset requires N >= 2");
  if (p <= 0 || p >= N) throw std::invalid_argument("omega_source requires 0 < p < N");
  PairPreset ps;
  ps.kind = PresetKind::OmegaSource;
  ps.N = N;
  ps.p = p;
  ps.rkE = binomial(N, static_cast<unsigned long>(p));
  ps.rkF = 1;
  ps.w = w_from_int(binomial(N + 1, static_cast<unsigned long>(p)));
  ps.basic = true;
  ps.rigid = true;
  return ps;
}

Int p2_symq_w(int p, int r, int d) {
  if (p < 1 || r < 1) throw std::invalid_argument("p2_symq requires p, r >= 1");
  if (d <= p + 1) throw std::invalid_argument("p2_symq requires d > p + 1");
  Int total = 0;
  const int top = std::min(p, r);
  for (int i = 0; i <= top; ++i) {
    const long e = d - p + i;       // twist of the i-th summand
    const long m = p + r - 2 * i;   // symmetric power of the i-th summand
    total += Int(e + 1) * Int(m + 1) * Int(e + m + 2) / 2;
  }
  return total;
}

PairPreset p2_symq_preset(int p, int r, int d) {
  PairPreset ps;
  ps.kind = PresetKind::P2SymQ;
  ps.N = 2;
  ps.p = p;
  ps.r = r;
  ps.d = d;
  ps.rkE = p + 1;
  ps.rkF = r + 1;
  ps.w = w_from_int(p2_symq_w(p, r, d));
  ps.basic = true;
  ps.rigid = false;  // S^pQ is not rigid
  return ps;
}

Classification classify(const PairPreset& preset, Shape shape) {
  Classification cl;
  cl.preset = preset;
  cl.shape = shape;
  cl.q = tits_form(preset.w, shape);
  cl.admissible = shape.t * preset.rkF - shape.s * preset.rkE >= preset.N;
  cl.simple = cl.q <= 1;
  if (cl.q >= 1 && shape.t >= shape.s) {
    cl.decomposition = decompose(preset.w, shape);
  }
  cl.fibonacci_shape = false;
  cl.semi_exceptional_shape = false;
  if (cl.decomposition) {
    const Decomposition& dc = *cl.decomposition;
    cl.semi_exceptional_shape = dc.m == 0;
    cl.fibonacci_shape = dc.m == 0 && dc.n == 1;
  }
  cl.exceptional_range = preset.kind == PresetKind::Steiner && preset.d <= preset.N;
  cl.exceptional_steiner_stable =
      preset.kind == PresetKind::Steiner && preset.d == 1 && cl.fibonacci_shape;
  if (preset.kind == PresetKind::Steiner && preset.N == 2 && (preset.d == 1 || preset.d == 2) &&
      cl.admissible) {
    if (cl.q <= 1) {
      cl.stability = StabilityVerdict::Stable;
    } else if (cl.decomposition && cl.decomposition->m == 0 && cl.decomposition->n > 1) {
      cl.stability = StabilityVerdict::StrictlySemistable;
    } else {
      cl.stability = StabilityVerdict::Unstable;
    }
  }
  return cl;
}

CokernelHomDims cokernel_hom_dims(const PairPreset& preset, Shape shape) {
  CokernelHomDims out;
  out.hom_F_C = shape.t;
  out.hom_E_C = Int(preset.w) * shape.t - shape.s;
  out.rigorous = preset.rigid;
  return out;
}

mpq_class steiner_slope(int N, std::size_t n) {
  if (N < 2) throw std::invalid_argument("steiner_slope requires N >= 2");
  if (n == 0) throw std::invalid_argument("steiner_slope requires n >= 1");
  const int w = N + 1;
  Int an = fib_value(w, n);
  Int an_prev = fib_value(w, n - 1);
  mpq_class mu(an, an - an_prev);
  mu.canonicalize();
  return mu;
}

StabilityStepReport verify_stability_step(int N, std::size_t n, i64 search_cap) {
  if (N < 2) throw std::invalid_argument("verify_stability_step requires N >= 2");
  if (n == 0) throw std::invalid_argument("verify_stability_step requires n >= 1");
  if (search_cap < 1) throw std::invalid_argument("verify_stability_step requires a positive cap");
  const int w = N + 1;
  StabilityStepReport rep;
  rep.N = N;
  rep.n = n;
  rep.search_cap = search_cap;

  Int a_prev = fib_value(w, n - 1);
  Int a_n = fib_value(w, n);
  Int a_next = Int(w) * a_n - a_prev;
  Int r_n = a_n - a_prev;
  Int r_next = a_next - a_n;
  rep.gap_identity_ok = a_next * r_n - a_n * r_next == 1;

  // Slope window a_n/r_n <= c/r <= a_{n+1}/r_{n+1}: for each admissible
  // denominator the candidate numerators form an exact integer interval.
  rep.all_slopes_match = true;
  Int r_limit = r_next - 1;
  if (r_limit > search_cap) r_limit = search_cap;
  for (Int r = 1; r <= r_limit; ++r) {
    Int c_lo = (a_n * r + r_n - 1) / r_n;        // ceil(a_n r / r_n)
    Int c_hi = (a_next * r) / r_next;            // floor(a_{n+1} r / r_{n+1})
    if (c_hi > search_cap) c_hi = search_cap;
    for (Int c = c_lo; c <= c_hi; ++c) {
      rep.hits.emplace_back(static_cast<i64>(c.get_si()), static_cast<i64>(r.get_si()));
      if (r_n * c != a_n * r) rep.all_slopes_match = false;
    }
  }
  return rep;
}

SplittingType splitting_type_p1(int d, Shape shape) {
  if (d < 1) throw std::invalid_argument("splitting_type_p1 requires d >= 1");
  if (shape.t <= shape.s || shape.s < 0) {
    throw std::domain_error("splitting_type_p1 requires t > s >= 0");
  }
  const i64 parts = shape.t - shape.s;
  const i64 degree = static_cast<i64>(d) * shape.t;
  SplittingType st;
  st.a = degree / parts;  // floor; degree > 0
  st.m = degree - st.a * parts;
  st.n = parts - st.m;
  return st;
}

bool exceptional_range(int N, int d) {
  if (N < 2 || d < 1) throw std::invalid_argument("exceptional_range requires N >= 2, d >= 1");
  return d <= N;
}

Int exceptional_defect(int N, int d, std::size_t k) {
  if (N < 2 || d < 1) throw std::invalid_argument("exceptional_defect requires N >= 2, d >= 1");
  if (k == 0) throw std::invalid_argument("exceptional_defect requires k >= 1");
  const int w = w_from_int(binomial(N + d, static_cast<unsigned long>(d)));
  Int ak = fib_value(w, k);
  Int ak_prev = fib_value(w, k - 1);
  // h^N(O(-d)) = binom(d-1, N) by Serre duality.
  return ak * ak_prev * binomial(d - 1, static_cast<unsigned long>(N));
}

BeilinsonReport beilinson_consistency(int N, std::size_t k) {
  if (N < 2) throw std::invalid_argument("beilinson_consistency requires N >= 2");
  if (k == 0) throw std::invalid_argument("beilinson_consistency requires k >= 1");
  const int w = N + 1;
  Int a_prev = fib_value(w, k - 1);
  Int a_k = fib_value(w, k);
  Int a_next = Int(w) * a_k - a_prev;
  BeilinsonReport rep;
  rep.rank_steiner = a_next - a_k;
  rep.rank_fibonacci = Int(N) * a_k - a_prev;
  rep.c1_steiner = 2 * a_k - a_next;
  rep.c1_fibonacci = a_k * (1 - N) + a_prev;
  rep.ok = rep.rank_steiner == rep.rank_fibonacci && rep.c1_steiner == rep.c1_fibonacci;
  return rep;
}

bool syzygy_stable(int d, i64 t) {
  if (d != 1 && d != 2) {
    throw std::invalid_argument("syzygy stability verdict is proven only for d in {1, 2}");
  }
  if (t < 1) throw std::invalid_argument("syzygy_stable requires t >= 1");
  return t <= 3 * static_cast<i64>(d);
}

mpq_class hein_bound(int d) {
  if (d < 1) throw std::invalid_argument("hein_bound requires d >= 1");
  mpq_class b(4 * d, 5);
  b.canonicalize();
  return b + 1;
}

}  // namespace fibundle
