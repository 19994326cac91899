#include <doctest.h>

#include <cstdio>

#include "fibundle/kronrep.hpp"
#include "fibundle/random.hpp"
#include "oracles.hpp"

using namespace fibundle;
using oracles::i64;

namespace {

const FieldSpec kFp = FieldSpec::fp(32003);
const FieldSpec kQ = FieldSpec::rationals();

// Re-substitution: every basis pair must satisfy N_i A = B M_i exactly.
bool basis_satisfies_equations(const KroneckerRep& x, const KroneckerRep& y, const HomSpace& hs) {
  for (int i = 0; i < x.w; ++i) {
    if (x.field.kind == FieldSpec::Kind::PrimeField) {
      for (const auto& [a, b] : hs.fp_basis) {
        if (fp_mul(y.fp_slices[i], a) != fp_mul(b, x.fp_slices[i])) return false;
      }
    } else {
      for (const auto& [a, b] : hs.q_basis) {
        if (q_mul(y.q_slices[i], a) != q_mul(b, x.q_slices[i])) return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("random_rep is a deterministic function of its arguments") {
  KroneckerRep a = random_rep(3, Shape{1, 3}, kFp, 7);
  KroneckerRep b = random_rep(3, Shape{1, 3}, kFp, 7);
  CHECK(a == b);
  CHECK(a.fp_slices.size() == 3);
  CHECK(a.fp_slices[0].rows() == 3);
  CHECK(a.fp_slices[0].cols() == 1);
  KroneckerRep c = random_rep(3, Shape{1, 3}, kFp, 8);
  CHECK_FALSE(a == c);
}

TEST_CASE("degenerate shapes are first-class") {
  KroneckerRep r = random_rep(3, Shape{0, 2}, kFp, 1);
  CHECK(r.fp_slices.size() == 3);
  CHECK(r.fp_slices[0].rows() == 2);
  CHECK(r.fp_slices[0].cols() == 0);
  CHECK(end_dim(r) == 4);  // B is free, A is empty
  CHECK_THROWS_AS(random_rep(3, Shape{0, 0}, kFp, 1), std::invalid_argument);
}

TEST_CASE("rational random entries sit in the documented range") {
  KroneckerRep r = random_rep(4, Shape{2, 5}, kQ, 1);
  CHECK(r.q_slices.size() == 4);
  for (const auto& slice : r.q_slices) {
    for (i64 i = 0; i < 5; ++i) {
      for (i64 j = 0; j < 2; ++j) {
        const Rat& v = slice.at(i, j);
        CHECK(v.get_den() == 1);
        CHECK(abs(v.get_num()) <= kRationalEntryRange);
      }
    }
  }
}

TEST_CASE("canonical_rep block layout") {
  // B_1 blocks are 1 x 0: a zero row region above the B_2 block.
  KroneckerRep r = canonical_rep(3, 1, 1, 1, kFp, 9);
  CHECK(r.shape == Shape{1, 4});
  bool sub_block_nonzero = false;
  for (const auto& slice : r.fp_slices) {
    CHECK(slice.at(0, 0) == 0);
    for (i64 i = 1; i < 4; ++i) sub_block_nonzero |= slice.at(i, 0) != 0;
  }
  CHECK(sub_block_nonzero);

  KroneckerRep two = canonical_rep(3, 2, 2, 0, kFp, 5);
  CHECK(two.shape == Shape{2, 6});
  for (const auto& slice : two.fp_slices) {
    for (i64 i = 0; i < 3; ++i) CHECK(slice.at(i, 1) == 0);
    for (i64 i = 3; i < 6; ++i) CHECK(slice.at(i, 0) == 0);
  }

  CHECK(canonical_rep(3, 1, 2, 3, kFp, 1).shape == Shape{3, 11});
}

TEST_CASE("canonical_rep equals the fold of direct_sum over its blocks") {
  const std::uint64_t seed = 42;
  KroneckerRep canon = canonical_rep(3, 2, 2, 1, kFp, seed);
  KroneckerRep manual = random_rep(3, shape_of_fibonacci(3, 2), kFp, derive_seed(seed, 0));
  manual = direct_sum(manual, random_rep(3, shape_of_fibonacci(3, 2), kFp, derive_seed(seed, 1)));
  manual = direct_sum(manual, random_rep(3, shape_of_fibonacci(3, 3), kFp, derive_seed(seed, 2)));
  CHECK(canon == manual);
}

TEST_CASE("direct_sum adds shapes and rejects mismatches") {
  KroneckerRep x = random_rep(3, Shape{1, 3}, kFp, 1);
  KroneckerRep y = random_rep(3, Shape{3, 8}, kFp, 2);
  CHECK(direct_sum(x, y).shape == Shape{4, 11});
  CHECK(direct_sum(x, random_rep(3, Shape{0, 1}, kFp, 3)).shape == Shape{1, 4});
  CHECK_THROWS_AS(direct_sum(x, random_rep(4, Shape{1, 3}, kFp, 1)), std::invalid_argument);
  CHECK_THROWS_AS(direct_sum(x, random_rep(3, Shape{1, 3}, kQ, 1)), std::invalid_argument);
}

TEST_CASE("hom_space dimensions at generic representations") {
  KroneckerRep x = random_rep(3, Shape{1, 2}, kFp, 11);
  HomSpace end_x = hom_space(x, x);
  CHECK(end_x.dim == 1);
  CHECK(basis_satisfies_equations(x, x, end_x));

  KroneckerRep b2 = random_rep(3, shape_of_fibonacci(3, 2), kFp, 12);  // (1, 3)
  KroneckerRep b3 = random_rep(3, shape_of_fibonacci(3, 3), kFp, 13);  // (3, 8)
  HomSpace fwd = hom_space(b2, b3);
  CHECK(fwd.dim == 3);
  CHECK(basis_satisfies_equations(b2, b3, fwd));
  CHECK(hom_space(b3, b2).dim == 0);
}

TEST_CASE("hom_space over the rationals, with re-substitution") {
  KroneckerRep x = random_rep(3, Shape{1, 2}, kQ, 3);
  HomSpace hs = hom_space(x, x);
  CHECK(hs.dim == 1);
  CHECK(basis_satisfies_equations(x, x, hs));
  KroneckerRep b2 = random_rep(3, Shape{1, 3}, kQ, 4);
  KroneckerRep b3 = random_rep(3, Shape{3, 8}, kQ, 5);
  HomSpace fwd = hom_space(b2, b3);
  CHECK(fwd.dim == 3);
  CHECK(basis_satisfies_equations(b2, b3, fwd));
}

TEST_CASE("end_dim examples") {
  CHECK(end_dim(random_rep(3, Shape{1, 3}, kFp, 21)) == 1);
  CHECK(end_dim(random_rep(3, Shape{1, 4}, kFp, 22)) == 5);
  CHECK(end_dim(canonical_rep(3, 1, 2, 3, kFp, 23)) == 31);
}

TEST_CASE("euler_form examples") {
  CHECK(euler_form(3, Shape{1, 3}, Shape{3, 8}) == 3);
  CHECK(euler_form(3, Shape{3, 8}, Shape{1, 3}) == 0);
  CHECK(euler_form(3, Shape{2, 5}, Shape{2, 5}) == tits_form(3, Shape{2, 5}));
}

TEST_CASE("ext_dim examples") {
  KroneckerRep b2 = random_rep(3, Shape{1, 3}, kFp, 31);
  KroneckerRep b3 = random_rep(3, Shape{3, 8}, kFp, 32);
  CHECK(ext_dim(b2, b3) == 0);
  CHECK(ext_dim(b3, b2) == 0);
  KroneckerRep x = random_rep(3, Shape{2, 5}, kFp, 33);
  CHECK(ext_dim(x, x) == 2);
}

TEST_CASE("hom - ext = euler on random pairs, both fields") {
  for (const FieldSpec& field : {kFp, kQ}) {
    SeededRng rng(field.kind == FieldSpec::Kind::PrimeField ? 100u : 200u);
    for (int round = 0; round < 12; ++round) {
      const int w = 3 + static_cast<int>(rng.below(3));
      auto draw = [&] {
        for (;;) {
          Shape sh{rng.range(0, 5), rng.range(0, 5)};
          if (sh.s || sh.t) return sh;
        }
      };
      KroneckerRep x = random_rep(w, draw(), field, rng.next());
      KroneckerRep y = random_rep(w, draw(), field, rng.next());
      const Int euler = euler_form(w, x.shape, y.shape);
      CHECK(Int(static_cast<long>(hom_dim(x, y))) - ext_dim(x, y) == euler);
    }
  }
}

TEST_CASE("zero-source pairs have hom = t_X t_Y and ext = 0") {
  KroneckerRep x = random_rep(3, Shape{0, 1}, kFp, 1);
  KroneckerRep y = random_rep(3, Shape{2, 7}, kFp, 2);
  CHECK(hom_dim(x, y) == 7);
  CHECK(ext_dim(x, y) == 0);
}

TEST_CASE("orbit_codim examples") {
  CHECK(orbit_codim(random_rep(3, Shape{1, 3}, kFp, 41)) == 0);
  CHECK(orbit_codim(random_rep(3, Shape{1, 4}, kFp, 42)) == 0);
  CHECK(orbit_codim(random_rep(3, Shape{2, 5}, kFp, 43)) == 2);
}

TEST_CASE("reflection route agrees with direct elimination") {
  // Lower the crossover so mid-size systems run through reflections, then
  // compare against the direct answer on the same representations.
  const i64 saved = detail::hom_direct_unknown_cap;
  struct Case {
    int w;
    Shape x, y;
  };
  for (const Case c : {Case{3, {3, 8}, {8, 21}},    // preprojective pair, forward
                       Case{3, {8, 21}, {3, 8}},    // backward
                       Case{3, {2, 6}, {2, 6}},     // decomposable shape
                       Case{4, {1, 4}, {4, 15}},    //
                       Case{3, {4, 5}, {4, 5}},     // q < 0: reflection cannot shrink
                       Case{3, {5, 7}, {4, 6}}}) {  // mixed non-generic shapes
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      KroneckerRep x = random_rep(c.w, c.x, kFp, seed);
      KroneckerRep y = random_rep(c.w, c.y, kFp, seed + 50);
      detail::hom_direct_unknown_cap = 40;
      const i64 via_reflection = hom_dim(x, y);
      const i64 end_refl = end_dim(x);
      detail::hom_direct_unknown_cap = saved;
      CHECK(via_reflection == hom_dim(x, y));
      CHECK(end_refl == end_dim(x));
    }
  }
  detail::hom_direct_unknown_cap = saved;
}

TEST_CASE("large End computations reflect, cache and agree across calls") {
  // (377, 987) is big enough to route through the reflection cascade and the
  // content-verified reflection cache; a second identical query must hit the
  // cache and return the same exact answer.
  KroneckerRep x = random_rep(3, Shape{377, 987}, kFp, 1234);
  const i64 first = end_dim(x);
  const i64 second = end_dim(x);
  CHECK(first == 1);  // generic Fibonacci shape, tits_form = 1
  CHECK(second == first);
  CHECK(orbit_codim(x) == 0);
}

TEST_CASE("is_isomorphic examples") {
  KroneckerRep x = random_rep(3, Shape{1, 4}, kFp, 51);
  CHECK(is_isomorphic(x, x, 1, 99));
  KroneckerRep canon = canonical_rep(3, 1, 1, 1, kFp, 52);
  CHECK(is_isomorphic(x, canon, 5, 99));
  KroneckerRep a = random_rep(3, Shape{2, 5}, kFp, 53);
  KroneckerRep b = random_rep(3, Shape{2, 5}, kFp, 54);
  CHECK_FALSE(is_isomorphic(a, b, 5, 99));
  CHECK(hom_space(a, b).dim == 0);
  CHECK_FALSE(is_isomorphic(a, random_rep(3, Shape{1, 4}, kFp, 55), 5, 99));  // shape mismatch
}

TEST_CASE("is_isomorphic over the rationals") {
  KroneckerRep x = random_rep(3, Shape{1, 4}, kQ, 61);
  KroneckerRep canon = canonical_rep(3, 1, 1, 1, kQ, 62);
  CHECK(is_isomorphic(x, canon, 5, 99));
}

TEST_CASE("representation JSON round-trips bit-exactly") {
  for (const FieldSpec& field : {kFp, kQ}) {
    KroneckerRep r = random_rep(4, Shape{2, 5}, field, 71);
    const auto j = rep_to_json(r);
    KroneckerRep back = rep_from_json(j);
    CHECK(back == r);
    CHECK(rep_to_json(back).dump() == j.dump());
  }
}

TEST_CASE("rep_from_json rejects malformed documents") {
  KroneckerRep r = random_rep(3, Shape{1, 2}, kFp, 81);
  auto good = rep_to_json(r);

  auto bad = good;
  bad["slices"].erase(2);  // slice count != w
  CHECK_THROWS_AS(rep_from_json(bad), RepFormatError);

  bad = good;
  bad["slices"][0].erase(1);  // row count != t
  CHECK_THROWS_AS(rep_from_json(bad), RepFormatError);

  bad = good;
  bad["slices"][0][0][0] = "32003";  // entry outside [0, p)
  CHECK_THROWS_AS(rep_from_json(bad), RepFormatError);

  bad = good;
  bad["slices"][0][0][0] = "zebra";
  CHECK_THROWS_AS(rep_from_json(bad), RepFormatError);

  bad = good;
  bad["field"] = {{"kind", "f2"}};
  CHECK_THROWS_AS(rep_from_json(bad), RepFormatError);

  CHECK_THROWS_AS(load_rep("/nonexistent/path/rep.json"), RepFormatError);
}

TEST_CASE("save/load through a file") {
  const std::string path = "test_rep_roundtrip.json";
  KroneckerRep r = random_rep(3, Shape{2, 4}, kQ, 91);
  save_rep(r, path);
  KroneckerRep back = load_rep(path);
  CHECK(back == r);
  std::remove(path.c_str());
}
