#include <doctest.h>

#include "fibundle/decomp.hpp"
#include "oracles.hpp"

using namespace fibundle;

TEST_CASE("shape_of_fibonacci examples") {
  CHECK(shape_of_fibonacci(3, 1) == Shape{0, 1});
  CHECK(shape_of_fibonacci(3, 3) == Shape{3, 8});
  CHECK(shape_of_fibonacci(4, 2) == Shape{1, 4});
}

TEST_CASE("mutate_shape examples") {
  CHECK(mutate_shape(3, Shape{0, 1}) == Shape{1, 3});
  CHECK(mutate_shape(3, Shape{0, 1}) == shape_of_fibonacci(3, 2));
  CHECK(mutate_shape(3, Shape{1, 3}) == Shape{3, 8});
  CHECK(mutate_shape(5, Shape{1, 5}) == Shape{5, 24});
  CHECK_THROWS_AS(mutate_shape(3, Shape{100, 1}), std::domain_error);
}

TEST_CASE("iterated mutation reproduces the Fibonacci shapes") {
  for (int w : {3, 4, 6}) {
    Shape sh{0, 1};
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(sh == shape_of_fibonacci(w, k + 1));
      sh = mutate_shape(w, sh);
    }
    const auto chain = fib_shape_chain(w, 8);
    REQUIRE(chain.size() == 8);
    CHECK(chain.front() == Shape{0, 1});
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
      CHECK(chain[k + 1] == mutate_shape(w, chain[k]));
    }
  }
}

TEST_CASE("decompose examples") {
  CHECK(decompose(3, Shape{1, 4}) == Decomposition{3, 1, 1, 1});
  CHECK(tits_form(3, Shape{1, 4}) == 1 + 1 + 1 * 1 * 3);
  CHECK(decompose(3, Shape{1, 3}) == Decomposition{3, 2, 1, 0});
  CHECK(decompose(3, Shape{0, 7}) == Decomposition{3, 1, 7, 0});
  CHECK(decompose(4, Shape{1, 5}) == Decomposition{4, 1, 1, 1});
  // Confirm (4, (1,5)) by exhaustive search.
  auto found = oracles::brute_force_triples(4, Shape{1, 5}, 6, 30);
  REQUIRE(found.size() == 1);
  CHECK(found.front() == Decomposition{4, 1, 1, 1});
}

TEST_CASE("decompose rejects out-of-domain shapes") {
  CHECK_THROWS_AS(decompose(3, Shape{2, 5}), std::domain_error);  // q = -1
  CHECK_THROWS_AS(decompose(3, Shape{5, 2}), std::domain_error);  // s > t
  CHECK_THROWS_AS(decompose(3, Shape{0, 0}), std::domain_error);
}

TEST_CASE("compose examples") {
  CHECK(compose(3, 1, 1, 1) == Shape{1, 4});
  CHECK(compose(3, 2, 2, 0) == Shape{2, 6});
  CHECK(compose(5, 2, 0, 1) == Shape{5, 24});
  CHECK_THROWS_AS(compose(3, 0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(compose(3, 1, 0, 0), std::invalid_argument);
}

TEST_CASE("round trip and Tits-form additivity on the canonical grid") {
  for (int w = 3; w <= 6; ++w) {
    for (std::size_t k = 1; k <= 5; ++k) {
      for (std::int64_t n = 0; n <= 5; ++n) {
        for (std::int64_t m = 0; m <= 5; ++m) {
          if (n + m < 1) continue;
          if (n == 0 && m > 0) continue;  // not canonical orientation
          const Shape sh = compose(w, k, n, m);
          CHECK(tits_form(w, sh) == n * n + m * m + n * m * w);
          CHECK(decompose(w, sh) == Decomposition{w, k, n, m});
        }
      }
    }
  }
}

TEST_CASE("uniqueness: brute force finds exactly one canonical triple") {
  for (int w : {3, 4}) {
    for (std::size_t k = 1; k <= 3; ++k) {
      for (std::int64_t n = 0; n <= 4; ++n) {
        for (std::int64_t m = 0; m <= 4; ++m) {
          if (n + m < 1 || (n == 0 && m > 0)) continue;
          const Shape sh = compose(w, k, n, m);
          const auto found = oracles::brute_force_triples(w, sh, 8, 50);
          REQUIRE(found.size() == 1);
          CHECK(found.front() == Decomposition{w, k, n, m});
        }
      }
    }
  }
}

TEST_CASE("no integer shape with s, t >= 1 has q = 0") {
  for (int w = 3; w <= 8; ++w) {
    const std::int64_t ww = w;
    for (std::int64_t s = 1; s <= 2000; ++s) {
      for (std::int64_t t = s; t <= 2000; ++t) {
        // int64 is safe: values stay below 2000^2 * 10.
        if (s * s + t * t - ww * s * t == 0) {
          FAIL("unexpected q = 0 at w=", w, " s=", s, " t=", t);
        }
      }
    }
  }
}
