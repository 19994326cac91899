#pragma once

#include <vector>

#include "fibundle/seq.hpp"

namespace fibundle {

// The unique canonical triple (k, n, m) of a shape with q >= 1:
//   s = n a_{k-1} + m a_k,   t = n a_k + m a_{k+1},
// oriented so that m = 0 sits at the smallest valid k (n = 0 never appears
// unless the whole shape is a multiple of a single step, which re-emits as
// m = 0 at k+1).
struct Decomposition {
  int w = 3;
  std::size_t k = 1;
  std::int64_t n = 0;
  std::int64_t m = 0;

  friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

// Shape (a_{k-1}, a_k) of the k-th Fibonacci step, k >= 1.
Shape shape_of_fibonacci(int w, std::size_t k);

// (s, t) -> (t, w t - s).  Applying it to (a_{k-1}, a_k) gives (a_k, a_{k+1}).
// Rejects shapes with w t < s.
Shape mutate_shape(int w, Shape shape);

// e_1 .. e_K with e_1 = (0, 1) and e_{k+1} = mutate_shape(w, e_k).
std::vector<Shape> fib_shape_chain(int w, std::size_t max_index);

// Solves for the unique (k, n, m).  Requires t >= s >= 0, (s, t) != (0, 0)
// and tits_form >= 1; throws std::domain_error otherwise.
Decomposition decompose(int w, Shape shape);

// (n a_{k-1} + m a_k, n a_k + m a_{k+1}).  Requires k >= 1, n, m >= 0,
// n + m >= 1.  Round-trips with decompose on canonical inputs.
Shape compose(int w, std::size_t k, std::int64_t n, std::int64_t m);

}  // namespace fibundle
