#include "fibundle/decomp.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace fibundle {

namespace {

std::int64_t to_i64(const Int& v, const char* what) {
  if (!v.fits_slong_p() || v > std::numeric_limits<std::int64_t>::max()) {
    throw std::overflow_error(std::string(what) + " does not fit in 64 bits");
  }
  return static_cast<std::int64_t>(v.get_si());
}

}  // namespace

Shape shape_of_fibonacci(int w, std::size_t k) {
  require_w(w);
  if (k == 0) throw std::invalid_argument("shape_of_fibonacci requires k >= 1");
  Int prev = fib_value(w, k - 1);
  Int cur = fib_value(w, k);
  return Shape{to_i64(prev, "a_{k-1}"), to_i64(cur, "a_k")};
}

Shape mutate_shape(int w, Shape shape) {
  require_w(w);
  Int next = Int(w) * shape.t - shape.s;
  if (next < 0) throw std::domain_error("mutate_shape requires w t >= s");
  return Shape{shape.t, to_i64(next, "w t - s")};
}

std::vector<Shape> fib_shape_chain(int w, std::size_t max_index) {
  require_w(w);
  std::vector<Shape> chain;
  if (max_index == 0) return chain;
  chain.push_back(Shape{0, 1});
  for (std::size_t k = 2; k <= max_index; ++k) {
    chain.push_back(mutate_shape(w, chain.back()));
  }
  return chain;
}

Decomposition decompose(int w, Shape shape) {
  require_w(w);
  if (shape.s == 0 && shape.t == 0) throw std::domain_error("decompose: shape (0,0) is invalid");
  if (shape.s < 0 || shape.t < 0) throw std::domain_error("decompose: negative shape");
  if (shape.s > shape.t) throw std::domain_error("decompose requires s <= t");
  if (tits_form(w, shape) < 1) {
    throw std::domain_error("decompose requires tits_form >= 1 (simple regime has no canonical triple)");
  }
  if (shape.s == 0) return Decomposition{w, 1, shape.t, 0};

  // Walk k upward until t/s > a_{k+1}/a_k; the ratios a_{j}/a_{j-1} decrease
  // strictly to rho < t/s, so the walk terminates.  The window index is the
  // largest j with t a_{j-1} <= s a_j.
  Int a_prev = 0, a_cur = 1;  // a_{j-1}, a_j at j = 1
  std::size_t j = 1;
  for (;;) {
    Int a_next = Int(w) * a_cur - a_prev;
    if (shape.t * a_cur > shape.s * a_next) break;  // j+1 fails, window is j
    a_prev = std::move(a_cur);
    a_cur = std::move(a_next);
    ++j;
    if (j > 512) throw std::logic_error("decompose: window walk failed to terminate");
  }
  Int a_next = Int(w) * a_cur - a_prev;
  // Unit-determinant solve: a_k^2 - a_{k+1} a_{k-1} = 1.
  Int n = a_cur * shape.t - a_next * shape.s;
  Int m = a_cur * shape.s - a_prev * shape.t;
  if (n <= 0 || m < 0) throw std::logic_error("decompose: window solve out of range");
  return Decomposition{w, j, to_i64(n, "n"), to_i64(m, "m")};
}

Shape compose(int w, std::size_t k, std::int64_t n, std::int64_t m) {
  require_w(w);
  if (k == 0) throw std::invalid_argument("compose requires k >= 1");
  if (n < 0 || m < 0 || n + m < 1) throw std::invalid_argument("compose requires n, m >= 0 and n + m >= 1");
  Int a_prev = fib_value(w, k - 1);
  Int a_cur = fib_value(w, k);
  Int a_next = Int(w) * a_cur - a_prev;
  Int s = n * a_prev + m * a_cur;
  Int t = n * a_cur + m * a_next;
  return Shape{to_i64(s, "s"), to_i64(t, "t")};
}

}  // namespace fibundle
