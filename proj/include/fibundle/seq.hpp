#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <vector>

namespace fibundle {

using Int = mpz_class;

// Dimension pair (s, t) of a resolution 0 -> E^s -> F^t -> C -> 0.
struct Shape {
  std::int64_t s = 0;
  std::int64_t t = 0;

  friend bool operator==(const Shape&, const Shape&) = default;
};

// The sequence a_0 = 0, a_1 = 1, a_{k+1} = w a_k - a_{k-1} for a fixed w >= 3.
// Values are arbitrary precision; a_k grows like ((w + sqrt(w^2-4))/2)^k.
class FibTable {
 public:
  FibTable(int w, std::size_t max_index);

  int w() const { return w_; }
  std::size_t max_index() const { return values_.size() - 1; }
  const Int& at(std::size_t k) const;
  const std::vector<Int>& values() const { return values_; }

 private:
  int w_;
  std::vector<Int> values_;
};

FibTable fib_table(int w, std::size_t max_index);

// a_{w,k} without materializing a table.
Int fib_value(int w, std::size_t k);

// Tits form q(s, t) = s^2 + t^2 - w s t.
Int tits_form(int w, Shape shape);

enum class RatioOrder { Below, Equal, Above };

// Position of t/s relative to a_k/a_{k-1}, decided exactly by comparing
// t*a_{k-1} against s*a_k.  Covers s = 0 (ratio +infinity) without a special
// case: for k = 1 both products vanish, for k >= 2 the result is Above.
RatioOrder ratio_compare(int w, std::size_t k, Shape shape);

struct PellSolutionList {
  int w = 3;
  std::int64_t bound = 0;
  std::vector<Shape> solutions;
};

// All pairs 0 <= s <= t <= bound with s^2 + t^2 - w s t = 1.  These are
// exactly the consecutive pairs (a_k, a_{k+1}); brute-force scans agree (see
// tests and the acceptance suite).
PellSolutionList pell_solutions(int w, std::int64_t bound);

// Exact test of t <= rho(w) * s with rho = (w + sqrt(w^2-4))/2, done purely in
// integers: true iff 2t <= ws or (2t - ws)^2 <= (w^2 - 4) s^2.
// Equivalent to q(s, t) <= 0 whenever t >= s.
bool t_within_growth_ratio(int w, Shape shape);

// Throws std::invalid_argument unless w >= 3.
void require_w(int w);

}  // namespace fibundle
