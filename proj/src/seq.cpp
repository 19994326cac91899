#include "fibundle/seq.hpp"

#include <stdexcept>
#include <string>

namespace fibundle {

void require_w(int w) {
  if (w < 3) {
    throw std::invalid_argument("w must be at least 3, got " + std::to_string(w));
  }
}

FibTable::FibTable(int w, std::size_t max_index) : w_(w) {
  require_w(w);
  values_.reserve(max_index + 1);
  values_.emplace_back(0);
  if (max_index >= 1) values_.emplace_back(1);
  for (std::size_t k = 2; k <= max_index; ++k) {
    values_.push_back(w * values_[k - 1] - values_[k - 2]);
  }
}

const Int& FibTable::at(std::size_t k) const {
  if (k >= values_.size()) {
    throw std::out_of_range("FibTable index " + std::to_string(k) + " exceeds " +
                            std::to_string(values_.size() - 1));
  }
  return values_[k];
}

FibTable fib_table(int w, std::size_t max_index) { return FibTable(w, max_index); }

Int fib_value(int w, std::size_t k) {
  require_w(w);
  Int prev = 0, cur = 1;
  if (k == 0) return prev;
  for (std::size_t i = 1; i < k; ++i) {
    Int next = w * cur - prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

Int tits_form(int w, Shape shape) {
  require_w(w);
  Int s(static_cast<long>(shape.s)), t(static_cast<long>(shape.t));
  return s * s + t * t - w * s * t;
}

RatioOrder ratio_compare(int w, std::size_t k, Shape shape) {
  require_w(w);
  if (k == 0) throw std::invalid_argument("ratio_compare requires k >= 1");
  Int ak_prev = fib_value(w, k - 1);
  Int ak = fib_value(w, k);
  Int lhs = shape.t * ak_prev;
  Int rhs = shape.s * ak;
  int c = cmp(lhs, rhs);
  if (c < 0) return RatioOrder::Below;
  if (c > 0) return RatioOrder::Above;
  return RatioOrder::Equal;
}

PellSolutionList pell_solutions(int w, std::int64_t bound) {
  require_w(w);
  if (bound < 0) throw std::invalid_argument("pell_solutions bound must be nonnegative");
  PellSolutionList out;
  out.w = w;
  out.bound = bound;
  Int prev = 0, cur = 1;
  while (cur <= bound) {
    out.solutions.push_back(Shape{prev.get_si(), cur.get_si()});
    Int next = w * cur - prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return out;
}

bool t_within_growth_ratio(int w, Shape shape) {
  require_w(w);
  Int s(static_cast<long>(shape.s)), t(static_cast<long>(shape.t));
  Int d = 2 * t - w * s;
  if (d <= 0) return true;
  return d * d <= (Int(w) * w - 4) * s * s;
}

}  // namespace fibundle
