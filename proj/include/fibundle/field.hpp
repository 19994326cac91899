#pragma once

#include <cstdint>

namespace fibundle {

inline constexpr std::uint32_t kDefaultPrime = 32003;
inline constexpr std::uint64_t kDefaultSeed = 0xF1B05EEDull;

// Integer range used when sampling "random" rational entries; the entries are
// integers embedded in Q, which keeps fraction-free elimination cheap while
// staying far outside every low-degree degeneracy locus exercised here.
inline constexpr std::int64_t kRationalEntryRange = 9999;

bool is_prime(std::uint32_t n);

// Exact coefficient field: either Q or F_p for a prime p.
struct FieldSpec {
  enum class Kind { PrimeField, Rationals };

  Kind kind = Kind::PrimeField;
  std::uint32_t p = kDefaultPrime;

  static FieldSpec fp(std::uint32_t p);  // validates primality
  static FieldSpec rationals();

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

}  // namespace fibundle
