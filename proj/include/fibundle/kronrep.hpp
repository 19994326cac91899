#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fibundle/decomp.hpp"
#include "fibundle/field.hpp"
#include "fibundle/fpmat.hpp"
#include "fibundle/qmat.hpp"

namespace fibundle {

// Thrown on malformed representation files (bad JSON shape, dimension or
// slice-count mismatch, entries outside the field).  The CLI maps it to exit
// code 3.
struct RepFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A w-tuple of t x s matrices over an exact field; the matrix datum of a
// resolution 0 -> E^s -> F^t -> C -> 0.  Exactly one of the slice vectors is
// populated, matching the field kind.
struct KroneckerRep {
  int w = 3;
  Shape shape;
  FieldSpec field;
  std::vector<FpMat> fp_slices;
  std::vector<QMat> q_slices;

  friend bool operator==(const KroneckerRep&, const KroneckerRep&) = default;
};

// Deterministic function of all its arguments: entries are drawn uniformly
// from [0, p) for prime fields, and uniformly from the fixed integer range
// [-kRationalEntryRange, kRationalEntryRange] for Q.
KroneckerRep random_rep(int w, Shape shape, FieldSpec field, std::uint64_t seed);

// Block-diagonal slices with n blocks of shape a_k x a_{k-1} followed by m
// blocks of shape a_{k+1} x a_k, each block freshly sampled from a sub-seed
// derived from (seed, block index).  Equals the fold of direct_sum over the
// individual random blocks.
KroneckerRep canonical_rep(int w, std::size_t k, std::int64_t n, std::int64_t m, FieldSpec field,
                           std::uint64_t seed);

KroneckerRep direct_sum(const KroneckerRep& x, const KroneckerRep& y);

// Solution space of N_i A = B M_i (M_i source slices, N_i target slices,
// A: s_Y x s_X, B: t_Y x t_X).
struct HomSpace {
  Shape source;
  Shape target;
  std::int64_t dim = 0;
  std::vector<std::pair<FpMat, FpMat>> fp_basis;
  std::vector<std::pair<QMat, QMat>> q_basis;
};

// Exact nullspace of the intertwiner system, with basis.  Intended for
// moderate sizes (the basis is dense); dimension-only queries should go
// through hom_dim.
HomSpace hom_space(const KroneckerRep& x, const KroneckerRep& y);

// dim Hom(x, y).  Solves the intertwiner system directly when it is small;
// for large prime-field instances it first applies sink reflections to both
// arguments (kernel-of-concatenation, a pure matrix construction computed
// from the data, valid and validated by full-rank checks), which preserves
// Hom dimensions while shrinking the system geometrically.
std::int64_t hom_dim(const KroneckerRep& x, const KroneckerRep& y);

std::int64_t end_dim(const KroneckerRep& x);

// Bilinear Euler form <x, y> = s_X s_Y + t_X t_Y - w s_X t_Y; equals
// hom - ext for every pair (tested, not assumed).
Int euler_form(int w, Shape x, Shape y);

// dim Ext^1(x, y) = w t_Y s_X - rank of the intertwiner map.
std::int64_t ext_dim(const KroneckerRep& x, const KroneckerRep& y);

// w s t - (s^2 + t^2) + end_dim; zero exactly when the orbit is dense.
std::int64_t orbit_codim(const KroneckerRep& x);

// One-sided probabilistic equivalence test: samples `trials` elements of
// Hom(x, y) and reports true as soon as one has both components invertible.
// True answers are certain; false answers may err with probability bounded by
// (small degree)/|field| per trial, and are never falsely true.
bool is_isomorphic(const KroneckerRep& x, const KroneckerRep& y, int trials, std::uint64_t seed);

nlohmann::ordered_json rep_to_json(const KroneckerRep& r);
KroneckerRep rep_from_json(const nlohmann::ordered_json& j);
void save_rep(const KroneckerRep& r, const std::string& path);
KroneckerRep load_rep(const std::string& path);

namespace detail {
// hom_dim switches from direct elimination to reflections above this many
// unknowns.  A tuning knob; tests lower it to exercise both routes on the
// same input.
extern std::int64_t hom_direct_unknown_cap;
}  // namespace detail

}  // namespace fibundle
