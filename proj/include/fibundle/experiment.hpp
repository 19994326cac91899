#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fibundle/kronrep.hpp"

namespace fibundle {

struct ExperimentCell {
  std::string label;
  Shape shape;
  Int q = 0;
  std::string predicted;
  std::string observed;
  int trials = 0;
  int passes = 0;
  bool pass = false;

  friend bool operator==(const ExperimentCell&, const ExperimentCell&) = default;
};

// A falsifiable check packaged with its seed and grid.  Rerunning with the
// same master seed reproduces everything except wall_ms; per-cell randomness
// derives only from (master seed, cell index, trial index), so results do not
// depend on scheduling.
struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t master_seed = 0;
  std::vector<ExperimentCell> cells;
  bool pass = false;
  std::int64_t wall_ms = 0;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

// Dichotomy of generic orbits: every shape in the grid 0 <= s <= s_max,
// s < t <= t_max is sampled `trials` times; q <= 1 cells must observe
// end_dim = 1 and q >= 1 cells must observe end_dim = n^2 + m^2 + n m w plus
// isomorphism with a fresh canonical representation, each in at least
// ceil(0.95 trials) of the trials.
ExperimentReport kac_experiment(int w, std::int64_t s_max, std::int64_t t_max, int trials,
                                FieldSpec field, std::uint64_t seed);

// Dimension table for consecutive random blocks B_k, B_{k+1}: end(B_k) = 1,
// ext(B_k, B_k) = 0, hom(B_k, B_{k+1}) = w, hom(B_{k+1}, B_k) = 0 and both
// ext's = 0, each in at least ceil(0.9 trials) of the trials.
ExperimentReport hom_table_experiment(int w, std::size_t k_max, int trials, FieldSpec field,
                                      std::uint64_t seed);

// hom - ext = s_X s_Y + t_X t_Y - w s_X t_Y for random pairs, exactly; any
// miss fails the cell (no threshold).
ExperimentReport euler_experiment(int w_lo, int w_hi, std::int64_t dim_cap, int pairs,
                                  FieldSpec field, std::uint64_t seed);

nlohmann::ordered_json report_to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const nlohmann::ordered_json& j);
void save_report(const ExperimentReport& r, const std::string& path);

}  // namespace fibundle
