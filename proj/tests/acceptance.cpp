// Acceptance suite: one pass/fail line per criterion, each pinned to its
// exact expected values and wall-clock budget.  Run via ctest or directly:
//   acceptance --cli <path-to-fibundle-binary>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fibundle/bundle.hpp"
#include "fibundle/experiment.hpp"
#include "fibundle/kronrep.hpp"
#include "fibundle/random.hpp"

using namespace fibundle;
using i64 = std::int64_t;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::string g_cli_path;

struct Criterion {
  std::string text;
  double budget_seconds;
  std::function<bool(std::string&)> run;
};

void run_criterion(int index, const Criterion& c) {
  std::string detail;
  const auto start = Clock::now();
  bool ok = false;
  try {
    ok = c.run(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const bool in_budget = secs < c.budget_seconds;
  const bool pass = ok && in_budget;
  if (!pass) ++g_failures;
  std::printf("[%s] %2d. %s (%.2fs, budget %.0fs)%s%s\n", pass ? "PASS" : "FAIL", index,
              c.text.c_str(), secs, c.budget_seconds,
              detail.empty() ? "" : (" -- " + detail).c_str(),
              ok && !in_budget ? " -- values correct but over time budget" : "");
  std::fflush(stdout);
}

// Criterion 2 helper: literal brute-force scan with incremental evaluation.
std::vector<Shape> pell_scan(int w, i64 bound) {
  std::vector<Shape> hits;
  for (i64 s = 0; s <= bound; ++s) {
    i64 f = 2 * s * s - static_cast<i64>(w) * s * s - 1;
    i64 df = 2 * s + 1 - static_cast<i64>(w) * s;
    for (i64 t = s; t <= bound; ++t) {
      if (f == 0) hits.push_back(Shape{s, t});
      f += df;
      df += 2;
    }
  }
  return hits;
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];
  }

  std::vector<Criterion> criteria;

  criteria.push_back({"sequence identities exact for w in 3..10, k <= 30", 1.0, [](std::string&) {
    for (int w = 3; w <= 10; ++w) {
      FibTable tab(w, 32);
      for (std::size_t k = 1; k + 2 <= 32; ++k) {
        const Int &am = tab.at(k - 1), &ak = tab.at(k), &ap = tab.at(k + 1), &aq = tab.at(k + 2);
        if (am * am + ak * ak - w * am * ak != 1) return false;
        if (ak * ak - ap * am != 1) return false;
        if (ap * ak - am * aq != w) return false;
      }
    }
    return true;
  }});

  criteria.push_back({"Pell characterization by brute force to 1e5, w in {3,4,5}", 30.0,
                      [](std::string& detail) {
    const i64 bound = 100000;
    std::size_t total = 0;
    for (int w : {3, 4, 5}) {
      const std::vector<Shape> scanned = pell_scan(w, bound);
      const PellSolutionList expected = pell_solutions(w, bound);
      if (scanned != expected.solutions) return false;
      total += scanned.size();
    }
    detail = "solutions found: " + std::to_string(total);
    return true;
  }});

  criteria.push_back({"Kac dichotomy over F_32003, w = 3, s <= 6, t <= 14, 20 seeds/cell", 120.0,
                      [](std::string& detail) {
    ExperimentReport rep = kac_experiment(3, 6, 14, 20, FieldSpec::fp(32003), kDefaultSeed);
    detail = std::to_string(rep.cells.size()) + " cells";
    for (const auto& cell : rep.cells) {
      if (!cell.pass) {
        detail = "failed cell " + cell.label + ": " + cell.observed;
        return false;
      }
    }
    return rep.pass;
  }});

  criteria.push_back({"Euler equality hom - ext exact, 200 random pairs, both fields", 60.0,
                      [](std::string& detail) {
    ExperimentReport fp = euler_experiment(3, 5, 8, 100, FieldSpec::fp(32003), kDefaultSeed);
    ExperimentReport q = euler_experiment(3, 5, 8, 100, FieldSpec::rationals(), kDefaultSeed + 1);
    detail = "100 prime-field pairs, 100 rational pairs";
    for (const auto& rep : {fp, q}) {
      for (const auto& cell : rep.cells) {
        if (!cell.pass) {
          detail = "failed " + cell.label + ": " + cell.observed;
          return false;
        }
      }
    }
    return fp.pass && q.pass;
  }});

  criteria.push_back({"Fibonacci block table, w in {3,4,6}, k <= 5, 10 seeds, >= 9/10 each", 60.0,
                      [](std::string& detail) {
    // Field choice F_8191 keeps the largest eliminations inside the budget;
    // every check is exact linear algebra either way.
    std::ostringstream d;
    for (int w : {3, 4, 6}) {
      ExperimentReport rep =
          hom_table_experiment(w, 5, 10, FieldSpec::fp(8191), derive_seed(kDefaultSeed, w));
      for (const auto& cell : rep.cells) {
        if (!cell.pass) {
          detail = "w=" + std::to_string(w) + " failed cell " + cell.label + ": " + cell.observed;
          return false;
        }
      }
      d << "w=" << w << " ok; ";
    }
    detail = d.str();
    return true;
  }});

  criteria.push_back({"stability arithmetic: destabilizer scan + gap identity, w in 3..5", 10.0,
                      [](std::string& detail) {
    std::size_t hits = 0;
    for (int w = 3; w <= 5; ++w) {
      const int N = w - 1;
      FibTable tab(w, 8);
      for (std::size_t n = 1; n <= 6; ++n) {
        StabilityStepReport rep = verify_stability_step(N, n, 10000);
        if (!rep.all_slopes_match || !rep.gap_identity_ok) {
          detail = "violation at w=" + std::to_string(w) + " n=" + std::to_string(n);
          return false;
        }
        hits += rep.hits.size();
        const Int rn = tab.at(n) - tab.at(n - 1);
        const Int rn1 = tab.at(n + 1) - tab.at(n);
        if (tab.at(n + 1) * rn - tab.at(n) * rn1 != 1) return false;
      }
    }
    detail = "destabilizer candidates checked: " + std::to_string(hits);
    return true;
  }});

  criteria.push_back({"P^2 classifier table: stable iff t <= 3d iff q <= 1; semistable = n copies",
                      1.0, [](std::string&) {
    for (int d : {1, 2}) {
      const PairPreset preset = steiner_preset(2, d);
      for (i64 t = 3; t <= 40; ++t) {
        const Classification cl = classify(preset, Shape{1, t});
        if (!cl.stability.has_value()) return false;
        const bool stable = *cl.stability == StabilityVerdict::Stable;
        if (stable != (t <= 3 * d)) return false;
        if (stable != syzygy_stable(d, t)) return false;
      }
    }
    const PairPreset st1 = steiner_preset(2, 1);
    for (i64 s = 0; s <= 10; ++s) {
      for (i64 t = s + 2; t <= 40; ++t) {
        const Classification cl = classify(st1, Shape{s, t});
        if (!cl.stability.has_value()) return false;
        if ((*cl.stability == StabilityVerdict::Stable) != (cl.q <= 1)) return false;
        // strictly semistable exactly on n > 1 multiples of a Fibonacci shape
        bool multiple = false;
        for (std::size_t k = 1; k <= 12 && !multiple; ++k) {
          const Shape e = shape_of_fibonacci(3, k);
          for (i64 n = 2; n * e.t <= t; ++n) {
            if (n * e.s == s && n * e.t == t) multiple = true;
          }
        }
        if ((*cl.stability == StabilityVerdict::StrictlySemistable) != multiple) return false;
      }
    }
    return true;
  }});

  criteria.push_back({"P^1 splitting types solve their system with degree gap <= 1, 1000 samples",
                      1.0, [](std::string&) {
    SeededRng rng(kDefaultSeed);
    for (int round = 0; round < 1000; ++round) {
      const int d = 1 + static_cast<int>(rng.below(5));
      const i64 s = rng.range(0, 59);
      const i64 t = rng.range(s + 1, 60);
      const SplittingType st = splitting_type_p1(d, Shape{s, t});
      if (st.n + st.m != t - s) return false;
      if (st.n * st.a + st.m * (st.a + 1) != static_cast<i64>(d) * t) return false;
      if (st.m < 0 || (st.m != 0 && st.m >= t - s)) return false;
    }
    return true;
  }});

  criteria.push_back({"third-family w: closed form equals the Euler-sequence oracle, p,r <= 3, d <= 8",
                      1.0, [](std::string&) {
    auto h0 = [](long m, long e) -> Int {
      return binomial(m + 2, 2) * binomial(e + 2, 2) - binomial(m + 1, 2) * binomial(e + 1, 2);
    };
    if (p2_symq_w(1, 1, 3) != 37) return false;
    for (int p = 1; p <= 3; ++p) {
      for (int r = 1; r <= 3; ++r) {
        for (int d = p + 2; d <= 8; ++d) {
          Int oracle = 0;
          for (int i = 0; i <= std::min(p, r); ++i) oracle += h0(p + r - 2 * i, d - p + i);
          if (p2_symq_w(p, r, d) != oracle) return false;
        }
      }
    }
    return true;
  }});

  criteria.push_back({"resolution consistency: rank and c1 identities, N <= 6, k <= 10", 1.0,
                      [](std::string&) {
    for (int N = 2; N <= 6; ++N) {
      for (std::size_t k = 1; k <= 10; ++k) {
        if (!beilinson_consistency(N, k).ok) return false;
      }
    }
    return true;
  }});

  criteria.push_back({"round-trip: 100 rep files + 10 reports bit-exact; CLI exit codes", 10.0,
                      [](std::string& detail) {
    SeededRng rng(kDefaultSeed);
    for (int i = 0; i < 100; ++i) {
      const int w = 3 + static_cast<int>(rng.below(3));
      Shape sh{rng.range(0, 5), rng.range(0, 6)};
      if (sh.s == 0 && sh.t == 0) sh.t = 1;
      const FieldSpec field = i % 2 ? FieldSpec::rationals() : FieldSpec::fp(32003);
      const KroneckerRep rep = random_rep(w, sh, field, rng.next());
      const std::string path = "acceptance_rep.json";
      save_rep(rep, path);
      const KroneckerRep back = load_rep(path);
      std::remove(path.c_str());
      if (!(back == rep)) return false;
      if (rep_to_json(back).dump() != rep_to_json(rep).dump()) return false;
    }
    for (int i = 0; i < 10; ++i) {
      const ExperimentReport rep = euler_experiment(3, 4, 3, 4, FieldSpec::fp(32003), rng.next());
      const auto j = report_to_json(rep);
      const ExperimentReport back = report_from_json(j);
      if (!(back == rep)) return false;
      if (report_to_json(back).dump() != j.dump()) return false;
    }
    if (g_cli_path.empty()) {
      detail = "no --cli path given";
      return false;
    }
    // Exit-code table: 0 ok, 1 failed experiment verdict, 2 usage, 3 bad file.
    if (run_cli("seq --w 3 --k 5") != 0) {
      detail = "seq exit code";
      return false;
    }
    if (run_cli("seq --w 2 --k 5") != 2) {
      detail = "domain-error exit code";
      return false;
    }
    if (run_cli("nonsense") != 2) {
      detail = "usage exit code";
      return false;
    }
    {
      std::ofstream bad("acceptance_bad.json");
      bad << "{\"w\": 3, \"s\": 1}";
    }
    const int code = run_cli("hom acceptance_bad.json acceptance_bad.json");
    std::remove("acceptance_bad.json");
    if (code != 3) {
      detail = "malformed-file exit code, got " + std::to_string(code);
      return false;
    }
    if (run_cli("experiment --name euler --pairs 5 --dim-cap 4 --w-lo 3 --w-hi 4") != 0) {
      detail = "experiment pass exit code";
      return false;
    }
    // A deliberately failing verdict: the Kac dichotomy over F_2 collapses
    // (the field is too small for genericity), deterministically per seed.
    const int fail_code = run_cli("experiment --name kac --w 3 --s-max 2 --t-max 6 --trials 20 "
                                  "--field fp --p 2 --seed 1");
    if (fail_code != 1) {
      detail = "experiment failure exit code, got " + std::to_string(fail_code);
      return false;
    }
    return true;
  }});

  for (std::size_t i = 0; i < criteria.size(); ++i) {
    run_criterion(static_cast<int>(i + 1), criteria[i]);
  }
  if (g_failures == 0) {
    std::printf("acceptance: all %zu criteria passed\n", criteria.size());
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return 1;
}
