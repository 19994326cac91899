#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "fibundle/bundle.hpp"
#include "fibundle/experiment.hpp"
#include "fibundle/kronrep.hpp"

namespace {

using fibundle::FieldSpec;
using fibundle::Int;
using fibundle::Shape;
using json = nlohmann::ordered_json;

// Exit codes: 0 success / experiment pass, 1 experiment failure verdict,
// 2 usage or domain error, 3 malformed input file.
constexpr int kExitOk = 0;
constexpr int kExitExperimentFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBadFile = 3;

struct Options {
  std::string format = "text";
  std::uint64_t seed = fibundle::kDefaultSeed;
  std::string out_path;
};

FieldSpec parse_field(const std::string& name, std::uint32_t p) {
  if (name == "fp") return FieldSpec::fp(p);
  if (name == "q") return FieldSpec::rationals();
  throw std::invalid_argument("unknown field '" + name + "' (expected fp or q)");
}

std::string verdict_name(const fibundle::Classification& cl) {
  if (!cl.stability) return "not-applicable";
  switch (*cl.stability) {
    case fibundle::StabilityVerdict::Stable:
      return "stable";
    case fibundle::StabilityVerdict::StrictlySemistable:
      return "strictly-semistable";
    case fibundle::StabilityVerdict::Unstable:
      return "unstable";
  }
  return "?";
}

std::string decomposition_name(const fibundle::Decomposition& dc) {
  std::string out;
  if (dc.n > 0) out += "C_" + std::to_string(dc.k) + "^" + std::to_string(dc.n);
  if (dc.m > 0) {
    if (!out.empty()) out += "+";
    out += "C_" + std::to_string(dc.k + 1) + "^" + std::to_string(dc.m);
  }
  return out;
}

void emit(const Options& opt, const std::string& text_form, const json& json_form,
          const std::string& csv_form) {
  if (opt.format == "json") {
    std::cout << json_form.dump() << "\n";
  } else if (opt.format == "csv") {
    std::cout << csv_form;
  } else {
    std::cout << text_form;
  }
}

int run_seq(const Options& opt, int w, std::int64_t k) {
  if (k < 0) throw std::invalid_argument("--k must be nonnegative");
  fibundle::FibTable table = fibundle::fib_table(w, static_cast<std::size_t>(k));
  std::string text, csv = "k,a_k\n";
  json values = json::array();
  for (std::size_t i = 0; i <= table.max_index(); ++i) {
    const std::string v = table.at(i).get_str();
    if (!text.empty()) text += " ";
    text += v;
    csv += std::to_string(i) + "," + v + "\n";
    values.push_back(v);
  }
  json j{{"w", w}, {"values", values}};
  emit(opt, text + "\n", j, csv);
  return kExitOk;
}

int run_classify(const Options& opt, const fibundle::PairPreset& preset, Shape shape) {
  fibundle::Classification cl = fibundle::classify(preset, shape);
  fibundle::CokernelHomDims dims = fibundle::cokernel_hom_dims(preset, shape);

  std::string text;
  text += "preset=" + preset.name() + "\n";
  text += "w=" + std::to_string(preset.w) + "\n";
  text += "s=" + std::to_string(shape.s) + "\n";
  text += "t=" + std::to_string(shape.t) + "\n";
  text += "q=" + cl.q.get_str() + "\n";
  text += "admissible=" + std::string(cl.admissible ? "true" : "false") + "\n";
  text += "simple=" + std::string(cl.simple ? "true" : "false") + "\n";
  if (cl.decomposition) {
    text += "decomposition=" + decomposition_name(*cl.decomposition) + "\n";
    text += "k=" + std::to_string(cl.decomposition->k) + "\n";
    text += "n=" + std::to_string(cl.decomposition->n) + "\n";
    text += "m=" + std::to_string(cl.decomposition->m) + "\n";
  }
  text += "fibonacci_shape=" + std::string(cl.fibonacci_shape ? "true" : "false") + "\n";
  text += "semi_exceptional=" + std::string(cl.semi_exceptional_shape ? "true" : "false") + "\n";
  if (preset.kind == fibundle::PresetKind::Steiner) {
    text += "exceptional_range=" + std::string(cl.exceptional_range ? "true" : "false") + "\n";
    if (cl.exceptional_steiner_stable) text += "exceptional_steiner_stable=true\n";
  }
  text += "stability=" + verdict_name(cl) + "\n";
  text += "hom_F_C=" + dims.hom_F_C.get_str() + "\n";
  text += "hom_E_C=" + dims.hom_E_C.get_str() + "\n";

  json j;
  j["preset"] = preset.name();
  j["w"] = preset.w;
  j["s"] = shape.s;
  j["t"] = shape.t;
  j["q"] = cl.q.get_str();
  j["admissible"] = cl.admissible;
  j["simple"] = cl.simple;
  if (cl.decomposition) {
    j["decomposition"] = json{{"k", cl.decomposition->k},
                              {"n", cl.decomposition->n},
                              {"m", cl.decomposition->m},
                              {"pretty", decomposition_name(*cl.decomposition)}};
  } else {
    j["decomposition"] = nullptr;
  }
  j["fibonacci_shape"] = cl.fibonacci_shape;
  j["semi_exceptional"] = cl.semi_exceptional_shape;
  if (preset.kind == fibundle::PresetKind::Steiner) {
    j["exceptional_range"] = cl.exceptional_range;
    j["exceptional_steiner_stable"] = cl.exceptional_steiner_stable;
  }
  j["stability"] = verdict_name(cl);
  j["hom_F_C"] = dims.hom_F_C.get_str();
  j["hom_E_C"] = dims.hom_E_C.get_str();

  std::string csv = "preset,w,s,t,q,admissible,simple,decomposition,stability\n";
  csv += preset.name() + "," + std::to_string(preset.w) + "," + std::to_string(shape.s) + "," +
         std::to_string(shape.t) + "," + cl.q.get_str() + "," + (cl.admissible ? "true" : "false") +
         "," + (cl.simple ? "true" : "false") + "," +
         (cl.decomposition ? decomposition_name(*cl.decomposition) : "-") + "," + verdict_name(cl) +
         "\n";
  emit(opt, text, j, csv);
  return kExitOk;
}

int run_experiment(const Options& opt, const fibundle::ExperimentReport& rep) {
  if (!opt.out_path.empty()) fibundle::save_report(rep, opt.out_path);
  std::string text = "experiment=" + rep.name + "\n";
  for (const auto& [k, v] : rep.params) text += k + "=" + v + "\n";
  text += "seed=" + std::to_string(rep.master_seed) + "\n";
  for (const auto& cell : rep.cells) {
    if (!cell.pass) {
      text += "failed_cell=" + cell.label + " predicted{" + cell.predicted + "} observed{" +
              cell.observed + "}\n";
    }
  }
  text += "cells=" + std::to_string(rep.cells.size()) + "\n";
  text += "verdict=" + std::string(rep.pass ? "pass" : "fail") + "\n";
  text += "wall_ms=" + std::to_string(rep.wall_ms) + "\n";

  std::string csv = "label,s,t,q,predicted,observed,trials,passes,pass\n";
  for (const auto& cell : rep.cells) {
    csv += "\"" + cell.label + "\"," + std::to_string(cell.shape.s) + "," + std::to_string(cell.shape.t) +
           "," + cell.q.get_str() + ",\"" + cell.predicted + "\",\"" + cell.observed + "\"," +
           std::to_string(cell.trials) + "," + std::to_string(cell.passes) + "," +
           (cell.pass ? "true" : "false") + "\n";
  }
  emit(opt, text, fibundle::report_to_json(rep), csv);
  return rep.pass ? kExitOk : kExitExperimentFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fibundle: canonical decomposition, Hom/Ext dimensions and stability classifiers\n"
      "for cokernel bundles and Kronecker representations."};
  app.require_subcommand(1);
  app.fallthrough();  // global --format/--seed may follow the subcommand

  Options opt;
  app.add_option("--format", opt.format, "Output format: text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--seed", opt.seed, "Master seed (default is fixed for reproducibility)")
      ->capture_default_str();

  // seq
  auto* seq = app.add_subcommand("seq", "Print a_0..a_K for the recurrence a_{k+1} = w a_k - a_{k-1}");
  int seq_w = 3;
  std::int64_t seq_k = 10;
  seq->add_option("--w", seq_w, "Recurrence parameter, w >= 3")->required();
  seq->add_option("--k", seq_k, "Largest index K")->required();

  // classify
  auto* cls = app.add_subcommand("classify", "Classify the cokernel of a generic E^s -> F^t");
  std::string cls_preset;
  int cls_N = 2, cls_d = 1, cls_p = 1, cls_r = 1;
  Shape cls_shape;
  cls->add_option("--preset", cls_preset, "steiner | omega_target | omega_source | p2_symq")
      ->required()
      ->check(CLI::IsMember({"steiner", "omega_target", "omega_source", "p2_symq"}));
  cls->add_option("--N", cls_N, "Projective dimension N");
  cls->add_option("--d", cls_d, "Twist d");
  cls->add_option("--p", cls_p, "Form degree p");
  cls->add_option("--r", cls_r, "Symmetric power r");
  cls->add_option("--s", cls_shape.s, "Source multiplicity")->required();
  cls->add_option("--t", cls_shape.t, "Target multiplicity")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a representation file (random or canonical)");
  bool gen_random = false, gen_canonical = false;
  int gen_w = 3;
  Shape gen_shape;
  std::int64_t gen_k = 1, gen_n = 1, gen_m = 0;
  std::string gen_field = "fp";
  std::uint32_t gen_p = fibundle::kDefaultPrime;
  gen->add_flag("--random", gen_random, "Uniformly random entries");
  gen->add_flag("--canonical", gen_canonical, "Block-diagonal B_k^n + B_{k+1}^m layout");
  gen->add_option("--w", gen_w, "Number of slices, w >= 3")->required();
  gen->add_option("--s", gen_shape.s, "Columns (random mode)");
  gen->add_option("--t", gen_shape.t, "Rows (random mode)");
  gen->add_option("--k", gen_k, "Block index (canonical mode)");
  gen->add_option("--n", gen_n, "Number of B_k blocks (canonical mode)");
  gen->add_option("--m", gen_m, "Number of B_{k+1} blocks (canonical mode)");
  gen->add_option("--field", gen_field, "fp or q")->check(CLI::IsMember({"fp", "q"}));
  gen->add_option("--p", gen_p, "Field characteristic (fp)");
  gen->add_option("-o,--out", opt.out_path, "Output path")->required();

  // hom
  auto* hom = app.add_subcommand("hom", "Hom/Ext/Euler dimensions between two representation files");
  std::string hom_x, hom_y;
  hom->add_option("x", hom_x, "Source representation file")->required();
  hom->add_option("y", hom_y, "Target representation file")->required();

  // iso
  auto* iso = app.add_subcommand("iso", "Probabilistic isomorphism test between two representation files");
  std::string iso_x, iso_y;
  int iso_trials = 5;
  iso->add_option("x", iso_x, "First representation file")->required();
  iso->add_option("y", iso_y, "Second representation file")->required();
  iso->add_option("--trials", iso_trials, "Number of sampled intertwiners")->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a named verification experiment");
  std::string exp_name, exp_field = "fp";
  std::uint32_t exp_p = fibundle::kDefaultPrime;
  int exp_w = 3, exp_trials = 20, exp_pairs = 200, exp_w_lo = 3, exp_w_hi = 5;
  std::int64_t exp_smax = 4, exp_tmax = 10, exp_kmax = 4, exp_dimcap = 8;
  exp->add_option("--name", exp_name, "kac | hom_table | euler")
      ->required()
      ->check(CLI::IsMember({"kac", "hom_table", "euler"}));
  exp->add_option("--w", exp_w, "w for kac/hom_table");
  exp->add_option("--s-max", exp_smax, "kac: largest s");
  exp->add_option("--t-max", exp_tmax, "kac: largest t");
  exp->add_option("--k-max", exp_kmax, "hom_table: largest block index");
  exp->add_option("--trials", exp_trials, "Trials per cell");
  exp->add_option("--pairs", exp_pairs, "euler: number of random pairs");
  exp->add_option("--w-lo", exp_w_lo, "euler: smallest w");
  exp->add_option("--w-hi", exp_w_hi, "euler: largest w");
  exp->add_option("--dim-cap", exp_dimcap, "euler: largest dimension");
  exp->add_option("--field", exp_field, "fp or q")->check(CLI::IsMember({"fp", "q"}));
  exp->add_option("--p", exp_p, "Field characteristic (fp)");
  exp->add_option("-o,--out", opt.out_path, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (seq->parsed()) return run_seq(opt, seq_w, seq_k);

    if (cls->parsed()) {
      fibundle::PairPreset preset;
      if (cls_preset == "steiner") {
        preset = fibundle::steiner_preset(cls_N, cls_d);
      } else if (cls_preset == "omega_target") {
        preset = fibundle::omega_target_preset(cls_N, cls_p);
      } else if (cls_preset == "omega_source") {
        preset = fibundle::omega_source_preset(cls_N, cls_p);
      } else {
        preset = fibundle::p2_symq_preset(cls_p, cls_r, cls_d);
      }
      return run_classify(opt, preset, cls_shape);
    }

    if (gen->parsed()) {
      if (gen_random == gen_canonical) {
        throw std::invalid_argument("gen needs exactly one of --random / --canonical");
      }
      FieldSpec field = parse_field(gen_field, gen_p);
      fibundle::KroneckerRep rep;
      if (gen_random) {
        rep = fibundle::random_rep(gen_w, gen_shape, field, opt.seed);
      } else {
        rep = fibundle::canonical_rep(gen_w, static_cast<std::size_t>(gen_k), gen_n, gen_m, field,
                                      opt.seed);
      }
      fibundle::save_rep(rep, opt.out_path);
      std::cout << "wrote=" << opt.out_path << " s=" << rep.shape.s << " t=" << rep.shape.t << "\n";
      return kExitOk;
    }

    if (hom->parsed()) {
      fibundle::KroneckerRep x = fibundle::load_rep(hom_x);
      fibundle::KroneckerRep y = fibundle::load_rep(hom_y);
      const std::int64_t h = fibundle::hom_dim(x, y);
      const std::int64_t e = fibundle::ext_dim(x, y);
      const Int eu = fibundle::euler_form(x.w, x.shape, y.shape);
      std::string text = "hom=" + std::to_string(h) + " ext=" + std::to_string(e) +
                         " euler=" + eu.get_str() + "\n";
      json j{{"hom", h}, {"ext", e}, {"euler", eu.get_str()}};
      emit(opt, text, j, "hom,ext,euler\n" + std::to_string(h) + "," + std::to_string(e) + "," +
                             eu.get_str() + "\n");
      return kExitOk;
    }

    if (iso->parsed()) {
      fibundle::KroneckerRep x = fibundle::load_rep(iso_x);
      fibundle::KroneckerRep y = fibundle::load_rep(iso_y);
      const bool ans = fibundle::is_isomorphic(x, y, iso_trials, opt.seed);
      std::string text = std::string("isomorphic=") + (ans ? "true" : "false") +
                         " trials=" + std::to_string(iso_trials) + "\n";
      json j{{"isomorphic", ans}, {"trials", iso_trials}};
      emit(opt, text, j,
           std::string("isomorphic,trials\n") + (ans ? "true" : "false") + "," +
               std::to_string(iso_trials) + "\n");
      return kExitOk;
    }

    if (exp->parsed()) {
      FieldSpec field = parse_field(exp_field, exp_p);
      fibundle::ExperimentReport rep;
      if (exp_name == "kac") {
        rep = fibundle::kac_experiment(exp_w, exp_smax, exp_tmax, exp_trials, field, opt.seed);
      } else if (exp_name == "hom_table") {
        rep = fibundle::hom_table_experiment(exp_w, static_cast<std::size_t>(exp_kmax), exp_trials,
                                             field, opt.seed);
      } else {
        rep = fibundle::euler_experiment(exp_w_lo, exp_w_hi, exp_dimcap, exp_pairs, field, opt.seed);
      }
      return run_experiment(opt, rep);
    }
  } catch (const fibundle::RepFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadFile;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
