#include <doctest.h>

#include <cstdio>

#include "fibundle/experiment.hpp"

using namespace fibundle;

namespace {

const FieldSpec kFp = FieldSpec::fp(32003);

ExperimentReport strip_wall(ExperimentReport r) {
  r.wall_ms = 0;
  return r;
}

}  // namespace

TEST_CASE("kac experiment passes on a small grid and is reproducible") {
  ExperimentReport a = kac_experiment(3, 3, 8, 6, kFp, 17);
  CHECK(a.pass);
  CHECK(a.cells.size() == 4 * 8 - (0 + 1 + 2 + 3));  // s in 0..3, t in s+1..8
  for (const auto& cell : a.cells) CHECK(cell.pass);
  ExperimentReport b = kac_experiment(3, 3, 8, 6, kFp, 17);
  CHECK(strip_wall(a) == strip_wall(b));
  ExperimentReport c = kac_experiment(3, 3, 8, 6, kFp, 18);
  CHECK_FALSE(strip_wall(a) == strip_wall(c));  // seeds matter
}

TEST_CASE("kac cell bookkeeping exposes predictions") {
  ExperimentReport rep = kac_experiment(3, 1, 4, 3, kFp, 5);
  bool saw_simple = false, saw_decomposable = false;
  for (const auto& cell : rep.cells) {
    if (cell.shape == Shape{1, 3}) {
      CHECK(cell.q == 1);
      CHECK(cell.predicted.find("end=1") == 0);
      saw_simple = true;
    }
    if (cell.shape == Shape{1, 4}) {
      CHECK(cell.q == 5);
      CHECK(cell.predicted.find("end=5") == 0);
      CHECK(cell.predicted.find("iso=canonical(k=1,n=1,m=1)") != std::string::npos);
      saw_decomposable = true;
    }
  }
  CHECK(saw_simple);
  CHECK(saw_decomposable);
}

TEST_CASE("hom_table experiment passes for small k") {
  ExperimentReport rep = hom_table_experiment(3, 3, 4, kFp, 23);
  CHECK(rep.pass);
  CHECK(rep.cells.size() == 3);
  for (const auto& cell : rep.cells) {
    CHECK(cell.pass);
    CHECK(cell.passes == cell.trials);
  }
}

TEST_CASE("hom_table reports are identical across reruns (worker scheduling)") {
  ExperimentReport a = hom_table_experiment(4, 3, 6, kFp, 29);
  ExperimentReport b = hom_table_experiment(4, 3, 6, kFp, 29);
  CHECK(strip_wall(a) == strip_wall(b));
}

TEST_CASE("euler experiment is exact over both fields") {
  ExperimentReport fp = euler_experiment(3, 5, 5, 25, kFp, 31);
  CHECK(fp.pass);
  CHECK(fp.cells.size() == 25);
  ExperimentReport q = euler_experiment(3, 4, 4, 10, FieldSpec::rationals(), 32);
  CHECK(q.pass);
}

TEST_CASE("report JSON round-trips bit-exactly") {
  ExperimentReport rep = kac_experiment(3, 2, 5, 3, kFp, 41);
  const auto j = report_to_json(rep);
  ExperimentReport back = report_from_json(j);
  CHECK(back == rep);
  CHECK(report_to_json(back).dump() == j.dump());

  const std::string path = "test_report_roundtrip.json";
  save_report(rep, path);
  std::remove(path.c_str());
}

TEST_CASE("experiment parameter validation") {
  CHECK_THROWS_AS(kac_experiment(2, 3, 8, 5, kFp, 1), std::invalid_argument);
  CHECK_THROWS_AS(kac_experiment(3, 3, 8, 0, kFp, 1), std::invalid_argument);
  CHECK_THROWS_AS(hom_table_experiment(3, 0, 5, kFp, 1), std::invalid_argument);
  CHECK_THROWS_AS(euler_experiment(4, 3, 5, 10, kFp, 1), std::invalid_argument);
}
