#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shls/suites.hpp"

#include <omp.h>

#include <set>

using namespace shls;
using namespace shls::suites;

TEST_CASE("config: unknown keys and bad values are rejected") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.merge_json(nlohmann::json{{"paths", 10}, {"colour", "red"}}), std::invalid_argument);
  cfg = RunConfig{};
  cfg.merge_json(nlohmann::json{{"alpha", {0.5, 1.0}}, {"seed", 4}});
  CHECK(cfg.alphas.size() == 2);
  CHECK(cfg.seed == 4);
  CHECK_NOTHROW(cfg.validate());
  for (auto bad : {nlohmann::json{{"grid_n", 4}}, nlohmann::json{{"alpha", {3.5}}}, nlohmann::json{{"p", {1.0}}},
                   nlohmann::json{{"suite", "nope"}}, nlohmann::json{{"s", {-1.0}}}}) {
    RunConfig c;
    c.merge_json(bad);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
}

TEST_CASE("config JSON round trip") {
  RunConfig cfg;
  cfg.ps = {1.25, 4.0};
  cfg.truncation = 50.0;
  RunConfig back;
  nlohmann::json j = nlohmann::json::parse(cfg.to_json().dump());
  back.merge_json(j);
  CHECK(back.to_json() == cfg.to_json());
}

TEST_CASE("catalog covers every suite with unique names") {
  const auto& cat = catalog();
  CHECK(cat.size() >= 25);
  std::set<std::string> names, suites;
  for (const auto& c : cat) {
    names.insert(c.name);
    suites.insert(c.suite);
    CHECK_FALSE(c.formula.empty());
    CHECK_FALSE(c.tolerance.empty());
  }
  CHECK(names.size() == cat.size());
  CHECK(suites.size() == suite_names().size());
  REQUIRE(find_check("green-formula") != nullptr);
  CHECK(find_check("green-formula")->formula.find("(y∧s)") != std::string::npos);
  CHECK(find_check("bogus") == nullptr);
}

TEST_CASE("spectral and subordination suites pass on a random chain") {
  RunConfig cfg;
  cfg.out.clear();
  cfg.chain = "builtin:three-cycle";
  for (const char* s : {"spectral", "subordination"}) {
    RunReport rep;
    run_suite(s, cfg, rep);
    CHECK(rep.checks.size() >= 6);
    for (const auto& c : rep.checks) {
      INFO(c.name << " value " << c.value << " oracle " << c.oracle);
      CHECK(c.passed());
    }
  }
}

TEST_CASE("mc suite is independent of the thread count") {
  RunConfig cfg;
  cfg.out.clear();
  cfg.suite = "mc";
  cfg.paths = 2000;
  cfg.s_values = {1.0};
  omp_set_num_threads(1);
  const std::string one = run(cfg).to_json().dump();
  omp_set_num_threads(4);
  CHECK(run(cfg).to_json().dump() == one);
}
