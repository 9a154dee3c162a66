#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "heatvar/experiment.hpp"

using namespace heatvar;
using nlohmann::json;
namespace he = heatvar::experiment;

namespace {

json tiny_spec() {
  return json::parse(R"({
    "schema_version": 1,
    "master_seed": 90125,
    "horizon": 1.0,
    "threads": 1,
    "studies": [
      {"name": "sm", "type": "second_moment", "variants": ["centered", "rademacher"],
       "n": 16, "pairs": [[0.0, 1.0], [0.25, 0.75]], "replications": 60},
      {"name": "cubic", "type": "cubic_decay", "n_list": [4, 16, 64], "replications": 60},
      {"name": "quartic", "type": "quartic_convergence", "n_list": [4, 16, 64],
       "replications": 60}
    ]
  })");
}

}  // namespace

TEST_CASE("spec errors carry their field path") {
  const auto expect_path = [](json spec, const std::string& needle) {
    try {
      he::run_experiment(spec);
      FAIL("expected SpecError for ", needle);
    } catch (const he::SpecError& e) {
      INFO("message: ", e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_path(json::parse(R"({"studies": []})"), "master_seed");
  expect_path(json::parse(R"({"master_seed": 1})"), "studies");
  expect_path(json::parse(R"({"master_seed": 1, "studies": [{}]})"), "studies[0].type");
  expect_path(json::parse(R"({"master_seed": 1, "studies": [{"type": "warp"}]})"),
              "studies[0].type");
  expect_path(
      json::parse(
          R"({"master_seed": 1, "studies": [{"type": "second_moment", "variants": ["centered"], "n": 16, "pairs": [[0, 1]]}]})"),
      "studies[0].replications");
  expect_path(
      json::parse(
          R"({"master_seed": 1, "studies": [{"type": "second_moment", "variants": ["blue"], "n": 16, "pairs": [[0, 1]], "replications": 50}]})"),
      "studies[0].variants[0]");
  expect_path(
      json::parse(
          R"({"master_seed": 1, "studies": [{"type": "second_moment", "variants": ["centered"], "pairs": [[0, 1]], "replications": 50}]})"),
      "studies[0]");
  expect_path(json::parse(R"({"master_seed": 1, "schema_version": 2, "studies": [1]})"),
              "schema_version");

  // usage errors inside a study surface as SpecError with the study path
  expect_path(
      json::parse(
          R"({"master_seed": 1, "studies": [{"type": "second_moment", "variants": ["centered"], "n": 16, "pairs": [[0, 1]], "replications": 10}]})"),
      "studies[0]");
}

TEST_CASE("tiny experiment run: structure, determinism across thread counts") {
  const auto spec = tiny_spec();
  const auto one = he::run_experiment(spec, 1);
  const auto eight = he::run_experiment(spec, 8);

  CHECK(one.report.at("studies").size() == 3);
  CHECK(one.report.at("schema_version") == 1);
  CHECK(one.report.contains("timing"));
  for (const auto& study : one.report.at("studies")) {
    CHECK(study.contains("rows"));
    for (const auto& row : study.at("rows")) {
      CHECK(row.contains("estimate"));
      CHECK(row.contains("stderr"));
      CHECK(row.contains("target"));
      CHECK(row.contains("pass"));
    }
  }

  // identical modulo wall clock and thread telemetry
  CHECK(he::strip_timing(one.report).dump() == he::strip_timing(eight.report).dump());
  CHECK(one.report.at("timing").at("threads") == 1);
  CHECK(eight.report.at("timing").at("threads") == 8);

  // repeat runs are bit-identical
  const auto again = he::run_experiment(spec, 1);
  CHECK(he::strip_timing(one.report).dump() == he::strip_timing(again.report).dump());
}

TEST_CASE("csv summary matches the report rows") {
  const auto result = he::run_experiment(tiny_spec(), 2);
  const std::string csv = he::report_to_csv(result.report);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "study,variant,n,s,t,estimate,stderr,target,z,pass");
  std::size_t rows = 0;
  std::size_t total = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 9);
  }
  for (const auto& study : result.report.at("studies")) total += study.at("rows").size();
  CHECK(rows == total);
}

TEST_CASE("factorization metadata is reported") {
  const auto result = he::run_experiment(tiny_spec(), 1);
  const auto& factorizations = result.report.at("factorizations");
  CHECK(factorizations.size() == 3);  // n = 4, 16, 64; the two n = 16 studies share one
  for (const auto& f : factorizations) {
    CHECK(f.at("jitter_applied") == false);
    CHECK(f.at("size").get<std::int64_t>() >= 4);
  }
}

TEST_CASE("shared cache reuses factorizations across runs") {
  stats::SamplerCache cache;
  const auto first = he::run_experiment(tiny_spec(), 1, &cache);
  const auto second = he::run_experiment(tiny_spec(), 8, &cache);
  CHECK(he::strip_timing(first.report).dump() == he::strip_timing(second.report).dump());
  CHECK(cache.factorizations().size() == 3);  // n = 4, 16, 64
}
