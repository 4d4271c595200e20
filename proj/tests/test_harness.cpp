#include <doctest.h>
#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "d2dsched/harness.hpp"

using namespace d2d;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.scenario = "unit";
  spec.link_count = 10;
  spec.distance = "2-65";
  spec.solvers = {"fp", "greedy", "random", "all-active", "strongest"};
  spec.eval_layouts = 8;
  spec.seed = 5;
  spec.workers = 2;
  return spec;
}

}  // namespace

TEST_CASE("harness: distance tags") {
  CHECK(parse_distance_tag("30-70").dmin_m == 30.0);
  CHECK(parse_distance_tag("2-65").dmax_m == 65.0);
  CHECK(parse_distance_tag("10-50").dmin_m == 10.0);
  CHECK(parse_distance_tag("fixed-30").dmin_m == 30.0);
  CHECK(parse_distance_tag("fixed-30").dmax_m == 30.0);
  CHECK(parse_distance_tag("custom:5:20").dmax_m == 20.0);
  CHECK_THROWS_AS(parse_distance_tag("7-11"), std::invalid_argument);
}

TEST_CASE("harness: complexity formula") {
  // K=100, J=63, layers 6-30-30-1: 39,690,000 + 1110 N
  CHECK(estimate_complexity(0, 100, 63, {6, 30, 30, 1}) == 39690000LL);
  CHECK(estimate_complexity(50, 100, 63, {6, 30, 30, 1}) == 39690000LL + 1110 * 50);
  const long long base = estimate_complexity(0, 100, 63, {6, 30, 30, 1});
  const long long n1 = estimate_complexity(100, 100, 63, {6, 30, 30, 1}) - base;
  const long long n2 = estimate_complexity(200, 100, 63, {6, 30, 30, 1}) - base;
  CHECK(n2 == 2 * n1);
  CHECK_THROWS_AS(estimate_complexity(-1, 100, 63, {6, 30, 30, 1}), std::invalid_argument);
}

TEST_CASE("harness: sum-rate benchmark basics") {
  const ExperimentSpec spec = small_spec();
  const ResultTable table = run_sumrate_benchmark(spec);

  const ResultRow* fp = table.find("fp");
  REQUIRE(fp != nullptr);
  CHECK(fp->percent_of_fp == 100.0);
  CHECK(fp->value > 0.0);

  const ResultRow* greedy = table.find("greedy");
  REQUIRE(greedy != nullptr);
  CHECK(greedy->percent_of_fp > 0.0);

  CHECK(table.config_hash.size() == 16);
  CHECK(table.metadata.at("kind") == "sumrate");
}

TEST_CASE("harness: rerun is bit-exact apart from the manifest timestamp") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "d2dsched_harness_test";
  fs::remove_all(dir);

  ExperimentSpec spec = small_spec();
  spec.output_dir = (dir / "a").string();
  run_sumrate_benchmark(spec);
  spec.output_dir = (dir / "b").string();
  run_sumrate_benchmark(spec);

  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));
  CHECK(slurp(dir / "a" / "per_layout.csv") == slurp(dir / "b" / "per_layout.csv"));

  // outputs embed the producing config hash
  const std::string results = slurp(dir / "a" / "results.csv");
  CHECK(results.find("# config_hash=" + config_hash(spec)) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("harness: config hash tracks the spec") {
  ExperimentSpec a = small_spec();
  ExperimentSpec b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 6;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.distance = "30-70";
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("harness: neural solver demands a checkpoint") {
  ExperimentSpec spec = small_spec();
  spec.solvers = {"fp", "neural"};
  CHECK_THROWS_WITH_AS(run_sumrate_benchmark(spec),
                       "neural solver requested but no model path given", std::runtime_error);
  spec.model_path = "/nonexistent/model.txt";
  CHECK_THROWS_AS(run_sumrate_benchmark(spec), std::runtime_error);
}

TEST_CASE("harness: pf benchmark on a tiny spec") {
  ExperimentSpec spec = small_spec();
  spec.solvers = {"fp", "max-weight", "random", "all-active"};
  spec.eval_layouts = 2;
  spec.pf_slots = 40;
  const ResultTable table = run_pf_benchmark(spec);
  REQUIRE(table.find("fp") != nullptr);
  CHECK(table.find("fp")->percent_of_fp == 100.0);
  REQUIRE(table.find("max-weight") != nullptr);
  CHECK(table.metadata.at("kind") == "pf");
  // metadata records the rendering clamp contract
  CHECK(table.metadata.count("utility_floor_mbps") == 1);
}

TEST_CASE("harness: dataset generation writes layouts and manifest") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "d2dsched_dataset_test";
  fs::remove_all(dir);
  ExperimentSpec spec = small_spec();
  spec.eval_layouts = 3;
  spec.output_dir = dir.string();
  generate_dataset(spec, true);
  CHECK(fs::exists(dir / "layout_00000.txt"));
  CHECK(fs::exists(dir / "layout_00002.txt"));
  CHECK(fs::exists(dir / "channel_00001.csv"));
  CHECK(fs::exists(dir / "manifest.json"));

  const Layout loaded = load_layout((dir / "layout_00001.txt").string());
  CHECK(loaded.size() == 10);
  fs::remove_all(dir);
}

TEST_CASE("harness: fading flag produces the fp-nofade reference") {
  ExperimentSpec spec = small_spec();
  spec.fading = true;
  spec.solvers = {"fp", "fp-nofade", "greedy"};
  spec.eval_layouts = 6;
  const ResultTable t = run_sumrate_benchmark(spec);
  const ResultRow* nofade = t.find("fp-nofade");
  REQUIRE(nofade != nullptr);
  CHECK(nofade->percent_of_fp < 100.0);  // blind to fading cannot beat informed FP on average
  CHECK(nofade->percent_of_fp > 30.0);
}
