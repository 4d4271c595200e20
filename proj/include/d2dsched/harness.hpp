#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "d2dsched/layout.hpp"
#include "d2dsched/pf.hpp"
#include "d2dsched/spatialnet.hpp"

namespace d2d {

struct DistanceTag {
  std::string name;
  double dmin_m = 0.0;
  double dmax_m = 0.0;
};

// "30-70", "2-65", "10-50", "fixed-30", or "custom:<dmin>:<dmax>"
DistanceTag parse_distance_tag(const std::string& tag);

struct ExperimentSpec {
  std::string scenario = "default";
  double region_edge_m = 500.0;
  double cell_edge_m = 5.0;
  int link_count = 50;
  std::string distance = "2-65";
  RadialLaw radial_law = RadialLaw::kUniformDistance;
  std::vector<std::string> solvers;
  int eval_layouts = 500;
  uint64_t seed = 1;
  bool fading = false;
  int pf_slots = 500;
  int feedback_iters = 20;  // neural feedback iterations (denser layouts may need more)
  std::string model_path;  // neural checkpoint, required by the neural solver
  std::string output_dir;  // empty = keep results in memory only
  int workers = 0;
  bool audit = false;  // extra per-layout CSV artifacts

  LayoutConfig layout_config() const;
  void validate() const;
};

struct ResultRow {
  std::string solver;
  std::string metric;
  double value = 0.0;
  double percent_of_fp = 0.0;
};

struct ResultTable {
  std::string scenario;
  std::string config_hash;
  uint64_t seed = 0;
  std::vector<ResultRow> rows;
  std::map<std::string, std::string> metadata;

  const ResultRow* find(const std::string& solver) const;
};

// FNV-1a over the canonical spec serialization.
std::string config_hash(const ExperimentSpec& spec);

// Mean sum rate per solver over a generated evaluation set, expressed both in
// Mbps and as a percentage of FP (FP itself is always run and reads 100).
// Solvers: fp, greedy, random, all-active, strongest, neural, fp-nofade.
ResultTable run_sumrate_benchmark(const ExperimentSpec& spec);

// Mean log utility per solver over pf_slots-long simulations.
// Solvers: fp, neural, weighted-greedy, max-weight, random, all-active.
ResultTable run_pf_benchmark(const ExperimentSpec& spec);

// K^2 J^2 convolution operations plus N * (sum of consecutive layer products).
long long estimate_complexity(long long links, long long grid_cells, long long filter_cells,
                              const std::vector<int>& layer_sizes);

// Layout files layout_00000.txt.. plus a manifest; optional channel CSVs.
void generate_dataset(const ExperimentSpec& spec, bool export_channels);

void write_result_csv(const ResultTable& table, const std::string& path);
void write_manifest(const ResultTable& table, const ExperimentSpec& spec, const std::string& path);

const char* version_string();

}  // namespace d2d
