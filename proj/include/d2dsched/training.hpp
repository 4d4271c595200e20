#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "d2dsched/channel.hpp"
#include "d2dsched/spatialnet.hpp"

namespace d2d {

// Trainable arrays in a fixed flattening order: filter, w1, b1, w2, b2, w3, b3.
std::array<std::vector<double>*, 7> param_blocks(ModelWeights& m);
std::array<const std::vector<double>*, 7> param_blocks(const ModelWeights& m);
size_t param_count(const ModelWeights& m);
double get_param(const ModelWeights& m, size_t flat_index);
void set_param(ModelWeights& m, size_t flat_index, double value);

struct ModelGradients {
  std::vector<double> filter, w1, b1, w2, b2, w3, b3;

  ModelGradients() = default;
  explicit ModelGradients(const ModelWeights& m);
  std::array<std::vector<double>*, 7> blocks();
  std::array<const std::vector<double>*, 7> blocks() const;
  void add(const ModelGradients& other);
  void scale(double factor);
  double get(size_t flat_index) const;
  double max_abs() const;
  bool finite() const;
};

// Forward records of the unrolled computation: grids are rebuilt from the
// stored x's during the reverse sweep instead of being kept.
struct UnrollTape {
  std::vector<IterationTrace> iterations;
  std::vector<double> x_final;
};

// One Bernoulli(mix_prob) retention mask per link per iteration (1 = accept
// the fresh output). Masks are constants of the differentiated computation.
std::vector<std::vector<uint8_t>> draw_masks(int unroll, int links, double mix_prob, Rng& rng);

double relaxed_sum_rate(const std::vector<double>& x, const ChannelMatrix& g,
                        const ChannelParams& params);

// Runs `masks.size()` tied iterations from all-ones (or x_init) and returns
// the loss, the negative relaxed sum rate at the final x.
double training_forward(const Layout& layout, const ChannelMatrix& g, const ChannelParams& params,
                        const ModelWeights& weights,
                        const std::vector<std::vector<uint8_t>>& masks, UnrollTape* tape,
                        const std::vector<double>* x_init = nullptr);

// Reverse-mode accumulation through every recorded iteration; tied parameters
// gather contributions from each one. `upstream_dx` overrides the loss
// layer's dLoss/dx_final, and `dx_init` receives dLoss/dx0 when given.
ModelGradients training_backward(const Layout& layout, const UnrollTape& tape,
                                 const ChannelMatrix& g, const ChannelParams& params,
                                 const ModelWeights& weights,
                                 const std::vector<double>* upstream_dx = nullptr,
                                 std::vector<double>* dx_init = nullptr);

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  size_t worst_param = 0;
  int samples = 0;
};

// Central differences against the analytic gradients on `samples` randomly
// chosen parameters, with the retention masks held fixed.
FiniteDiffReport finite_difference_check(const Layout& layout, const ChannelMatrix& g,
                                         const ChannelParams& params, ModelWeights& weights,
                                         int unroll, int samples, double step, Rng& rng);

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  AdamState() = default;
  explicit AdamState(size_t params) : m(params, 0.0), v(params, 0.0) {}
};

void adam_step(ModelWeights& weights, const ModelGradients& grads, AdamState& state, double lr);

// Optimizer sidecar: moments plus a full-precision parameter image, so a
// resumed run replays bit-exactly (the model checkpoint itself keeps the
// 9-significant-digit interchange format).
void save_optimizer_state(const ModelWeights& weights, const AdamState& state,
                          const std::string& path);
AdamState load_optimizer_state(const std::string& path, ModelWeights& weights);

struct TrainConfig {
  long total_layouts = 64000;
  int batch_layouts = 64;
  double learning_rate = 1e-3;
  double lr_min = 0.0;  // > 0 enables cosine decay from learning_rate to lr_min
  int unroll_min = 3;
  int unroll_max = 20;
  double mix_prob = 0.5;
  int link_count = 50;
  double region_edge_m = 500.0;
  double cell_edge_m = 5.0;
  int filter_cells = 63;
  std::vector<int> layer_sizes{6, 30, 30, 1};
  uint64_t seed = 1;
  int checkpoint_every_batches = 200;
  int eval_every_batches = 100;
  int eval_layouts = 50;  // held-out mini-set for the FP-ratio log column
  double eval_dmin_m = 2.0;
  double eval_dmax_m = 65.0;
  int workers = 0;  // 0 = hardware concurrency
  std::string output_dir;  // checkpoints and log; empty keeps everything in memory
  std::string resume_dir;  // directory holding the checkpoint to resume from
  long resume_batch = 0;

  long total_batches() const;
  void validate() const;
};

struct TrainLogRow {
  long batch = 0;
  long layouts_seen = 0;
  double loss_mbps = 0.0;      // mean batch loss, negative sum rate in Mbps
  double eval_ratio_pct = 0.0; // neural / FP mean sum rate, percent (0 when not evaluated)
};

struct TrainResult {
  ModelWeights model;
  std::vector<TrainLogRow> log;
  long layouts_seen = 0;
  bool diverged = false;
};

// Unsupervised gradient ascent on the relaxed sum rate over freshly generated
// layouts. Deterministic for a fixed seed: every stream is derived from
// (seed, batch index) or (seed, layout index), and the batch reduction is
// ordered, so a resumed run replays the same tail.
TrainResult train(const TrainConfig& cfg,
                  const std::function<void(const TrainLogRow&)>& on_log = nullptr);

}  // namespace d2d
