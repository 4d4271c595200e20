#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "d2dsched/layout.hpp"
#include "d2dsched/metrics.hpp"
#include "d2dsched/rng.hpp"

namespace d2d {

// M x M cell matrix addressed with the layout's 1-based cell indices.
class Grid {
 public:
  Grid() = default;
  explicit Grid(int cells) : m_(cells), v_(static_cast<size_t>(cells) * cells, 0.0) {}

  int cells() const { return m_; }
  double& at(int s, int t) { return v_[static_cast<size_t>(s - 1) * m_ + (t - 1)]; }
  double at(int s, int t) const { return v_[static_cast<size_t>(s - 1) * m_ + (t - 1)]; }
  double at_or_zero(int s, int t) const {
    if (s < 1 || t < 1 || s > m_ || t > m_) return 0.0;
    return at(s, t);
  }
  double sum() const;

 private:
  int m_ = 0;
  std::vector<double> v_;
};

// Odd square spatial filter; entry (u,v) is 1-based with centre (c,c).
struct Filter {
  int cells = 0;
  std::vector<double> w;

  Filter() = default;
  explicit Filter(int j) : cells(j), w(static_cast<size_t>(j) * j, 0.0) {}
  int centre() const { return (cells + 1) / 2; }
  double& at(int u, int v) { return w[static_cast<size_t>(u - 1) * cells + (v - 1)]; }
  double at(int u, int v) const { return w[static_cast<size_t>(u - 1) * cells + (v - 1)]; }
  bool in_support(int du, int dv) const {
    const int r = centre() - 1;
    return du >= -r && du <= r && dv >= -r && dv <= r;
  }
};

// Spatial filter plus the per-link fully connected stage. Weight matrices are
// row-major: w1 is h1 x h0, w2 is h2 x h1, w3 is 1 x h2.
struct ModelWeights {
  std::string version = "v1";
  double cell_edge_m = 5.0;
  Filter filter;
  std::vector<int> layer_sizes{6, 30, 30, 1};
  std::vector<double> w1, b1, w2, b2, w3, b3;

  int input_size() const { return layer_sizes[0]; }
  int hidden1() const { return layer_sizes[1]; }
  int hidden2() const { return layer_sizes[2]; }
  void validate() const;
};

// Random initialization: filter entries 1e-2 * U[0,1], fully connected layers
// symmetric uniform with fan-in scaling. Outputs start near 0.5.
ModelWeights init_model(int filter_cells, double cell_edge_m, const std::vector<int>& layer_sizes,
                        Rng& rng);

struct DensityGrids {
  Grid tx;
  Grid rx;
};

// T(s,t) = sum of x_i over links whose transmitter occupies cell (s,t); the
// receiver grid analogously. `active` masks links out of both grids entirely.
DensityGrids build_density_grids(const Layout& layout, const std::vector<double>& x,
                                 const std::vector<uint8_t>* active = nullptr);

// Filter response centred on cell (s,t) with zero padding outside the region.
double conv_at(const Grid& grid, const Filter& filter, int s, int t);

struct LinkFeatures {
  double tx_int = 0.0;
  double rx_int = 0.0;
  double dcs = 0.0;
  double dcs_max = 0.0;
  double dcs_min = 0.0;
  double x_prev = 0.0;
  std::array<double, 6> as_array() const { return {tx_int, rx_int, dcs, dcs_max, dcs_min, x_prev}; }
};

// (TxINT_i, RxINT_i): neighbourhood convolutions with the link's own
// transmitter and receiver contributions subtracted out.
std::pair<double, double> link_interference_features(const Layout& layout,
                                                     const DensityGrids& grids,
                                                     const Filter& filter,
                                                     const std::vector<double>& x, int i);

// Filter entry at the receiver's cell offset from its transmitter. Offsets
// outside the filter support raise std::domain_error.
double direct_channel_strength(const Filter& filter, const Layout& layout, int i);

// Two ReLU hidden layers, sigmoid output in (0,1).
double fc_forward(const std::array<double, 6>& features, const ModelWeights& weights);

// Everything one feedback iteration produced, kept for reverse-mode replay.
struct IterationTrace {
  std::vector<double> x_prev;
  std::vector<std::array<double, 6>> features;
  std::vector<std::vector<double>> z1, z2;  // hidden pre-activations per link
  std::vector<double> fc_out;
  std::vector<uint8_t> mask;  // 1 = accept the fresh output
};

// One Jacobi-style pass: grids from x_prev, features and the fully connected
// stage for every (active) link. Returns the raw outputs before mixing.
std::vector<double> forward_pass(const Layout& layout, const ModelWeights& weights,
                                 const std::vector<double>& x_prev,
                                 const std::vector<uint8_t>* active, IterationTrace* trace);

struct FeedbackOptions {
  int iterations = 20;
  double mix_prob = 0.5;  // probability of accepting the fresh output per link
  double quantize_threshold = 0.5;
  bool record_trajectory = false;
};

struct FeedbackResult {
  Schedule schedule;
  std::vector<double> x_relaxed;
  std::vector<std::vector<double>> trajectory;
};

// x starts all-ones; per iteration every link reads the same previous state,
// then keeps its old value with probability 1 - mix_prob (symmetry breaking).
// The final x is quantized at the configured threshold.
FeedbackResult feedback_schedule(const Layout& layout, const ModelWeights& weights,
                                 const FeedbackOptions& options, Rng& rng,
                                 const std::vector<uint8_t>* active = nullptr);

// Versioned text checkpoint: header, filter row-major, then each layer's
// weight matrix row-major and bias vector, 9 significant digits.
void save_model(const ModelWeights& weights, const std::string& path);
ModelWeights load_model(const std::string& path);
std::string model_to_string(const ModelWeights& weights);
ModelWeights model_from_string(const std::string& text);

// Rank correlation between filter-entry radius and value; a trained filter is
// expected to decay with radius (diagnostic, not a hard property).
double filter_radial_decay_correlation(const Filter& filter);

}  // namespace d2d
