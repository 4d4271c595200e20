#include "d2dsched/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "d2dsched/fplinq.hpp"
#include "d2dsched/parallel.hpp"

namespace d2d {

namespace {

// substream index spaces under the master seed
constexpr uint64_t kStreamInit = 17;
constexpr uint64_t kStreamBatch = 1'000'000'000ULL;
constexpr uint64_t kStreamLayout = 2'000'000'000ULL;
constexpr uint64_t kStreamMask = 3'000'000'000ULL;
constexpr uint64_t kStreamEvalLayout = 4'000'000'000ULL;
constexpr uint64_t kStreamEvalSchedule = 5'000'000'000ULL;

// dLoss/dx for loss = -sum_i R_i(x) on the relaxed schedule
std::vector<double> loss_grad_x(const std::vector<double>& x, const ChannelMatrix& g,
                                const ChannelParams& params) {
  const int n = g.n;
  const double p = params.tx_power_w();
  const double sigma2 = noise_power_w(params);
  const double gap = params.snr_gap_linear();
  const double scale = params.bandwidth_hz / std::log(params.rate_log_base);

  std::vector<double> signal(n), denom(n);
  for (int i = 0; i < n; ++i) {
    double interference = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) interference += g.at(i, j) * p * x[j];
    signal[i] = g.at(i, i) * p * x[i];
    denom[i] = gap * (interference + sigma2);
  }
  std::vector<double> grad(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double d = scale * g.at(j, j) * p / (denom[j] + signal[j]);  // own-rate term
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      d -= scale * signal[i] * gap * g.at(i, j) * p / (denom[i] * (denom[i] + signal[i]));
    }
    grad[j] = -d;
  }
  return grad;
}

void dcs_extrema(const Layout& layout, const Filter& filter, int* arg_max, int* arg_min) {
  double best_max = -1.0, best_min = 0.0;
  *arg_max = 0;
  *arg_min = 0;
  for (int i = 0; i < layout.size(); ++i) {
    const double v = direct_channel_strength(filter, layout, i);
    if (i == 0 || v > best_max) {
      best_max = v;
      *arg_max = i;
    }
    if (i == 0 || v < best_min) {
      best_min = v;
      *arg_min = i;
    }
  }
}

size_t filter_flat(const Filter& f, int u, int v) {
  return static_cast<size_t>(u - 1) * f.cells + (v - 1);
}

}  // namespace

std::array<std::vector<double>*, 7> param_blocks(ModelWeights& m) {
  return {&m.filter.w, &m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3};
}

std::array<const std::vector<double>*, 7> param_blocks(const ModelWeights& m) {
  return {&m.filter.w, &m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3};
}

size_t param_count(const ModelWeights& m) {
  size_t total = 0;
  for (const auto* b : param_blocks(m)) total += b->size();
  return total;
}

double get_param(const ModelWeights& m, size_t flat_index) {
  for (const auto* b : param_blocks(m)) {
    if (flat_index < b->size()) return (*b)[flat_index];
    flat_index -= b->size();
  }
  throw std::out_of_range("parameter index out of range");
}

void set_param(ModelWeights& m, size_t flat_index, double value) {
  for (auto* b : param_blocks(m)) {
    if (flat_index < b->size()) {
      (*b)[flat_index] = value;
      return;
    }
    flat_index -= b->size();
  }
  throw std::out_of_range("parameter index out of range");
}

ModelGradients::ModelGradients(const ModelWeights& m)
    : filter(m.filter.w.size(), 0.0),
      w1(m.w1.size(), 0.0),
      b1(m.b1.size(), 0.0),
      w2(m.w2.size(), 0.0),
      b2(m.b2.size(), 0.0),
      w3(m.w3.size(), 0.0),
      b3(m.b3.size(), 0.0) {}

std::array<std::vector<double>*, 7> ModelGradients::blocks() {
  return {&filter, &w1, &b1, &w2, &b2, &w3, &b3};
}

std::array<const std::vector<double>*, 7> ModelGradients::blocks() const {
  return {&filter, &w1, &b1, &w2, &b2, &w3, &b3};
}

void ModelGradients::add(const ModelGradients& other) {
  auto mine = blocks();
  auto theirs = other.blocks();
  for (int b = 0; b < 7; ++b) {
    auto& dst = *mine[b];
    const auto& src = *theirs[b];
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

void ModelGradients::scale(double factor) {
  for (auto* b : blocks())
    for (double& v : *b) v *= factor;
}

double ModelGradients::get(size_t flat_index) const {
  for (const auto* b : blocks()) {
    if (flat_index < b->size()) return (*b)[flat_index];
    flat_index -= b->size();
  }
  throw std::out_of_range("gradient index out of range");
}

double ModelGradients::max_abs() const {
  double best = 0.0;
  for (const auto* b : blocks())
    for (double v : *b) best = std::max(best, std::abs(v));
  return best;
}

bool ModelGradients::finite() const {
  for (const auto* b : blocks())
    for (double v : *b)
      if (!std::isfinite(v)) return false;
  return true;
}

std::vector<std::vector<uint8_t>> draw_masks(int unroll, int links, double mix_prob, Rng& rng) {
  std::vector<std::vector<uint8_t>> masks(unroll, std::vector<uint8_t>(links, 0));
  for (auto& row : masks)
    for (auto& m : row) m = rng.bernoulli(mix_prob) ? 1 : 0;
  return masks;
}

double relaxed_sum_rate(const std::vector<double>& x, const ChannelMatrix& g,
                        const ChannelParams& params) {
  Schedule s{x, false};
  return sum_rate(s, g, params);
}

double training_forward(const Layout& layout, const ChannelMatrix& g, const ChannelParams& params,
                        const ModelWeights& weights,
                        const std::vector<std::vector<uint8_t>>& masks, UnrollTape* tape,
                        const std::vector<double>* x_init) {
  const int n = layout.size();
  std::vector<double> x = x_init ? *x_init : std::vector<double>(n, 1.0);
  if (tape) {
    tape->iterations.clear();
    tape->iterations.reserve(masks.size());
  }
  for (const auto& mask : masks) {
    IterationTrace trace;
    const std::vector<double> out =
        forward_pass(layout, weights, x, nullptr, tape ? &trace : nullptr);
    for (int i = 0; i < n; ++i)
      if (mask[i]) x[i] = out[i];
    if (tape) {
      trace.mask = mask;
      tape->iterations.push_back(std::move(trace));
    }
  }
  if (tape) tape->x_final = x;
  return -relaxed_sum_rate(x, g, params);
}

ModelGradients training_backward(const Layout& layout, const UnrollTape& tape,
                                 const ChannelMatrix& g, const ChannelParams& params,
                                 const ModelWeights& weights,
                                 const std::vector<double>* upstream_dx,
                                 std::vector<double>* dx_init) {
  if (tape.iterations.empty()) throw std::invalid_argument("empty tape");
  const int n = layout.size();
  const int h1 = weights.hidden1(), h2 = weights.hidden2();
  const Filter& f = weights.filter;
  const int j_cells = f.cells;
  const int c = f.centre();
  const int m = layout.config.grid_cells();

  ModelGradients grads(weights);
  std::vector<double> gx = upstream_dx ? *upstream_dx : loss_grad_x(tape.x_final, g, params);

  // DCS extrema achievers are fixed for the whole pass (filter unchanged)
  int arg_max = 0, arg_min = 0;
  dcs_extrema(layout, f, &arg_max, &arg_min);
  auto own_entry = [&](int link) {
    const Link& lk = layout.links[link];
    const int ds = lk.rx_cell.s - lk.tx_cell.s;
    const int dt = lk.rx_cell.t - lk.tx_cell.t;
    return filter_flat(f, c + ds, c + dt);
  };

  std::vector<double> da1(h1), dz1(h1), da2(h2), dz2(h2);

  for (int t = static_cast<int>(tape.iterations.size()) - 1; t >= 0; --t) {
    const IterationTrace& tr = tape.iterations[t];
    const DensityGrids grids = build_density_grids(layout, tr.x_prev, nullptr);
    std::vector<double> gx_prev(n, 0.0);
    std::vector<double> dtx(n, 0.0), drx(n, 0.0);
    double ddcs_max = 0.0, ddcs_min = 0.0;

    for (int i = 0; i < n; ++i) {
      if (!tr.mask[i]) {
        gx_prev[i] += gx[i];  // retention path
        continue;
      }
      const double dout = gx[i];
      if (dout == 0.0) continue;

      // fully connected stage, reverse
      const double out = tr.fc_out[i];
      const double dz3 = dout * out * (1.0 - out);
      grads.b3[0] += dz3;
      const std::vector<double>& z1 = tr.z1[i];
      const std::vector<double>& z2 = tr.z2[i];
      for (int u = 0; u < h2; ++u) {
        const double a2u = std::max(0.0, z2[u]);
        grads.w3[u] += dz3 * a2u;
        da2[u] = dz3 * weights.w3[u];
        dz2[u] = (z2[u] > 0.0) ? da2[u] : 0.0;
        grads.b2[u] += dz2[u];
      }
      std::fill(da1.begin(), da1.end(), 0.0);
      for (int u = 0; u < h2; ++u) {
        if (dz2[u] == 0.0) continue;
        const size_t row = static_cast<size_t>(u) * h1;
        for (int k = 0; k < h1; ++k) {
          grads.w2[row + k] += dz2[u] * std::max(0.0, z1[k]);
          da1[k] += weights.w2[row + k] * dz2[u];
        }
      }
      std::array<double, 6> dfeat{};
      for (int u = 0; u < h1; ++u) {
        dz1[u] = (z1[u] > 0.0) ? da1[u] : 0.0;
        if (dz1[u] == 0.0) continue;
        grads.b1[u] += dz1[u];
        const size_t row = static_cast<size_t>(u) * 6;
        for (int k = 0; k < 6; ++k) {
          grads.w1[row + k] += dz1[u] * tr.features[i][k];
          dfeat[k] += weights.w1[row + k] * dz1[u];
        }
      }

      dtx[i] = dfeat[0];
      drx[i] = dfeat[1];
      grads.filter[own_entry(i)] += dfeat[2];
      ddcs_max += dfeat[3];
      ddcs_min += dfeat[4];
      gx_prev[i] += dfeat[5];
    }

    // layout-wide extrema flow to the achieving links only (subgradient)
    grads.filter[own_entry(arg_max)] += ddcs_max;
    grads.filter[own_entry(arg_min)] += ddcs_min;

    // convolution stage, reverse: filter grads against the stored grids and
    // grid grads routed back to the previous activations
    Grid d_txgrid(m), d_rxgrid(m);
    for (int i = 0; i < n; ++i) {
      const Link& lk = layout.links[i];
      const int ds = lk.rx_cell.s - lk.tx_cell.s;
      const int dt = lk.rx_cell.t - lk.tx_cell.t;
      if (dtx[i] != 0.0) {
        for (int u = 1; u <= j_cells; ++u) {
          const int gs = lk.tx_cell.s + u - c;
          if (gs < 1 || gs > m) continue;
          for (int v = 1; v <= j_cells; ++v) {
            const int gt = lk.tx_cell.t + v - c;
            if (gt < 1 || gt > m) continue;
            grads.filter[filter_flat(f, u, v)] += dtx[i] * grids.rx.at(gs, gt);
            d_rxgrid.at(gs, gt) += dtx[i] * f.at(u, v);
          }
        }
        if (f.in_support(ds, dt)) {
          grads.filter[filter_flat(f, c + ds, c + dt)] -= dtx[i] * tr.x_prev[i];
          gx_prev[i] -= dtx[i] * f.at(c + ds, c + dt);
        }
      }
      if (drx[i] != 0.0) {
        for (int u = 1; u <= j_cells; ++u) {
          const int gs = lk.rx_cell.s + u - c;
          if (gs < 1 || gs > m) continue;
          for (int v = 1; v <= j_cells; ++v) {
            const int gt = lk.rx_cell.t + v - c;
            if (gt < 1 || gt > m) continue;
            grads.filter[filter_flat(f, u, v)] += drx[i] * grids.tx.at(gs, gt);
            d_txgrid.at(gs, gt) += drx[i] * f.at(u, v);
          }
        }
        if (f.in_support(-ds, -dt)) {
          grads.filter[filter_flat(f, c - ds, c - dt)] -= drx[i] * tr.x_prev[i];
          gx_prev[i] -= drx[i] * f.at(c - ds, c - dt);
        }
      }
    }
    for (int j = 0; j < n; ++j) {
      const Link& lk = layout.links[j];
      gx_prev[j] += d_rxgrid.at(lk.rx_cell.s, lk.rx_cell.t);
      gx_prev[j] += d_txgrid.at(lk.tx_cell.s, lk.tx_cell.t);
    }
    gx = std::move(gx_prev);
  }

  if (dx_init) *dx_init = gx;
  return grads;
}

FiniteDiffReport finite_difference_check(const Layout& layout, const ChannelMatrix& g,
                                         const ChannelParams& params, ModelWeights& weights,
                                         int unroll, int samples, double step, Rng& rng) {
  if (!(step >= 1e-6 && step <= 1e-2)) throw std::invalid_argument("step outside [1e-6, 1e-2]");
  const auto masks = draw_masks(unroll, layout.size(), 0.5, rng);

  UnrollTape tape;
  training_forward(layout, g, params, weights, masks, &tape);
  const ModelGradients grads = training_backward(layout, tape, g, params, weights);

  const size_t count = param_count(weights);
  const double floor = 1e-6 * std::max(grads.max_abs(), 1e-30);
  FiniteDiffReport report;
  report.samples = samples;

  std::vector<uint8_t> used(count, 0);
  for (int s = 0; s < samples; ++s) {
    size_t idx = rng.uniform_index(count);
    while (used[idx]) idx = rng.uniform_index(count);
    used[idx] = 1;

    const double saved = get_param(weights, idx);
    set_param(weights, idx, saved + step);
    const double f_plus = training_forward(layout, g, params, weights, masks, nullptr);
    set_param(weights, idx, saved - step);
    const double f_minus = training_forward(layout, g, params, weights, masks, nullptr);
    set_param(weights, idx, saved);

    const double numeric = (f_plus - f_minus) / (2.0 * step);
    const double analytic = grads.get(idx);
    const double rel =
        std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_param = idx;
    }
  }
  return report;
}

void adam_step(ModelWeights& weights, const ModelGradients& grads, AdamState& state, double lr) {
  auto wb = param_blocks(weights);
  auto gb = grads.blocks();
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  size_t off = 0;
  for (int b = 0; b < 7; ++b) {
    auto& wv = *wb[b];
    const auto& gv = *gb[b];
    for (size_t i = 0; i < wv.size(); ++i, ++off) {
      state.m[off] = state.beta1 * state.m[off] + (1.0 - state.beta1) * gv[i];
      state.v[off] = state.beta2 * state.v[off] + (1.0 - state.beta2) * gv[i] * gv[i];
      wv[i] -= lr * (state.m[off] / bc1) / (std::sqrt(state.v[off] / bc2) + state.eps);
    }
  }
}

void save_optimizer_state(const ModelWeights& weights, const AdamState& state,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open optimizer state for writing: " + path);
  out << "d2dsched-adam v1\n";
  out << "t " << state.t << "\n";
  out << "beta1 " << state.beta1 << " beta2 " << state.beta2 << " eps " << state.eps << "\n";
  out << "params " << state.m.size() << "\n";
  char buf[40];
  auto dump = [&](const double* v, size_t count) {
    for (size_t i = 0; i < count; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
      out << buf << (((i + 1) % 8 == 0 || i + 1 == count) ? '\n' : ' ');
    }
  };
  dump(state.m.data(), state.m.size());
  dump(state.v.data(), state.v.size());
  for (const auto* block : param_blocks(weights)) dump(block->data(), block->size());
}

AdamState load_optimizer_state(const std::string& path, ModelWeights& weights) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open optimizer state: " + path);
  std::string tag, version, key;
  if (!(in >> tag >> version) || tag != "d2dsched-adam")
    throw std::runtime_error("not an optimizer state file");
  AdamState st;
  size_t count = 0;
  if (!(in >> key >> st.t) || key != "t") throw std::runtime_error("optimizer state missing t");
  if (!(in >> key >> st.beta1 >> key >> st.beta2 >> key >> st.eps))
    throw std::runtime_error("optimizer state missing betas");
  if (!(in >> key >> count) || key != "params")
    throw std::runtime_error("optimizer state missing params");
  if (count != param_count(weights))
    throw std::runtime_error("optimizer state does not match the model shape");
  st.m.resize(count);
  st.v.resize(count);
  for (auto* v : {&st.m, &st.v})
    for (size_t i = 0; i < count; ++i)
      if (!(in >> (*v)[i])) throw std::runtime_error("optimizer state truncated");
  for (auto* block : param_blocks(weights))
    for (double& p : *block)
      if (!(in >> p)) throw std::runtime_error("optimizer state missing parameter image");
  return st;
}

long TrainConfig::total_batches() const {
  return (total_layouts + batch_layouts - 1) / batch_layouts;
}

void TrainConfig::validate() const {
  if (total_layouts < 1 || batch_layouts < 1) throw std::invalid_argument("layout counts must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (unroll_min < 1 || unroll_max > 50 || unroll_min > unroll_max)
    throw std::invalid_argument("unroll range must lie within [1,50]");
  if (!(mix_prob >= 0.0 && mix_prob <= 1.0)) throw std::invalid_argument("mix_prob outside [0,1]");
  if (link_count < 1) throw std::invalid_argument("link_count must be positive");
  if (eval_layouts < 1) throw std::invalid_argument("eval_layouts must be positive");
  if (resume_batch < 0) throw std::invalid_argument("resume_batch must be nonnegative");
}

namespace {

std::string checkpoint_path(const std::string& dir, long batch, const char* kind) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "/%s_b%06ld.txt", kind, batch);
  return dir + buf;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::function<void(const TrainLogRow&)>& on_log) {
  cfg.validate();
  const ChannelParams params;  // training channels carry no fading

  ModelWeights model;
  AdamState adam;
  long start_batch = 0;
  if (!cfg.resume_dir.empty()) {
    model = load_model(checkpoint_path(cfg.resume_dir, cfg.resume_batch, "model"));
    adam = load_optimizer_state(checkpoint_path(cfg.resume_dir, cfg.resume_batch, "adam"), model);
    start_batch = cfg.resume_batch;
  } else {
    Rng init_rng(derive_seed(cfg.seed, kStreamInit));
    model = init_model(cfg.filter_cells, cfg.cell_edge_m, cfg.layer_sizes, init_rng);
    adam = AdamState(param_count(model));
  }

  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);

  // held-out evaluation mini-set with cached FP reference rates
  std::vector<Layout> eval_layouts;
  std::vector<ChannelMatrix> eval_channels;
  double eval_fp_mean = 0.0;
  {
    LayoutConfig lc;
    lc.region_edge_m = cfg.region_edge_m;
    lc.cell_edge_m = cfg.cell_edge_m;
    lc.link_count = cfg.link_count;
    lc.dmin_m = cfg.eval_dmin_m;
    lc.dmax_m = cfg.eval_dmax_m;
    for (int k = 0; k < cfg.eval_layouts; ++k) {
      Rng lrng(derive_seed(cfg.seed, kStreamEvalLayout + k));
      lc.seed = derive_seed(cfg.seed, kStreamEvalLayout + k);
      eval_layouts.push_back(generate_layout(lc, lrng));
      Rng crng(0);
      eval_channels.push_back(build_channel_matrix(eval_layouts.back(), params, crng));
    }
    const std::vector<double> ones(cfg.link_count, 1.0);
    double total = 0.0;
    for (int k = 0; k < cfg.eval_layouts; ++k) {
      const FpResult fp = fp_schedule(eval_channels[k], params, ones);
      total += sum_rate(fp.schedule, eval_channels[k], params);
    }
    eval_fp_mean = total / cfg.eval_layouts;
  }

  auto eval_ratio_pct = [&](const ModelWeights& m) {
    double total = 0.0;
    std::vector<double> rates(cfg.eval_layouts, 0.0);
    parallel_for(cfg.eval_layouts, cfg.workers, [&](int k) {
      Rng srng(derive_seed(cfg.seed, kStreamEvalSchedule + k));
      const FeedbackResult r = feedback_schedule(eval_layouts[k], m, FeedbackOptions{}, srng);
      rates[k] = sum_rate(r.schedule, eval_channels[k], params);
    });
    for (double r : rates) total += r;
    return 100.0 * (total / cfg.eval_layouts) / eval_fp_mean;
  };

  TrainResult result;
  ModelWeights last_good = model;
  const long batches = cfg.total_batches();
  const int bsize = cfg.batch_layouts;

  LayoutConfig train_lc;
  train_lc.region_edge_m = cfg.region_edge_m;
  train_lc.cell_edge_m = cfg.cell_edge_m;
  train_lc.link_count = cfg.link_count;

  std::vector<double> losses(bsize, 0.0);
  std::vector<ModelGradients> grads(bsize);

  for (long b = start_batch; b < batches; ++b) {
    Rng batch_rng(derive_seed(cfg.seed, kStreamBatch + static_cast<uint64_t>(b)));
    const int unroll =
        cfg.unroll_min + static_cast<int>(batch_rng.uniform_index(cfg.unroll_max - cfg.unroll_min + 1));
    const long base_index = b * bsize;

    parallel_for(bsize, cfg.workers, [&](int j) {
      const uint64_t li = static_cast<uint64_t>(base_index + j);
      Rng lrng(derive_seed(cfg.seed, kStreamLayout + li));
      LayoutConfig lc = train_lc;
      const auto [dmin, dmax] = sample_training_bounds(lrng);
      lc.dmin_m = dmin;
      lc.dmax_m = dmax;
      lc.seed = derive_seed(cfg.seed, kStreamLayout + li);
      const Layout layout = generate_layout(lc, lrng);
      Rng crng(0);
      const ChannelMatrix g = build_channel_matrix(layout, params, crng);
      Rng mrng(derive_seed(cfg.seed, kStreamMask + li));
      const auto masks = draw_masks(unroll, layout.size(), cfg.mix_prob, mrng);
      UnrollTape tape;
      losses[j] = training_forward(layout, g, params, model, masks, &tape);
      grads[j] = training_backward(layout, tape, g, params, model);
    });

    ModelGradients mean_grad(model);
    double mean_loss = 0.0;
    for (int j = 0; j < bsize; ++j) {
      mean_grad.add(grads[j]);
      mean_loss += losses[j];
    }
    mean_grad.scale(1.0 / bsize);
    mean_loss /= bsize;

    if (!std::isfinite(mean_loss) || !mean_grad.finite()) {
      result.diverged = true;
      model = last_good;
      break;
    }

    double lr = cfg.learning_rate;
    if (cfg.lr_min > 0.0 && cfg.lr_min < cfg.learning_rate) {
      const double phase = static_cast<double>(b) / static_cast<double>(batches);
      lr = cfg.lr_min + 0.5 * (cfg.learning_rate - cfg.lr_min) * (1.0 + std::cos(M_PI * phase));
    }
    adam_step(model, mean_grad, adam, lr);
    result.layouts_seen = (b + 1) * static_cast<long>(bsize);

    const bool last = (b + 1 == batches);
    TrainLogRow row;
    row.batch = b + 1;
    row.layouts_seen = result.layouts_seen;
    row.loss_mbps = mean_loss / 1e6;
    if ((cfg.eval_every_batches > 0 && (b + 1) % cfg.eval_every_batches == 0) || last)
      row.eval_ratio_pct = eval_ratio_pct(model);
    result.log.push_back(row);
    if (on_log) on_log(row);

    if (!cfg.output_dir.empty() && cfg.checkpoint_every_batches > 0 &&
        ((b + 1) % cfg.checkpoint_every_batches == 0 || last)) {
      save_model(model, checkpoint_path(cfg.output_dir, b + 1, "model"));
      save_optimizer_state(model, adam, checkpoint_path(cfg.output_dir, b + 1, "adam"));
      last_good = model;
    }
  }

  result.model = model;
  if (!cfg.output_dir.empty()) {
    save_model(result.model, cfg.output_dir + "/model_final.txt");
    std::ofstream log(cfg.output_dir + "/train_log.csv");
    log << "batch,layouts_seen,loss_mbps,eval_ratio_pct\n";
    for (const TrainLogRow& row : result.log)
      log << row.batch << ',' << row.layouts_seen << ',' << row.loss_mbps << ','
          << row.eval_ratio_pct << '\n';
  }
  return result;
}

}  // namespace d2d
