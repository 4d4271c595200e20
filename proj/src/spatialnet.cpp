#include "d2dsched/spatialnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace d2d {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void write_block(std::ostream& out, const std::vector<double>& v, int per_line) {
  char buf[32];
  for (size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g", v[i]);
    out << buf;
    out << (((i + 1) % per_line == 0 || i + 1 == v.size()) ? '\n' : ' ');
  }
}

void read_block(std::istream& in, std::vector<double>& v, size_t count, const char* what) {
  v.resize(count);
  for (size_t i = 0; i < count; ++i) {
    if (!(in >> v[i])) throw std::runtime_error(std::string("model file truncated in ") + what);
  }
}

}  // namespace

double Grid::sum() const { return std::accumulate(v_.begin(), v_.end(), 0.0); }

void ModelWeights::validate() const {
  if (filter.cells < 1 || filter.cells % 2 == 0)
    throw std::invalid_argument("filter size must be odd and positive");
  if (filter.w.size() != static_cast<size_t>(filter.cells) * filter.cells)
    throw std::invalid_argument("filter entry count mismatch");
  if (layer_sizes.size() != 4 || layer_sizes[0] != 6 || layer_sizes[3] != 1)
    throw std::invalid_argument("layer sizes must be {6, h1, h2, 1}");
  const size_t h0 = layer_sizes[0], h1 = layer_sizes[1], h2 = layer_sizes[2];
  if (w1.size() != h1 * h0 || b1.size() != h1 || w2.size() != h2 * h1 || b2.size() != h2 ||
      w3.size() != h2 || b3.size() != 1)
    throw std::invalid_argument("fully connected parameter shape mismatch");
  for (double v : filter.w)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite filter entry");
  for (const auto* block : {&w1, &b1, &w2, &b2, &w3, &b3})
    for (double v : *block)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite layer parameter");
}

ModelWeights init_model(int filter_cells, double cell_edge_m, const std::vector<int>& layer_sizes,
                        Rng& rng) {
  ModelWeights m;
  m.cell_edge_m = cell_edge_m;
  m.filter = Filter(filter_cells);
  m.layer_sizes = layer_sizes;
  for (double& v : m.filter.w) v = 1e-2 * rng.uniform01();

  const int h0 = layer_sizes[0], h1 = layer_sizes[1], h2 = layer_sizes[2];
  auto fill = [&rng](std::vector<double>& v, size_t count, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    v.resize(count);
    for (double& x : v) x = rng.uniform(-bound, bound);
  };
  fill(m.w1, static_cast<size_t>(h1) * h0, h0);
  fill(m.b1, h1, h0);
  fill(m.w2, static_cast<size_t>(h2) * h1, h1);
  fill(m.b2, h2, h1);
  fill(m.w3, h2, h2);
  fill(m.b3, 1, h2);
  m.validate();
  return m;
}

DensityGrids build_density_grids(const Layout& layout, const std::vector<double>& x,
                                 const std::vector<uint8_t>* active) {
  if (static_cast<int>(x.size()) != layout.size())
    throw std::invalid_argument("activation vector size mismatch");
  const int m = layout.config.grid_cells();
  DensityGrids grids{Grid(m), Grid(m)};
  for (int i = 0; i < layout.size(); ++i) {
    if (active && !(*active)[i]) continue;
    const Link& link = layout.links[i];
    grids.tx.at(link.tx_cell.s, link.tx_cell.t) += x[i];
    grids.rx.at(link.rx_cell.s, link.rx_cell.t) += x[i];
  }
  return grids;
}

double conv_at(const Grid& grid, const Filter& filter, int s, int t) {
  if (filter.cells % 2 == 0) throw std::invalid_argument("filter must be odd-sized");
  const int c = filter.centre();
  double acc = 0.0;
  for (int u = 1; u <= filter.cells; ++u) {
    const int gs = s + u - c;
    if (gs < 1 || gs > grid.cells()) continue;
    for (int v = 1; v <= filter.cells; ++v) {
      const int gt = t + v - c;
      if (gt < 1 || gt > grid.cells()) continue;
      acc += filter.at(u, v) * grid.at(gs, gt);
    }
  }
  return acc;
}

std::pair<double, double> link_interference_features(const Layout& layout,
                                                     const DensityGrids& grids,
                                                     const Filter& filter,
                                                     const std::vector<double>& x, int i) {
  const Link& link = layout.links[i];
  const int c = filter.centre();
  const int ds = link.rx_cell.s - link.tx_cell.s;
  const int dt = link.rx_cell.t - link.tx_cell.t;

  double tx_int = conv_at(grids.rx, filter, link.tx_cell.s, link.tx_cell.t);
  double rx_int = conv_at(grids.tx, filter, link.rx_cell.s, link.rx_cell.t);
  // exclude the link's own pair from both neighbourhood sums
  if (filter.in_support(ds, dt)) tx_int -= x[i] * filter.at(c + ds, c + dt);
  if (filter.in_support(-ds, -dt)) rx_int -= x[i] * filter.at(c - ds, c - dt);
  return {tx_int, rx_int};
}

double direct_channel_strength(const Filter& filter, const Layout& layout, int i) {
  const Link& link = layout.links[i];
  const int ds = link.rx_cell.s - link.tx_cell.s;
  const int dt = link.rx_cell.t - link.tx_cell.t;
  if (!filter.in_support(ds, dt))
    throw std::domain_error("tx-rx cell offset outside filter support; layout incompatible");
  const int c = filter.centre();
  return filter.at(c + ds, c + dt);
}

double fc_forward(const std::array<double, 6>& features, const ModelWeights& weights) {
  const int h1 = weights.hidden1(), h2 = weights.hidden2();
  std::vector<double> a1(h1), a2(h2);
  for (int u = 0; u < h1; ++u) {
    double z = weights.b1[u];
    for (int k = 0; k < 6; ++k) z += weights.w1[static_cast<size_t>(u) * 6 + k] * features[k];
    a1[u] = std::max(0.0, z);
  }
  for (int u = 0; u < h2; ++u) {
    double z = weights.b2[u];
    for (int k = 0; k < h1; ++k) z += weights.w2[static_cast<size_t>(u) * h1 + k] * a1[k];
    a2[u] = std::max(0.0, z);
  }
  double z = weights.b3[0];
  for (int k = 0; k < h2; ++k) z += weights.w3[k] * a2[k];
  return sigmoid(z);
}

std::vector<double> forward_pass(const Layout& layout, const ModelWeights& weights,
                                 const std::vector<double>& x_prev,
                                 const std::vector<uint8_t>* active, IterationTrace* trace) {
  const int n = layout.size();
  const int h1 = weights.hidden1(), h2 = weights.hidden2();
  const DensityGrids grids = build_density_grids(layout, x_prev, active);

  // direct channel strengths and their layout-wide range over active links
  std::vector<double> dcs(n, 0.0);
  double dcs_max = -std::numeric_limits<double>::infinity();
  double dcs_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (active && !(*active)[i]) continue;
    dcs[i] = direct_channel_strength(weights.filter, layout, i);
    dcs_max = std::max(dcs_max, dcs[i]);
    dcs_min = std::min(dcs_min, dcs[i]);
  }

  std::vector<double> out(n, 0.0);
  if (trace) {
    trace->x_prev = x_prev;
    trace->features.assign(n, {});
    trace->z1.assign(n, {});
    trace->z2.assign(n, {});
    trace->fc_out.assign(n, 0.0);
  }

  for (int i = 0; i < n; ++i) {
    if (active && !(*active)[i]) continue;
    const auto [tx_int, rx_int] = link_interference_features(layout, grids, weights.filter, x_prev, i);
    const std::array<double, 6> feat = {tx_int, rx_int, dcs[i], dcs_max, dcs_min, x_prev[i]};

    std::vector<double> z1(h1), a1(h1), z2(h2), a2(h2);
    for (int u = 0; u < h1; ++u) {
      double z = weights.b1[u];
      for (int k = 0; k < 6; ++k) z += weights.w1[static_cast<size_t>(u) * 6 + k] * feat[k];
      z1[u] = z;
      a1[u] = std::max(0.0, z);
    }
    for (int u = 0; u < h2; ++u) {
      double z = weights.b2[u];
      for (int k = 0; k < h1; ++k) z += weights.w2[static_cast<size_t>(u) * h1 + k] * a1[k];
      z2[u] = z;
      a2[u] = std::max(0.0, z);
    }
    double z3 = weights.b3[0];
    for (int k = 0; k < h2; ++k) z3 += weights.w3[k] * a2[k];
    out[i] = sigmoid(z3);

    if (trace) {
      trace->features[i] = feat;
      trace->z1[i] = std::move(z1);
      trace->z2[i] = std::move(z2);
      trace->fc_out[i] = out[i];
    }
  }
  return out;
}

FeedbackResult feedback_schedule(const Layout& layout, const ModelWeights& weights,
                                 const FeedbackOptions& options, Rng& rng,
                                 const std::vector<uint8_t>* active) {
  weights.validate();
  if (options.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  const int n = layout.size();

  std::vector<double> x(n, 1.0);
  if (active) {
    for (int i = 0; i < n; ++i)
      if (!(*active)[i]) x[i] = 0.0;
  }

  FeedbackResult res;
  for (int iter = 0; iter < options.iterations; ++iter) {
    const std::vector<double> out = forward_pass(layout, weights, x, active, nullptr);
    for (int i = 0; i < n; ++i) {
      if (active && !(*active)[i]) continue;
      if (rng.bernoulli(options.mix_prob)) x[i] = out[i];
    }
    if (options.record_trajectory) res.trajectory.push_back(x);
  }

  res.x_relaxed = x;
  res.schedule = Schedule::all_off(n);
  for (int i = 0; i < n; ++i)
    res.schedule.x[i] = (x[i] > options.quantize_threshold) ? 1.0 : 0.0;
  res.schedule.quantized = true;
  return res;
}

std::string model_to_string(const ModelWeights& weights) {
  weights.validate();
  std::ostringstream out;
  out << "d2dsched-model " << weights.version << "\n";
  out << "filter_cells " << weights.filter.cells << "\n";
  out << "cell_edge_m " << weights.cell_edge_m << "\n";
  out << "layers";
  for (int s : weights.layer_sizes) out << ' ' << s;
  out << "\nactivations relu relu sigmoid\n";
  write_block(out, weights.filter.w, weights.filter.cells);
  const int h0 = weights.layer_sizes[0], h1 = weights.hidden1(), h2 = weights.hidden2();
  write_block(out, weights.w1, h0);
  write_block(out, weights.b1, h1);
  write_block(out, weights.w2, h1);
  write_block(out, weights.b2, h2);
  write_block(out, weights.w3, h2);
  write_block(out, weights.b3, 1);
  return out.str();
}

ModelWeights model_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string tag, version;
  if (!(in >> tag >> version) || tag != "d2dsched-model")
    throw std::runtime_error("not a model checkpoint");

  ModelWeights m;
  m.version = version;
  std::string key;
  int filter_cells = 0;
  if (!(in >> key >> filter_cells) || key != "filter_cells")
    throw std::runtime_error("model header missing filter_cells");
  if (!(in >> key >> m.cell_edge_m) || key != "cell_edge_m")
    throw std::runtime_error("model header missing cell_edge_m");
  if (!(in >> key) || key != "layers") throw std::runtime_error("model header missing layers");
  m.layer_sizes.resize(4);
  for (int& s : m.layer_sizes)
    if (!(in >> s)) throw std::runtime_error("model header layers truncated");
  std::string act, a1, a2, a3;
  if (!(in >> act >> a1 >> a2 >> a3) || act != "activations" || a1 != "relu" || a2 != "relu" ||
      a3 != "sigmoid")
    throw std::runtime_error("unsupported activation set in model header");

  m.filter = Filter(filter_cells);
  read_block(in, m.filter.w, static_cast<size_t>(filter_cells) * filter_cells, "filter");
  const size_t h0 = m.layer_sizes[0], h1 = m.layer_sizes[1], h2 = m.layer_sizes[2];
  read_block(in, m.w1, h1 * h0, "w1");
  read_block(in, m.b1, h1, "b1");
  read_block(in, m.w2, h2 * h1, "w2");
  read_block(in, m.b2, h2, "b2");
  read_block(in, m.w3, h2, "w3");
  read_block(in, m.b3, 1, "b3");
  m.validate();
  return m;
}

void save_model(const ModelWeights& weights, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << model_to_string(weights);
}

ModelWeights load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_string(ss.str());
}

double filter_radial_decay_correlation(const Filter& filter) {
  // Spearman rank correlation between distance-from-centre and entry value
  const int j = filter.cells, c = filter.centre();
  const size_t count = filter.w.size();
  std::vector<double> radius(count), value(count);
  size_t idx = 0;
  for (int u = 1; u <= j; ++u) {
    for (int v = 1; v <= j; ++v, ++idx) {
      radius[idx] = std::hypot(u - c, v - c);
      value[idx] = filter.at(u, v);
    }
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    size_t i = 0;
    while (i < order.size()) {
      size_t k = i;
      while (k + 1 < order.size() && v[order[k + 1]] == v[order[i]]) ++k;
      const double mean_rank = 0.5 * (i + k);  // average rank over ties
      for (size_t t = i; t <= k; ++t) r[order[t]] = mean_rank;
      i = k + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(radius), rb = ranks(value);
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < count; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= count;
  mb /= count;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < count; ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace d2d
