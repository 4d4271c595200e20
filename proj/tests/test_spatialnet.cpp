#include <doctest.h>
#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "d2dsched/spatialnet.hpp"

using namespace d2d;

namespace {

Layout random_layout(int n, uint64_t seed, double dmin = 2.0, double dmax = 65.0) {
  LayoutConfig cfg;
  cfg.link_count = n;
  cfg.dmin_m = dmin;
  cfg.dmax_m = dmax;
  cfg.seed = seed;
  Rng rng(seed);
  return generate_layout(cfg, rng);
}

ModelWeights random_model(uint64_t seed, int filter_cells = 63) {
  Rng rng(seed);
  return init_model(filter_cells, 5.0, {6, 30, 30, 1}, rng);
}

ModelWeights zero_model(int filter_cells = 63) {
  ModelWeights m = random_model(1, filter_cells);
  for (auto* block : {&m.filter.w, &m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3})
    std::fill(block->begin(), block->end(), 0.0);
  return m;
}

Layout hand_layout(const std::vector<std::pair<Point, Point>>& pairs, double region = 500.0,
                   double cell = 5.0) {
  LayoutConfig cfg;
  cfg.region_edge_m = region;
  cfg.cell_edge_m = cell;
  cfg.link_count = static_cast<int>(pairs.size());
  cfg.dmin_m = 1.0;
  cfg.dmax_m = region * 0.9;
  Layout layout;
  layout.config = cfg;
  for (const auto& [tx, rx] : pairs) {
    Link link;
    link.tx = tx;
    link.rx = rx;
    link.tx_cell = cell_index(tx, cell, region);
    link.rx_cell = cell_index(rx, cell, region);
    layout.links.push_back(link);
  }
  return layout;
}

}  // namespace

TEST_CASE("spatialnet: density grids count activations") {
  // two transmitters in one cell, receivers in distinct cells
  const Layout layout = hand_layout({{{11.0, 11.0}, {31.0, 11.0}},
                                     {{12.0, 12.0}, {41.0, 41.0}},
                                     {{101.0, 101.0}, {121.0, 101.0}}});
  const std::vector<double> ones(3, 1.0);
  DensityGrids grids = build_density_grids(layout, ones);
  CHECK(grids.tx.at(3, 3) == doctest::Approx(2.0));
  CHECK(grids.rx.at(7, 3) == doctest::Approx(1.0));
  CHECK(grids.tx.sum() == doctest::Approx(3.0));
  CHECK(grids.rx.sum() == doctest::Approx(3.0));

  // all-zero activations zero both grids
  const std::vector<double> zeros(3, 0.0);
  DensityGrids empty = build_density_grids(layout, zeros);
  CHECK(empty.tx.sum() == 0.0);
  CHECK(empty.rx.sum() == 0.0);

  // relaxed activations enter linearly
  DensityGrids half = build_density_grids(layout, {0.5, 0.0, 0.0});
  CHECK(half.tx.at(3, 3) == doctest::Approx(0.5));
}

TEST_CASE("spatialnet: grid mass conservation") {
  const Layout layout = random_layout(50, 7);
  Rng rng(3);
  std::vector<double> x(50);
  for (double& v : x) v = rng.uniform01();
  const DensityGrids grids = build_density_grids(layout, x);
  const double mass = std::accumulate(x.begin(), x.end(), 0.0);
  CHECK(grids.tx.sum() == doctest::Approx(mass).epsilon(1e-12));
  CHECK(grids.rx.sum() == doctest::Approx(mass).epsilon(1e-12));
}

TEST_CASE("spatialnet: conv_at identity, padding, and naive oracle") {
  // delta filter reproduces the grid
  Grid grid(5);
  for (int s = 1; s <= 5; ++s)
    for (int t = 1; t <= 5; ++t) grid.at(s, t) = 1.0;
  Filter delta(3);
  delta.at(2, 2) = 1.0;
  CHECK(conv_at(grid, delta, 3, 3) == doctest::Approx(1.0));

  // corner cell with a uniform filter only sees the in-bounds quadrant
  Filter uniform(3);
  std::fill(uniform.w.begin(), uniform.w.end(), 1.0);
  CHECK(conv_at(grid, uniform, 1, 1) == doctest::Approx(4.0));
  CHECK(conv_at(grid, uniform, 3, 3) == doctest::Approx(9.0));

  // random grid and filter against an independent double-loop oracle
  Rng rng(11);
  Grid g2(5);
  Filter f2(3);
  for (double& v : f2.w) v = rng.uniform(-1.0, 1.0);
  for (int s = 1; s <= 5; ++s)
    for (int t = 1; t <= 5; ++t) g2.at(s, t) = rng.uniform(-1.0, 1.0);
  for (int s = 1; s <= 5; ++s) {
    for (int t = 1; t <= 5; ++t) {
      double expected = 0.0;
      for (int du = -1; du <= 1; ++du)
        for (int dv = -1; dv <= 1; ++dv) {
          const int gs = s + du, gt = t + dv;
          if (gs < 1 || gs > 5 || gt < 1 || gt > 5) continue;
          expected += f2.at(2 + du, 2 + dv) * g2.at(gs, gt);
        }
      CHECK(conv_at(g2, f2, s, t) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("spatialnet: convolution is linear in the grid") {
  Rng rng(13);
  Grid a(7), b(7);
  Filter f(5);
  for (double& v : f.w) v = rng.uniform(-1.0, 1.0);
  for (int s = 1; s <= 7; ++s)
    for (int t = 1; t <= 7; ++t) {
      a.at(s, t) = rng.uniform(0.0, 2.0);
      b.at(s, t) = rng.uniform(0.0, 2.0);
    }
  Grid combo(7);
  const double scale = 2.75;
  for (int s = 1; s <= 7; ++s)
    for (int t = 1; t <= 7; ++t) combo.at(s, t) = scale * a.at(s, t) + b.at(s, t);
  for (int s = 1; s <= 7; ++s)
    for (int t = 1; t <= 7; ++t)
      CHECK(conv_at(combo, f, s, t) ==
            doctest::Approx(scale * conv_at(a, f, s, t) + conv_at(b, f, s, t)).epsilon(1e-12));
}

TEST_CASE("spatialnet: self-exclusion zeroes a lone link's features") {
  const Layout layout = random_layout(1, 19);
  const ModelWeights model = random_model(2);
  const std::vector<double> ones(1, 1.0);
  const DensityGrids grids = build_density_grids(layout, ones);
  const auto [tx_int, rx_int] = link_interference_features(layout, grids, model.filter, ones, 0);
  CHECK(tx_int == doctest::Approx(0.0));
  CHECK(rx_int == doctest::Approx(0.0));
}

TEST_CASE("spatialnet: deactivated counterpart zeroes features") {
  const Layout layout = random_layout(2, 23);
  const ModelWeights model = random_model(3);
  const std::vector<double> x = {1.0, 0.0};
  const DensityGrids grids = build_density_grids(layout, x);
  const auto [tx_int, rx_int] = link_interference_features(layout, grids, model.filter, x, 0);
  CHECK(tx_int == doctest::Approx(0.0));
  CHECK(rx_int == doctest::Approx(0.0));
}

TEST_CASE("spatialnet: three-link all-ones filter counts neighbours") {
  // links well inside the region, all within one filter window
  const Layout layout = hand_layout({{{250.0, 250.0}, {260.0, 250.0}},
                                     {{270.0, 250.0}, {280.0, 250.0}},
                                     {{250.0, 270.0}, {260.0, 270.0}}});
  ModelWeights model = zero_model(63);
  std::fill(model.filter.w.begin(), model.filter.w.end(), 1.0);
  const std::vector<double> x = {1.0, 0.5, 0.25};
  const DensityGrids grids = build_density_grids(layout, x);
  // TxINT_i: active receiver mass in the window minus the link's own rx
  for (int i = 0; i < 3; ++i) {
    const auto [tx_int, rx_int] = link_interference_features(layout, grids, model.filter, x, i);
    const double total = x[0] + x[1] + x[2];
    CHECK(tx_int == doctest::Approx(total - x[i]).epsilon(1e-12));
    CHECK(rx_int == doctest::Approx(total - x[i]).epsilon(1e-12));
  }
}

TEST_CASE("spatialnet: features independent of the link's own activation") {
  const Layout layout = random_layout(10, 29);
  const ModelWeights model = random_model(5);
  std::vector<double> x(10, 1.0);
  const DensityGrids g1 = build_density_grids(layout, x);
  const auto f1 = link_interference_features(layout, g1, model.filter, x, 4);
  x[4] = 0.13;
  const DensityGrids g2 = build_density_grids(layout, x);
  const auto f2 = link_interference_features(layout, g2, model.filter, x, 4);
  CHECK(f1.first == doctest::Approx(f2.first).epsilon(1e-12));
  CHECK(f1.second == doctest::Approx(f2.second).epsilon(1e-12));
}

TEST_CASE("spatialnet: direct channel strength reads the offset entry") {
  const Layout layout = hand_layout({{{250.0, 250.0}, {252.0, 251.0}}});
  ModelWeights model = random_model(7);
  // same cell: centre value
  CHECK(direct_channel_strength(model.filter, layout, 0) ==
        doctest::Approx(model.filter.at(32, 32)));

  // offset by (+2, -1) cells reads the mirrored entries distinctly
  const Layout shifted = hand_layout({{{250.0, 250.0}, {261.0, 247.0}}});
  CHECK(direct_channel_strength(model.filter, shifted, 0) ==
        doctest::Approx(model.filter.at(32 + 2, 32 - 1)));
  const Layout mirrored = hand_layout({{{261.0, 247.0}, {250.0, 250.0}}});
  CHECK(direct_channel_strength(model.filter, mirrored, 0) ==
        doctest::Approx(model.filter.at(32 - 2, 32 + 1)));

  // paper-scale support: J=63, 5 m cells covers every dmax <= 70 m setting
  ModelWeights big = random_model(8);
  const Layout far_pair = hand_layout({{{250.0, 250.0}, {250.0 + 69.0, 250.0}}});
  CHECK_NOTHROW(direct_channel_strength(big.filter, far_pair, 0));

  // beyond the support is a domain error
  ModelWeights tiny = random_model(9, 5);
  CHECK_THROWS_AS(direct_channel_strength(tiny.filter, far_pair, 0), std::domain_error);
}

TEST_CASE("spatialnet: fc_forward zero model and range") {
  const ModelWeights zeros = zero_model();
  CHECK(fc_forward({0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, zeros) == doctest::Approx(0.5));
  CHECK(fc_forward({5.0, -3.0, 1.0, 2.0, 0.5, 1.0}, zeros) == doctest::Approx(0.5));

  const ModelWeights model = random_model(31);
  Rng rng(37);
  for (int rep = 0; rep < 200; ++rep) {
    std::array<double, 6> feat;
    for (double& f : feat) f = rng.uniform(-10.0, 10.0);
    const double out = fc_forward(feat, model);
    CHECK(out > 0.0);
    CHECK(out < 1.0);
  }
}

TEST_CASE("spatialnet: fc_forward matches straight-line recomputation") {
  const ModelWeights m = random_model(41);
  const std::array<double, 6> feat = {0.3, -1.2, 0.05, 0.08, 0.01, 0.7};

  std::vector<double> a1(30), a2(30);
  for (int u = 0; u < 30; ++u) {
    double z = m.b1[u];
    for (int k = 0; k < 6; ++k) z += m.w1[u * 6 + k] * feat[k];
    a1[u] = z > 0.0 ? z : 0.0;
  }
  for (int u = 0; u < 30; ++u) {
    double z = m.b2[u];
    for (int k = 0; k < 30; ++k) z += m.w2[u * 30 + k] * a1[k];
    a2[u] = z > 0.0 ? z : 0.0;
  }
  double z3 = m.b3[0];
  for (int k = 0; k < 30; ++k) z3 += m.w3[k] * a2[k];
  const double expected = 1.0 / (1.0 + std::exp(-z3));
  CHECK(fc_forward(feat, m) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("spatialnet: mixing contract at the extremes") {
  const Layout layout = random_layout(20, 43);
  const ModelWeights model = random_model(47);

  // mix_prob = 0: the all-ones start never changes
  FeedbackOptions frozen;
  frozen.mix_prob = 0.0;
  frozen.iterations = 5;
  Rng r1(1);
  const FeedbackResult kept = feedback_schedule(layout, model, frozen, r1);
  for (double v : kept.x_relaxed) CHECK(v == 1.0);
  CHECK(kept.schedule.active_count() == 20);

  // mix_prob = 1: pure Jacobi update, independent of the rng draw
  FeedbackOptions jacobi;
  jacobi.mix_prob = 1.0;
  jacobi.iterations = 5;
  Rng r2(2), r3(999);
  const FeedbackResult a = feedback_schedule(layout, model, jacobi, r2);
  const FeedbackResult b = feedback_schedule(layout, model, jacobi, r3);
  for (int i = 0; i < 20; ++i) CHECK(a.x_relaxed[i] == b.x_relaxed[i]);
}

TEST_CASE("spatialnet: permutation equivariance of the forward pass") {
  const int n = 12;
  const Layout layout = random_layout(n, 53);
  const ModelWeights model = random_model(59);
  std::vector<double> x(n);
  Rng rng(61);
  for (double& v : x) v = rng.uniform01();

  const std::vector<double> out = forward_pass(layout, model, x, nullptr, nullptr);

  // reversed link order
  Layout permuted = layout;
  std::reverse(permuted.links.begin(), permuted.links.end());
  std::vector<double> x_perm(x.rbegin(), x.rend());
  const std::vector<double> out_perm = forward_pass(permuted, model, x_perm, nullptr, nullptr);
  for (int i = 0; i < n; ++i)
    CHECK(out[i] == doctest::Approx(out_perm[n - 1 - i]).epsilon(1e-12));
}

TEST_CASE("spatialnet: subset masking excludes links entirely") {
  const Layout layout = random_layout(8, 67);
  const ModelWeights model = random_model(71);
  std::vector<uint8_t> active(8, 1);
  active[2] = 0;
  active[5] = 0;

  FeedbackOptions opt;
  opt.iterations = 4;
  Rng rng(5);
  const FeedbackResult res = feedback_schedule(layout, model, opt, rng, &active);
  CHECK(res.schedule.x[2] == 0.0);
  CHECK(res.schedule.x[5] == 0.0);
  CHECK(res.x_relaxed[2] == 0.0);

  // grids ignore masked links
  std::vector<double> ones(8, 1.0);
  const DensityGrids grids = build_density_grids(layout, ones, &active);
  CHECK(grids.tx.sum() == doctest::Approx(6.0));
}

TEST_CASE("spatialnet: checkpoint round trip") {
  const ModelWeights model = random_model(73);
  const std::string text = model_to_string(model);
  const ModelWeights loaded = model_from_string(text);
  CHECK(loaded.filter.cells == model.filter.cells);
  CHECK(loaded.cell_edge_m == model.cell_edge_m);
  for (size_t i = 0; i < model.filter.w.size(); ++i)
    CHECK(loaded.filter.w[i] == doctest::Approx(model.filter.w[i]).epsilon(1e-8));
  for (size_t i = 0; i < model.w2.size(); ++i)
    CHECK(loaded.w2[i] == doctest::Approx(model.w2[i]).epsilon(1e-8));

  // schedules agree between original and reloaded weights
  const Layout layout = random_layout(15, 79);
  FeedbackOptions opt;
  Rng r1(3), r2(3);
  const FeedbackResult a = feedback_schedule(layout, model, opt, r1);
  const FeedbackResult b = feedback_schedule(layout, loaded, opt, r2);
  CHECK(a.schedule.x == b.schedule.x);

  CHECK_THROWS_AS(model_from_string("garbage"), std::runtime_error);
}

TEST_CASE("spatialnet: radial decay diagnostic on a synthetic filter") {
  Filter f(63);
  const int c = f.centre();
  for (int u = 1; u <= 63; ++u)
    for (int v = 1; v <= 63; ++v)
      f.at(u, v) = std::exp(-0.1 * std::hypot(u - c, v - c));
  CHECK(filter_radial_decay_correlation(f) < -0.5);

  Filter flat(63);
  std::fill(flat.w.begin(), flat.w.end(), 1.0);
  CHECK(filter_radial_decay_correlation(flat) == doctest::Approx(0.0));
}
