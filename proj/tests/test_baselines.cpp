#include <doctest.h>
#include <stdexcept>

#include <cmath>

#include "d2dsched/baselines.hpp"
#include "d2dsched/fplinq.hpp"

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

ChannelMatrix channel_for(const Layout& layout) {
  ChannelParams p;
  Rng rng(0);
  return build_channel_matrix(layout, p, rng);
}

// two links sharing a cell, 2 m apart: mutual interference dominates
Layout colocated_pair() {
  LayoutConfig cfg;
  cfg.link_count = 2;
  cfg.dmin_m = 2.0;
  cfg.dmax_m = 3.0;
  Layout layout;
  layout.config = cfg;
  for (int i = 0; i < 2; ++i) {
    Link link;
    link.tx = {250.0 + i * 0.5, 250.0};
    link.rx = {252.0 + i * 0.5, 250.0};
    link.tx_cell = cell_index(link.tx, 5.0, 500.0);
    link.rx_cell = cell_index(link.rx, 5.0, 500.0);
    layout.links.push_back(link);
  }
  return layout;
}

}  // namespace

TEST_CASE("baselines: all_active") {
  CHECK(all_active(3).x == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(all_active(1).x == std::vector<double>{1.0});
  CHECK(all_active(10).active_count() == 10);
}

TEST_CASE("baselines: random_half reproducible with half mean") {
  Rng a(9), b(9);
  CHECK(random_half(50, a).x == random_half(50, b).x);

  Rng rng(10);
  long active = 0;
  const int reps = 2000, n = 50;
  for (int i = 0; i < reps; ++i) active += random_half(n, rng).active_count();
  CHECK(static_cast<double>(active) / (reps * n) == doctest::Approx(0.5).epsilon(0.01));

  Rng r0(1);
  CHECK(random_half(0, r0).size() == 0);
}

TEST_CASE("baselines: strongest_fraction ordering and ties") {
  ChannelMatrix g(4);
  g.at(0, 0) = 4.0;
  g.at(1, 1) = 1.0;
  g.at(2, 2) = 3.0;
  g.at(3, 3) = 2.0;
  const Schedule s = strongest_fraction(g, 0.5);
  CHECK(s.x == std::vector<double>{1.0, 0.0, 1.0, 0.0});
  CHECK(strongest_fraction(g, 1.0).active_count() == 4);
  CHECK_THROWS_AS(strongest_fraction(g, 0.0), std::invalid_argument);
}

TEST_CASE("baselines: greedy activates a lone link and orders by distance") {
  const Layout layout = random_layout(1, 3);
  const ChannelMatrix g = channel_for(layout);
  ChannelParams p;
  const GreedyResult res = greedy_sum_rate(layout, g, p);
  CHECK(res.schedule.x[0] == 1.0);
  CHECK(res.decisions.size() == 1);
  CHECK(res.decisions[0].accepted);
}

TEST_CASE("baselines: co-located identical links keep exactly one") {
  const Layout layout = colocated_pair();
  const ChannelMatrix g = channel_for(layout);
  ChannelParams p;
  const GreedyResult res = greedy_sum_rate(layout, g, p);
  CHECK(res.schedule.active_count() == 1);

  // brute force over the 4 subsets agrees
  const BruteForceResult bf = brute_force(g, p, {1.0, 1.0});
  CHECK(bf.schedule.active_count() == 1);
}

TEST_CASE("baselines: greedy beats the strongest single link and logs increasing sums") {
  ChannelParams p;
  for (uint64_t seed = 40; seed < 46; ++seed) {
    const Layout layout = random_layout(12, seed);
    const ChannelMatrix g = channel_for(layout);
    const GreedyResult res = greedy_sum_rate(layout, g, p);

    double best_single = 0.0;
    for (int i = 0; i < 12; ++i) best_single = std::max(best_single, standalone_rate(i, g, p));
    CHECK(sum_rate(res.schedule, g, p) >= best_single - 1e-6);

    double prev = 0.0;
    for (const GreedyDecision& d : res.decisions) {
      if (d.accepted) CHECK(d.objective_after > prev);
      CHECK(d.objective_after >= d.objective_before);
      prev = d.objective_after;
    }
  }
}

TEST_CASE("baselines: max_weight") {
  CHECK(max_weight({0.2, 0.9, 0.1}).x == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(max_weight({1.0, 1.0}).x == std::vector<double>{1.0, 0.0});  // tie to lower index
  CHECK(max_weight({0.7}).x == std::vector<double>{1.0});
  CHECK(max_weight({0.0, 0.0}).active_count() == 0);
}

TEST_CASE("baselines: weighted greedy dominates max_weight") {
  ChannelParams p;
  Rng wr(77);
  for (uint64_t seed = 60; seed < 66; ++seed) {
    const int n = 8;
    const Layout layout = random_layout(n, seed);
    const ChannelMatrix g = channel_for(layout);
    std::vector<double> w(n);
    for (double& wi : w) wi = wr.uniform(0.1, 2.0);

    const GreedyResult wg = weighted_greedy(g, p, w);
    const Schedule mw = max_weight(w);
    CHECK(weighted_sum_rate(wg.schedule, g, p, w) >=
          weighted_sum_rate(mw, g, p, w) - 1e-9);

    // audit: every accepted step strictly increased the weighted objective
    for (const GreedyDecision& d : wg.decisions)
      if (d.accepted) CHECK(d.objective_after > d.objective_before + 1e-10);
  }
}

TEST_CASE("baselines: weighted greedy with flat weights starts from the dominant link") {
  const Layout layout = random_layout(6, 71);
  const ChannelMatrix g = channel_for(layout);
  ChannelParams p;
  const std::vector<double> w(6, 1.0);
  const GreedyResult res = weighted_greedy(g, p, w);
  int best = 0;
  for (int i = 1; i < 6; ++i)
    if (standalone_rate(i, g, p) > standalone_rate(best, g, p)) best = i;
  CHECK(res.decisions.front().link == best);
  CHECK(res.schedule.x[best] == 1.0);
}

TEST_CASE("baselines: brute force oracle") {
  ChannelParams p;
  // single link
  {
    const Layout layout = random_layout(1, 80);
    const ChannelMatrix g = channel_for(layout);
    const BruteForceResult bf = brute_force(g, p, {1.0});
    CHECK(bf.schedule.x[0] == 1.0);
    CHECK(bf.objective == doctest::Approx(standalone_rate(0, g, p)));
  }
  // exhaustiveness dominates every baseline on small instances
  for (uint64_t seed = 90; seed < 95; ++seed) {
    const int n = 8;
    const Layout layout = random_layout(n, seed);
    const ChannelMatrix g = channel_for(layout);
    const std::vector<double> ones(n, 1.0);
    const BruteForceResult bf = brute_force(g, p, ones);

    CHECK(bf.objective >= sum_rate(greedy_sum_rate(layout, g, p).schedule, g, p) - 1e-9);
    CHECK(bf.objective >= sum_rate(all_active(n), g, p) - 1e-9);
    CHECK(bf.objective >= sum_rate(strongest_fraction(g, 0.5), g, p) - 1e-9);
    Rng rng(seed);
    CHECK(bf.objective >= sum_rate(random_half(n, rng), g, p) - 1e-9);
    CHECK(bf.objective >= sum_rate(fp_schedule(g, p, ones).schedule, g, p) - 1e-9);
  }

  ChannelMatrix too_big(21);
  CHECK_THROWS_AS(brute_force(too_big, p, std::vector<double>(21, 1.0)), std::invalid_argument);
}

TEST_CASE("baselines: schedules are quantized") {
  const Layout layout = random_layout(10, 96);
  const ChannelMatrix g = channel_for(layout);
  ChannelParams p;
  Rng rng(5);
  for (const Schedule& s :
       {all_active(10), random_half(10, rng), strongest_fraction(g, 0.3),
        greedy_sum_rate(layout, g, p).schedule, max_weight(std::vector<double>(10, 1.0)),
        weighted_greedy(g, p, std::vector<double>(10, 1.0)).schedule}) {
    CHECK(s.quantized);
    CHECK_NOTHROW(s.assert_valid());
  }
}
