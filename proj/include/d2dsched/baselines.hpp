#pragma once

#include <string>
#include <vector>

#include "d2dsched/layout.hpp"
#include "d2dsched/metrics.hpp"
#include "d2dsched/rng.hpp"

namespace d2d {

Schedule all_active(int n);

// i.i.d. Bernoulli(0.5) activation
Schedule random_half(int n, Rng& rng);

// Activate ceil(fraction*N) links with the largest direct gains, ties to the
// lower index. The fraction is typically calibrated to FP's mean activation.
Schedule strongest_fraction(const ChannelMatrix& g, double fraction);

struct GreedyDecision {
  int link = 0;
  double order_key = 0.0;  // tx-rx distance, or weight * standalone rate
  bool accepted = false;
  double objective_before = 0.0;
  double objective_after = 0.0;
};

struct GreedyResult {
  Schedule schedule;
  std::vector<GreedyDecision> decisions;
};

// Links visited in increasing tx-rx distance; an activation is kept only if
// the total sum rate strictly increases (absolute tolerance 1e-9 bits/s).
GreedyResult greedy_sum_rate(const Layout& layout, const ChannelMatrix& g,
                             const ChannelParams& params);

// One-hot at argmax weight (ties to the lower index); all-zero weights give
// the empty schedule.
Schedule max_weight(const std::vector<double>& w);

// Fixed ordering by w_i * standalone rate descending; keep an activation only
// if the weighted sum rate strictly increases.
GreedyResult weighted_greedy(const ChannelMatrix& g, const ChannelParams& params,
                             const std::vector<double>& w);

struct BruteForceResult {
  Schedule schedule;
  double objective = 0.0;
};

// Exact maximizer of sum_i w_i R_i over all 2^N binary schedules, N <= 20.
// Ties resolve to the lexicographically smallest activation vector.
BruteForceResult brute_force(const ChannelMatrix& g, const ChannelParams& params,
                             const std::vector<double>& w);

void save_decision_log_csv(const std::vector<GreedyDecision>& log, const std::string& path);

}  // namespace d2d
