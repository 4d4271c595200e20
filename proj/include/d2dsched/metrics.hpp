#pragma once

#include <vector>

#include "d2dsched/channel.hpp"

namespace d2d {

// Link activation vector, binary when quantized, relaxed in [0,1] otherwise.
struct Schedule {
  std::vector<double> x;
  bool quantized = false;

  static Schedule all_on(int n);
  static Schedule all_off(int n);
  int size() const { return static_cast<int>(x.size()); }
  int active_count() const;
  void assert_valid() const;  // entries in [0,1]; binary when quantized
};

// R_i = W log(1 + G_ii p x_i / (gap * (sum_{j!=i} G_ij p x_j + sigma^2))),
// log taken base rate_log_base (2 by default, bits/s).
double link_rate(int i, const Schedule& s, const ChannelMatrix& g, const ChannelParams& params);
std::vector<double> link_rates(const Schedule& s, const ChannelMatrix& g, const ChannelParams& params);
double sum_rate(const Schedule& s, const ChannelMatrix& g, const ChannelParams& params);
double weighted_sum_rate(const Schedule& s, const ChannelMatrix& g, const ChannelParams& params,
                         const std::vector<double>& w);

// Rate of link i when it is the only active link.
double standalone_rate(int i, const ChannelMatrix& g, const ChannelParams& params);

// Long-run per-link rate statistics: exponentially weighted average driving
// the fairness weights, and the plain cumulative mean used for reporting.
struct MeanRateTracker {
  std::vector<double> ewma;
  std::vector<double> mean;
  long slots = 0;
  double alpha = 0.05;

  MeanRateTracker() = default;
  MeanRateTracker(int n, double alpha_);
  void observe(const std::vector<double>& rates);
};

// sum_i ln(mean_rate_i / 1e6); any non-positive rate yields -infinity and,
// when `starved` is given, the offending link indices.
double log_utility(const std::vector<double>& mean_rates_bps, std::vector<int>* starved = nullptr);

// W(r) = 1 / (1 + exp(kappa (r - theta))), evaluated on the stable branch.
double reverse_sigmoid_weight(double mean_rate, double theta, double kappa);

// U(r) = scale*r - (scale/kappa) ln(1 + exp(kappa (r - theta))) + offset;
// dU/dr = scale * reverse_sigmoid_weight(r).
double threshold_utility(double mean_rate, double theta, double kappa, double scale,
                         double offset);

}  // namespace d2d
