#pragma once

#include <span>
#include <string>
#include <vector>

#include "d2dsched/metrics.hpp"

namespace d2d {

enum class FpQuantization {
  kHalfThreshold,     // x_hat = 1 iff x > threshold
  kRelativeThreshold  // x_hat = 1 iff x >= max_j(x_j) * threshold
};

struct FpOptions {
  int max_iters = 100;
  double threshold = 0.5;
  FpQuantization quantization = FpQuantization::kHalfThreshold;
  bool record_trace = false;
};

struct FpResult {
  Schedule schedule;                    // quantized
  std::vector<double> x_relaxed;        // continuous power proxy in [0,1]
  std::vector<double> objective_trace;  // weighted sum rate at relaxed x per iteration
  int iterations = 0;
};

// Coordinated ascent on the quadratic-transformed weighted sum rate. Starting
// from x = 1, each iteration updates
//   gamma_i = G_ii p x_i / (sum_{j!=i} G_ij p x_j + sigma^2)
//   y_i     = sqrt(w_i (1+gamma_i) G_ii p x_i) / (sum_j G_ij p x_j + sigma^2)
//   sqrt(x_i) = min{1, y_i sqrt(w_i (1+gamma_i) G_ii p) / (sum_j y_j^2 G_ji p)}
// and the final x is quantized per `options`. The SNR gap stays out of the
// ascent; it enters only through the reported Eq.-style rates.
FpResult fp_schedule(const ChannelMatrix& g, const ChannelParams& params,
                     const std::vector<double>& w, const FpOptions& options = {});

// Mean of active-link fraction over a set of FP outputs.
double fp_activation_fraction(std::span<const FpResult> results);

void save_fp_trace_csv(const FpResult& result, const std::string& path);

}  // namespace d2d
