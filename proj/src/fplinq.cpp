#include "d2dsched/fplinq.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace d2d {

FpResult fp_schedule(const ChannelMatrix& g, const ChannelParams& params,
                     const std::vector<double>& w, const FpOptions& options) {
  const int n = g.n;
  if (static_cast<int>(w.size()) != n) throw std::invalid_argument("weight size mismatch");
  if (options.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  for (double wi : w)
    if (wi < 0.0) throw std::invalid_argument("weights must be nonnegative");

  const double p = params.tx_power_w();
  const double sigma2 = noise_power_w(params);

  std::vector<double> x(n, 1.0), gamma(n, 0.0), y(n, 0.0), received(n, 0.0);
  FpResult res;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    // received(i): total power landing on receiver i at the current x
    for (int i = 0; i < n; ++i) {
      double total = 0.0;
      for (int j = 0; j < n; ++j) total += g.at(i, j) * p * x[j];
      received[i] = total;
    }
    for (int i = 0; i < n; ++i) {
      const double direct = g.at(i, i) * p * x[i];
      gamma[i] = direct / (received[i] - direct + sigma2);
      y[i] = std::sqrt(w[i] * (1.0 + gamma[i]) * direct) / (received[i] + sigma2);
    }
    for (int i = 0; i < n; ++i) {
      double den = 0.0;
      for (int j = 0; j < n; ++j) den += y[j] * y[j] * g.at(j, i) * p;
      const double num = y[i] * std::sqrt(w[i] * (1.0 + gamma[i]) * g.at(i, i) * p);
      const double root = (den > 0.0) ? std::min(1.0, num / den) : (num > 0.0 ? 1.0 : 0.0);
      x[i] = root * root;
    }
    if (options.record_trace) {
      Schedule relaxed{x, false};
      res.objective_trace.push_back(weighted_sum_rate(relaxed, g, params, w));
    }
    ++res.iterations;
  }

  res.x_relaxed = x;
  res.schedule = Schedule::all_off(n);
  double cutoff = options.threshold;
  if (options.quantization == FpQuantization::kRelativeThreshold) {
    const double peak = *std::max_element(x.begin(), x.end());
    cutoff = options.threshold * peak;
    for (int i = 0; i < n; ++i) res.schedule.x[i] = (x[i] >= cutoff) ? 1.0 : 0.0;
  } else {
    for (int i = 0; i < n; ++i) res.schedule.x[i] = (x[i] > cutoff) ? 1.0 : 0.0;
  }
  res.schedule.quantized = true;
  return res;
}

double fp_activation_fraction(std::span<const FpResult> results) {
  if (results.empty()) throw std::invalid_argument("empty evaluation set");
  double total = 0.0;
  for (const FpResult& r : results) {
    total += static_cast<double>(r.schedule.active_count()) / r.schedule.size();
  }
  return total / static_cast<double>(results.size());
}

void save_fp_trace_csv(const FpResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace csv for writing: " + path);
  out << "iteration,weighted_sum_rate_bps\n";
  for (size_t i = 0; i < result.objective_trace.size(); ++i)
    out << i + 1 << ',' << result.objective_trace[i] << '\n';
}

}  // namespace d2d
