#include "d2dsched/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace d2d {

namespace {
// ln(1 + e^t) without overflow
double log1pexp(double t) { return (t > 0.0) ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
}  // namespace

Schedule Schedule::all_on(int n) { return Schedule{std::vector<double>(n, 1.0), true}; }

Schedule Schedule::all_off(int n) { return Schedule{std::vector<double>(n, 0.0), true}; }

int Schedule::active_count() const {
  int c = 0;
  for (double v : x) c += (v > 0.0) ? 1 : 0;
  return c;
}

void Schedule::assert_valid() const {
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("schedule entry outside [0,1]");
    if (quantized && v != 0.0 && v != 1.0)
      throw std::invalid_argument("quantized schedule entry not binary");
  }
}

double link_rate(int i, const Schedule& s, const ChannelMatrix& g, const ChannelParams& params) {
  if (s.x[i] <= 0.0) return 0.0;
  const double p = params.tx_power_w();
  double interference = 0.0;
  for (int j = 0; j < g.n; ++j) {
    if (j != i) interference += g.at(i, j) * p * s.x[j];
  }
  const double sinr =
      g.at(i, i) * p * s.x[i] / (params.snr_gap_linear() * (interference + noise_power_w(params)));
  return params.bandwidth_hz * std::log1p(sinr) / std::log(params.rate_log_base);
}

std::vector<double> link_rates(const Schedule& s, const ChannelMatrix& g,
                               const ChannelParams& params) {
  std::vector<double> rates(g.n, 0.0);
  for (int i = 0; i < g.n; ++i) rates[i] = link_rate(i, s, g, params);
  return rates;
}

double sum_rate(const Schedule& s, const ChannelMatrix& g, const ChannelParams& params) {
  double total = 0.0;
  for (int i = 0; i < g.n; ++i) total += link_rate(i, s, g, params);
  return total;
}

double weighted_sum_rate(const Schedule& s, const ChannelMatrix& g, const ChannelParams& params,
                         const std::vector<double>& w) {
  double total = 0.0;
  for (int i = 0; i < g.n; ++i) {
    if (w[i] < 0.0) throw std::invalid_argument("weights must be nonnegative");
    if (w[i] > 0.0) total += w[i] * link_rate(i, s, g, params);
  }
  return total;
}

double standalone_rate(int i, const ChannelMatrix& g, const ChannelParams& params) {
  Schedule s = Schedule::all_off(g.n);
  s.x[i] = 1.0;
  return link_rate(i, s, g, params);
}

MeanRateTracker::MeanRateTracker(int n, double alpha_)
    : ewma(n, 0.0), mean(n, 0.0), slots(0), alpha(alpha_) {
  if (!(alpha_ > 0.0 && alpha_ < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
}

void MeanRateTracker::observe(const std::vector<double>& rates) {
  if (rates.size() != ewma.size()) throw std::invalid_argument("rate vector size mismatch");
  ++slots;
  for (size_t i = 0; i < ewma.size(); ++i) {
    ewma[i] = (1.0 - alpha) * ewma[i] + alpha * rates[i];
    mean[i] += (rates[i] - mean[i]) / static_cast<double>(slots);
  }
}

double log_utility(const std::vector<double>& mean_rates_bps, std::vector<int>* starved) {
  double total = 0.0;
  bool any_zero = false;
  for (size_t i = 0; i < mean_rates_bps.size(); ++i) {
    if (mean_rates_bps[i] <= 0.0) {
      any_zero = true;
      if (starved) starved->push_back(static_cast<int>(i));
      continue;
    }
    total += std::log(mean_rates_bps[i] / 1e6);
  }
  return any_zero ? -std::numeric_limits<double>::infinity() : total;
}

double reverse_sigmoid_weight(double mean_rate, double theta, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  const double t = kappa * (mean_rate - theta);
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

double threshold_utility(double mean_rate, double theta, double kappa, double scale,
                         double offset) {
  if (!(kappa > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("kappa and scale must be positive");
  return scale * mean_rate - (scale / kappa) * log1pexp(kappa * (mean_rate - theta)) + offset;
}

}  // namespace d2d
