#include "d2dsched/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace d2d {

namespace {
// absolute tolerance for "strictly increases" acceptance tests
constexpr double kAcceptEps = 1e-9;

GreedyResult run_greedy(const ChannelMatrix& g, const ChannelParams& params,
                        const std::vector<double>& w, const std::vector<int>& order,
                        const std::vector<double>& keys) {
  GreedyResult res;
  res.schedule = Schedule::all_off(g.n);
  double current = 0.0;
  for (int link : order) {
    GreedyDecision d;
    d.link = link;
    d.order_key = keys[link];
    d.objective_before = current;
    res.schedule.x[link] = 1.0;
    const double with_link = weighted_sum_rate(res.schedule, g, params, w);
    if (with_link > current + kAcceptEps) {
      d.accepted = true;
      current = with_link;
    } else {
      res.schedule.x[link] = 0.0;
    }
    d.objective_after = current;
    res.decisions.push_back(d);
  }
  return res;
}
}  // namespace

Schedule all_active(int n) { return Schedule::all_on(n); }

Schedule random_half(int n, Rng& rng) {
  Schedule s = Schedule::all_off(n);
  for (int i = 0; i < n; ++i) s.x[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return s;
}

Schedule strongest_fraction(const ChannelMatrix& g, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("fraction must be in (0,1]");
  const int n = g.n;
  const int k = static_cast<int>(std::ceil(fraction * n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.at(a, a) > g.at(b, b); });
  Schedule s = Schedule::all_off(n);
  for (int i = 0; i < k && i < n; ++i) s.x[order[i]] = 1.0;
  return s;
}

GreedyResult greedy_sum_rate(const Layout& layout, const ChannelMatrix& g,
                             const ChannelParams& params) {
  const int n = g.n;
  std::vector<double> dist(n);
  for (int i = 0; i < n; ++i) dist[i] = layout.links[i].length();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
  return run_greedy(g, params, std::vector<double>(n, 1.0), order, dist);
}

Schedule max_weight(const std::vector<double>& w) {
  const int n = static_cast<int>(w.size());
  Schedule s = Schedule::all_off(n);
  int best = -1;
  for (int i = 0; i < n; ++i) {
    if (w[i] < 0.0) throw std::invalid_argument("weights must be nonnegative");
    if (w[i] > 0.0 && (best < 0 || w[i] > w[best])) best = i;
  }
  if (best >= 0) s.x[best] = 1.0;
  return s;
}

GreedyResult weighted_greedy(const ChannelMatrix& g, const ChannelParams& params,
                             const std::vector<double>& w) {
  const int n = g.n;
  std::vector<double> keys(n);
  for (int i = 0; i < n; ++i) keys[i] = w[i] * standalone_rate(i, g, params);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return keys[a] > keys[b]; });
  return run_greedy(g, params, w, order, keys);
}

BruteForceResult brute_force(const ChannelMatrix& g, const ChannelParams& params,
                             const std::vector<double>& w) {
  const int n = g.n;
  if (n > 20) throw std::invalid_argument("brute force limited to 20 links");

  BruteForceResult best;
  best.schedule = Schedule::all_off(n);
  best.objective = 0.0;

  Schedule s = Schedule::all_off(n);
  const uint32_t count = 1u << n;
  // bit (n-1-i) holds x_i, so increasing mask visits schedules in
  // lexicographic order and strict improvement keeps the smallest maximizer
  for (uint32_t mask = 1; mask < count; ++mask) {
    for (int i = 0; i < n; ++i) s.x[i] = (mask >> (n - 1 - i)) & 1u ? 1.0 : 0.0;
    const double obj = weighted_sum_rate(s, g, params, w);
    if (obj > best.objective) {
      best.objective = obj;
      best.schedule = s;
    }
  }
  return best;
}

void save_decision_log_csv(const std::vector<GreedyDecision>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open decision log for writing: " + path);
  out << "link,order_key,accepted,objective_before,objective_after\n";
  for (const GreedyDecision& d : log) {
    out << d.link << ',' << d.order_key << ',' << (d.accepted ? 1 : 0) << ','
        << d.objective_before << ',' << d.objective_after << '\n';
  }
}

}  // namespace d2d
