#include "d2dsched/pf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace d2d {

std::vector<double> pf_weights(const MeanRateTracker& tracker) {
  std::vector<double> w(tracker.ewma.size(), 0.0);
  for (size_t i = 0; i < w.size(); ++i) {
    if (!(tracker.ewma[i] > 0.0))
      throw std::invalid_argument("tracker not warmed up: nonpositive mean rate");
    w[i] = 1.0 / tracker.ewma[i];
  }
  return w;
}

std::vector<uint8_t> binarize_weights(const std::vector<double>& w) {
  const int n = static_cast<int>(w.size());
  if (n == 0) throw std::invalid_argument("empty weight vector");
  double norm2 = 0.0;
  for (double wi : w) {
    if (wi < 0.0) throw std::invalid_argument("weights must be nonnegative");
    norm2 += wi * wi;
  }
  if (norm2 == 0.0) throw std::invalid_argument("all-zero weight vector");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[a] > w[b]; });

  // score(k) = (sum of k largest) / sqrt(k); norms of w cancel in the argmax
  double best_score = -1.0;
  int best_k = 1;
  double prefix = 0.0;
  for (int k = 1; k <= n; ++k) {
    prefix += w[order[k - 1]];
    const double score = prefix / std::sqrt(static_cast<double>(k));
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
  }
  std::vector<uint8_t> mask(n, 0);
  for (int k = 0; k < best_k; ++k) mask[order[k]] = 1;
  return mask;
}

PfSolver parse_pf_solver(const std::string& name) {
  if (name == "neural") return PfSolver::kNeural;
  if (name == "fp" || name == "fp-weighted") return PfSolver::kFpWeighted;
  if (name == "weighted-greedy") return PfSolver::kWeightedGreedy;
  if (name == "max-weight") return PfSolver::kMaxWeight;
  if (name == "random") return PfSolver::kRandom;
  if (name == "all-active") return PfSolver::kAllActive;
  throw std::invalid_argument("unknown pf solver: " + name);
}

std::string pf_solver_name(PfSolver solver) {
  switch (solver) {
    case PfSolver::kNeural: return "neural";
    case PfSolver::kFpWeighted: return "fp";
    case PfSolver::kWeightedGreedy: return "weighted-greedy";
    case PfSolver::kMaxWeight: return "max-weight";
    case PfSolver::kRandom: return "random";
    case PfSolver::kAllActive: return "all-active";
  }
  throw std::invalid_argument("unknown pf solver");
}

PfState pf_init(const ChannelMatrix& g, const ChannelParams& params, double alpha) {
  PfState state;
  state.tracker = MeanRateTracker(g.n, alpha);
  for (int i = 0; i < g.n; ++i)
    state.tracker.ewma[i] = standalone_rate(i, g, params) / static_cast<double>(g.n);
  state.w.assign(g.n, 0.0);
  state.w_binary.assign(g.n, 1);
  return state;
}

PfStepResult pf_step(const Layout& layout, const ChannelMatrix& g, const ChannelParams& params,
                     PfState& state, PfSolver solver, const ModelWeights* model, Rng& rng,
                     const PfOptions& options) {
  const int n = g.n;
  PfStepResult res;
  state.w = pf_weights(state.tracker);

  switch (solver) {
    case PfSolver::kNeural: {
      if (!model) throw std::invalid_argument("neural pf solver requires a model");
      state.w_binary = binarize_weights(state.w);
      res.schedule = feedback_schedule(layout, *model, options.feedback, rng, &state.w_binary).schedule;
      break;
    }
    case PfSolver::kFpWeighted:
      state.w_binary.assign(n, 1);
      res.schedule = fp_schedule(g, params, state.w, options.fp).schedule;
      break;
    case PfSolver::kWeightedGreedy:
      state.w_binary.assign(n, 1);
      res.schedule = weighted_greedy(g, params, state.w).schedule;
      break;
    case PfSolver::kMaxWeight:
      state.w_binary.assign(n, 1);
      res.schedule = max_weight(state.w);
      break;
    case PfSolver::kRandom:
      state.w_binary.assign(n, 1);
      res.schedule = random_half(n, rng);
      break;
    case PfSolver::kAllActive:
      state.w_binary.assign(n, 1);
      res.schedule = all_active(n);
      break;
  }

  res.rates = link_rates(res.schedule, g, params);
  state.tracker.observe(res.rates);
  ++state.slot;
  return res;
}

PfSimResult pf_simulate(const Layout& layout, const ChannelMatrix& g, const ChannelParams& params,
                        PfSolver solver, const ModelWeights* model, int slots,
                        const PfOptions& options, bool record_audit) {
  if (slots < 1) throw std::invalid_argument("slot count must be >= 1");
  PfState state = pf_init(g, params, options.ewma_alpha);
  Rng rng(options.seed);

  PfSimResult res;
  for (int t = 0; t < slots; ++t) {
    const PfStepResult step = pf_step(layout, g, params, state, solver, model, rng, options);
    if (record_audit) {
      PfAuditRow row;
      row.slot = state.slot;
      row.support = static_cast<int>(
          std::count(state.w_binary.begin(), state.w_binary.end(), uint8_t{1}));
      row.scheduled = step.schedule.active_count();
      row.utility_so_far = log_utility(state.tracker.mean);
      res.audit.push_back(row);
    }
  }

  res.mean_rates = state.tracker.mean;
  res.log_utility = log_utility(res.mean_rates, &res.starved_links);
  res.sorted_mean_rates_mbps.reserve(res.mean_rates.size());
  for (double r : res.mean_rates) res.sorted_mean_rates_mbps.push_back(r / 1e6);
  std::sort(res.sorted_mean_rates_mbps.begin(), res.sorted_mean_rates_mbps.end());
  return res;
}

void save_pf_audit_csv(const PfSimResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open audit csv for writing: " + path);
  out << "slot,support,scheduled,utility_so_far\n";
  for (const PfAuditRow& row : result.audit)
    out << row.slot << ',' << row.support << ',' << row.scheduled << ',' << row.utility_so_far
        << '\n';
}

void save_cdf_csv(const std::vector<double>& sorted_mbps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open cdf csv for writing: " + path);
  out << "percentile,mean_rate_mbps\n";
  const size_t n = sorted_mbps.size();
  for (size_t i = 0; i < n; ++i)
    out << 100.0 * static_cast<double>(i + 1) / static_cast<double>(n) << ',' << sorted_mbps[i]
        << '\n';
}

}  // namespace d2d
