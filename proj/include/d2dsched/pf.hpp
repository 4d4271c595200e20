#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "d2dsched/baselines.hpp"
#include "d2dsched/fplinq.hpp"
#include "d2dsched/spatialnet.hpp"

namespace d2d {

// w_i = 1 / ewma_i. Requires a warmed-up tracker (all ewma entries positive).
std::vector<double> pf_weights(const MeanRateTracker& tracker);

// Binary approximation maximizing <y/|y|, w/|w|> over nonzero y in {0,1}^N.
// The maximizer is always a prefix of the descending sort of w, so a linear
// search over the prefix size suffices; ties in w break to the lower index.
std::vector<uint8_t> binarize_weights(const std::vector<double>& w);

enum class PfSolver { kNeural, kFpWeighted, kWeightedGreedy, kMaxWeight, kRandom, kAllActive };

PfSolver parse_pf_solver(const std::string& name);
std::string pf_solver_name(PfSolver solver);

struct PfOptions {
  double ewma_alpha = 0.05;
  FeedbackOptions feedback;
  FpOptions fp;
  uint64_t seed = 0;
};

struct PfState {
  MeanRateTracker tracker;
  std::vector<double> w;
  std::vector<uint8_t> w_binary;
  long slot = 0;
};

// Warm start: ewma_i = standalone_rate_i / N, which keeps Eq-style weights
// finite from the first slot and roughly equalizes them.
PfState pf_init(const ChannelMatrix& g, const ChannelParams& params, double alpha);

struct PfStepResult {
  Schedule schedule;
  std::vector<double> rates;
};

// One slot: compute weights, pick the subset/schedule per solver, evaluate
// instantaneous rates on the full layout, update the tracker. The neural
// solver restricts density grids and the DCS range to the binary-weight
// subset and forces excluded links off.
PfStepResult pf_step(const Layout& layout, const ChannelMatrix& g, const ChannelParams& params,
                     PfState& state, PfSolver solver, const ModelWeights* model, Rng& rng,
                     const PfOptions& options);

struct PfAuditRow {
  long slot = 0;
  int support = 0;    // binary-weight subset size (N for weightless solvers)
  int scheduled = 0;  // active links this slot
  double utility_so_far = 0.0;
};

struct PfSimResult {
  std::vector<double> mean_rates;  // simple per-link mean over the simulated slots
  double log_utility = 0.0;
  std::vector<int> starved_links;
  std::vector<double> sorted_mean_rates_mbps;  // CDF rows
  std::vector<PfAuditRow> audit;
};

PfSimResult pf_simulate(const Layout& layout, const ChannelMatrix& g, const ChannelParams& params,
                        PfSolver solver, const ModelWeights* model, int slots,
                        const PfOptions& options, bool record_audit = false);

void save_pf_audit_csv(const PfSimResult& result, const std::string& path);
void save_cdf_csv(const std::vector<double>& sorted_mbps, const std::string& path);

}  // namespace d2d
