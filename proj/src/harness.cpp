#include "d2dsched/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "d2dsched/baselines.hpp"
#include "d2dsched/parallel.hpp"

namespace d2d {

namespace {

// substream index spaces under the experiment seed
constexpr uint64_t kStreamLayout = 0;
constexpr uint64_t kStreamFading = 1'000'000'000ULL;
constexpr uint64_t kStreamSolverRandom = 2'000'000'000ULL;
constexpr uint64_t kStreamNeural = 3'000'000'000ULL;
constexpr uint64_t kStreamPf = 4'000'000'000ULL;

// utility floor used only when rendering tables; raw outputs keep -inf
constexpr double kUtilityFloorMbps = 1e-3;

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct EvalInstance {
  Layout layout;
  ChannelMatrix channel;          // evaluation channel (faded when requested)
  ChannelMatrix channel_nofade;   // geometry-only channel
};

std::vector<EvalInstance> build_eval_set(const ExperimentSpec& spec, const ChannelParams& params) {
  std::vector<EvalInstance> set(spec.eval_layouts);
  LayoutConfig lc = spec.layout_config();
  parallel_for(spec.eval_layouts, spec.workers, [&](int k) {
    Rng lrng(derive_seed(spec.seed, kStreamLayout + k));
    LayoutConfig cfg = lc;
    cfg.seed = derive_seed(spec.seed, kStreamLayout + k);
    set[k].layout = generate_layout(cfg, lrng);
    Rng nofade_rng(0);
    ChannelParams base = params;
    base.fading = Fading::kNone;
    set[k].channel_nofade = build_channel_matrix(set[k].layout, base, nofade_rng);
    if (spec.fading) {
      ChannelParams faded = params;
      faded.fading = Fading::kRayleigh;
      Rng frng(derive_seed(spec.seed, kStreamFading + k));
      set[k].channel = build_channel_matrix(set[k].layout, faded, frng);
    } else {
      set[k].channel = set[k].channel_nofade;
    }
  });
  return set;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void write_per_layout_csv(const std::string& path, const std::string& hash,
                          const std::vector<std::string>& solvers,
                          const std::map<std::string, std::vector<double>>& values,
                          const char* value_name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open per-layout csv for writing: " + path);
  out << "# config_hash=" << hash << "\n";
  out << "layout_index,solver," << value_name << "\n";
  for (const std::string& s : solvers) {
    const auto& vals = values.at(s);
    for (size_t k = 0; k < vals.size(); ++k) out << k << ',' << s << ',' << vals[k] << '\n';
  }
}

}  // namespace

const char* version_string() { return "0.1.0"; }

DistanceTag parse_distance_tag(const std::string& tag) {
  if (tag == "30-70") return {tag, 30.0, 70.0};
  if (tag == "2-65") return {tag, 2.0, 65.0};
  if (tag == "10-50") return {tag, 10.0, 50.0};
  if (tag == "fixed-30") return {tag, 30.0, 30.0};
  if (tag.rfind("custom:", 0) == 0) {
    double lo = 0.0, hi = 0.0;
    if (std::sscanf(tag.c_str(), "custom:%lf:%lf", &lo, &hi) != 2)
      throw std::invalid_argument("custom distance tag must be custom:<dmin>:<dmax>");
    return {tag, lo, hi};
  }
  throw std::invalid_argument("unknown distance tag: " + tag);
}

LayoutConfig ExperimentSpec::layout_config() const {
  const DistanceTag d = parse_distance_tag(distance);
  LayoutConfig lc;
  lc.region_edge_m = region_edge_m;
  lc.cell_edge_m = cell_edge_m;
  lc.link_count = link_count;
  lc.dmin_m = d.dmin_m;
  lc.dmax_m = d.dmax_m;
  lc.seed = seed;
  lc.radial_law = radial_law;
  return lc;
}

void ExperimentSpec::validate() const {
  if (eval_layouts < 1) throw std::invalid_argument("eval_layouts must be >= 1");
  if (solvers.empty()) throw std::invalid_argument("solver list must not be empty");
  if (pf_slots < 1) throw std::invalid_argument("pf_slots must be >= 1");
  layout_config().validate();
}

const ResultRow* ResultTable::find(const std::string& solver) const {
  for (const ResultRow& row : rows)
    if (row.solver == solver) return &row;
  return nullptr;
}

std::string config_hash(const ExperimentSpec& spec) {
  std::ostringstream canon;
  canon << spec.scenario << '|' << spec.region_edge_m << '|' << spec.cell_edge_m << '|'
        << spec.link_count << '|' << spec.distance << '|'
        << (spec.radial_law == RadialLaw::kUniformDistance ? "dist" : "area") << '|';
  for (const std::string& s : spec.solvers) canon << s << ',';
  canon << '|' << spec.eval_layouts << '|' << spec.seed << '|' << (spec.fading ? 1 : 0) << '|'
        << spec.pf_slots << '|' << spec.feedback_iters << '|' << spec.model_path;
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ResultTable run_sumrate_benchmark(const ExperimentSpec& spec) {
  spec.validate();
  const ChannelParams params;
  const int count = spec.eval_layouts;

  std::vector<std::string> solvers = spec.solvers;
  if (std::find(solvers.begin(), solvers.end(), "fp") == solvers.end())
    solvers.insert(solvers.begin(), "fp");  // FP is the ratio denominator

  const bool needs_model =
      std::find(solvers.begin(), solvers.end(), "neural") != solvers.end();
  ModelWeights model;
  if (needs_model) {
    if (spec.model_path.empty())
      throw std::runtime_error("neural solver requested but no model path given");
    model = load_model(spec.model_path);
  }

  std::vector<EvalInstance> eval = build_eval_set(spec, params);

  // FP first: its outputs give the denominator and calibrate `strongest`
  std::vector<FpResult> fp_results(count);
  std::vector<double> fp_rates(count);
  parallel_for(count, spec.workers, [&](int k) {
    const std::vector<double> ones(eval[k].layout.size(), 1.0);
    fp_results[k] = fp_schedule(eval[k].channel, params, ones);
    fp_rates[k] = sum_rate(fp_results[k].schedule, eval[k].channel, params);
  });
  const double fraction = fp_activation_fraction(fp_results);

  std::map<std::string, std::vector<double>> rates;
  rates["fp"] = fp_rates;

  for (const std::string& name : solvers) {
    if (name == "fp" || rates.count(name)) continue;
    std::vector<double> vals(count, 0.0);
    parallel_for(count, spec.workers, [&](int k) {
      const EvalInstance& inst = eval[k];
      const int n = inst.layout.size();
      Schedule s;
      if (name == "all-active") {
        s = all_active(n);
      } else if (name == "random") {
        Rng rng(derive_seed(spec.seed, kStreamSolverRandom + k));
        s = random_half(n, rng);
      } else if (name == "strongest") {
        s = strongest_fraction(inst.channel_nofade, fraction);
      } else if (name == "greedy") {
        s = greedy_sum_rate(inst.layout, inst.channel, params).schedule;
      } else if (name == "fp-nofade") {
        const std::vector<double> ones(n, 1.0);
        s = fp_schedule(inst.channel_nofade, params, ones).schedule;
      } else if (name == "neural") {
        Rng rng(derive_seed(spec.seed, kStreamNeural + k));
        FeedbackOptions opt;
        opt.iterations = spec.feedback_iters;
        s = feedback_schedule(inst.layout, model, opt, rng).schedule;
      } else {
        throw std::invalid_argument("unknown sum-rate solver: " + name);
      }
      vals[k] = sum_rate(s, inst.channel, params);
    });
    rates[name] = std::move(vals);
  }

  ResultTable table;
  table.scenario = spec.scenario;
  table.config_hash = config_hash(spec);
  table.seed = spec.seed;
  table.metadata["kind"] = "sumrate";
  table.metadata["eval_layouts"] = std::to_string(count);
  table.metadata["fading"] = spec.fading ? "rayleigh" : "none";
  table.metadata["fp_activation_fraction"] = std::to_string(fraction);
  table.metadata["code_version"] = version_string();

  std::map<std::string, double> means;
  for (const std::string& name : solvers) means[name] = mean(rates.at(name));
  const double fp_mean = means.at("fp");
  for (const std::string& name : solvers) {
    ResultRow row;
    row.solver = name;
    row.metric = "mean_sum_rate_mbps";
    row.value = means.at(name) / 1e6;
    row.percent_of_fp = 100.0 * (means.at(name) / fp_mean);
    table.rows.push_back(row);
  }

  if (!spec.output_dir.empty()) {
    std::filesystem::create_directories(spec.output_dir);
    write_result_csv(table, spec.output_dir + "/results.csv");
    write_manifest(table, spec, spec.output_dir + "/manifest.json");
    write_per_layout_csv(spec.output_dir + "/per_layout.csv", table.config_hash, solvers, rates,
                         "sum_rate_bps");
    if (spec.audit && count > 0) {
      const std::vector<double> ones(eval[0].layout.size(), 1.0);
      FpOptions traced;
      traced.record_trace = true;
      save_fp_trace_csv(fp_schedule(eval[0].channel, params, ones, traced),
                        spec.output_dir + "/fp_trace_layout0.csv");
      save_decision_log_csv(greedy_sum_rate(eval[0].layout, eval[0].channel, params).decisions,
                            spec.output_dir + "/greedy_decisions_layout0.csv");
    }
  }
  return table;
}

ResultTable run_pf_benchmark(const ExperimentSpec& spec) {
  spec.validate();
  const ChannelParams params;
  const int count = spec.eval_layouts;

  std::vector<std::string> solvers = spec.solvers;
  if (std::find(solvers.begin(), solvers.end(), "fp") == solvers.end())
    solvers.insert(solvers.begin(), "fp");

  const bool needs_model =
      std::find(solvers.begin(), solvers.end(), "neural") != solvers.end();
  ModelWeights model;
  if (needs_model) {
    if (spec.model_path.empty())
      throw std::runtime_error("neural solver requested but no model path given");
    model = load_model(spec.model_path);
  }

  std::vector<EvalInstance> eval = build_eval_set(spec, params);

  std::map<std::string, std::vector<double>> utilities;  // clamped, for the table
  std::map<std::string, std::vector<double>> raw_utilities;
  std::map<std::string, std::vector<double>> cdf_rows;
  int clamped_links = 0;

  for (const std::string& name : solvers) {
    const PfSolver solver = parse_pf_solver(name);
    std::vector<PfSimResult> sims(count);
    parallel_for(count, spec.workers, [&](int k) {
      PfOptions opt;
      opt.feedback.iterations = spec.feedback_iters;
      opt.seed = derive_seed(spec.seed, kStreamPf + k);
      sims[k] = pf_simulate(eval[k].layout, eval[k].channel, params, solver,
                            needs_model ? &model : nullptr, spec.pf_slots, opt, spec.audit);
    });

    std::vector<double> util(count), raw(count);
    std::vector<double> all_rates;
    for (int k = 0; k < count; ++k) {
      raw[k] = sims[k].log_utility;
      std::vector<double> clamped = sims[k].mean_rates;
      for (double& r : clamped) {
        if (r < kUtilityFloorMbps * 1e6) {
          r = kUtilityFloorMbps * 1e6;
          ++clamped_links;
        }
      }
      util[k] = log_utility(clamped);
      all_rates.insert(all_rates.end(), sims[k].sorted_mean_rates_mbps.begin(),
                       sims[k].sorted_mean_rates_mbps.end());
    }
    std::sort(all_rates.begin(), all_rates.end());
    utilities[name] = std::move(util);
    raw_utilities[name] = std::move(raw);
    cdf_rows[name] = std::move(all_rates);

    if (!spec.output_dir.empty() && spec.audit && count > 0) {
      std::filesystem::create_directories(spec.output_dir);
      save_pf_audit_csv(sims[0], spec.output_dir + "/pf_audit_" + name + "_layout0.csv");
    }
  }

  ResultTable table;
  table.scenario = spec.scenario;
  table.config_hash = config_hash(spec);
  table.seed = spec.seed;
  table.metadata["kind"] = "pf";
  table.metadata["eval_layouts"] = std::to_string(count);
  table.metadata["pf_slots"] = std::to_string(spec.pf_slots);
  table.metadata["fading"] = spec.fading ? "rayleigh" : "none";
  table.metadata["utility_floor_mbps"] = std::to_string(kUtilityFloorMbps);
  table.metadata["clamped_rate_entries"] = std::to_string(clamped_links);
  table.metadata["code_version"] = version_string();

  std::map<std::string, double> means;
  for (const std::string& name : solvers) means[name] = mean(utilities.at(name));
  const double fp_mean = means.at("fp");
  for (const std::string& name : solvers) {
    ResultRow row;
    row.solver = name;
    row.metric = "mean_log_utility";
    row.value = means.at(name);
    row.percent_of_fp = 100.0 * (means.at(name) / fp_mean);
    table.rows.push_back(row);
  }

  if (!spec.output_dir.empty()) {
    std::filesystem::create_directories(spec.output_dir);
    write_result_csv(table, spec.output_dir + "/results.csv");
    write_manifest(table, spec, spec.output_dir + "/manifest.json");
    write_per_layout_csv(spec.output_dir + "/per_layout.csv", table.config_hash, solvers,
                         raw_utilities, "log_utility");
    for (const auto& [name, sorted] : cdf_rows)
      save_cdf_csv(sorted, spec.output_dir + "/cdf_" + name + ".csv");
  }
  return table;
}

long long estimate_complexity(long long links, long long grid_cells, long long filter_cells,
                              const std::vector<int>& layer_sizes) {
  if (links < 0 || grid_cells < 1 || filter_cells < 1 || layer_sizes.size() < 2)
    throw std::invalid_argument("invalid complexity arguments");
  long long fc = 0;
  for (size_t i = 0; i + 1 < layer_sizes.size(); ++i)
    fc += static_cast<long long>(layer_sizes[i]) * layer_sizes[i + 1];
  return grid_cells * grid_cells * filter_cells * filter_cells + links * fc;
}

void generate_dataset(const ExperimentSpec& spec, bool export_channels) {
  spec.validate();
  if (spec.output_dir.empty()) throw std::invalid_argument("dataset generation needs output_dir");
  std::filesystem::create_directories(spec.output_dir);
  const ChannelParams params;
  const LayoutConfig base = spec.layout_config();
  for (int k = 0; k < spec.eval_layouts; ++k) {
    Rng lrng(derive_seed(spec.seed, kStreamLayout + k));
    LayoutConfig cfg = base;
    cfg.seed = derive_seed(spec.seed, kStreamLayout + k);
    const Layout layout = generate_layout(cfg, lrng);
    char name[48];
    std::snprintf(name, sizeof(name), "/layout_%05d.txt", k);
    save_layout(layout, spec.output_dir + name);
    if (export_channels) {
      Rng crng(0);
      std::snprintf(name, sizeof(name), "/channel_%05d.csv", k);
      save_channel_csv(build_channel_matrix(layout, params, crng), spec.output_dir + name);
    }
  }
  ResultTable table;
  table.scenario = spec.scenario;
  table.config_hash = config_hash(spec);
  table.seed = spec.seed;
  table.metadata["kind"] = "dataset";
  table.metadata["layouts"] = std::to_string(spec.eval_layouts);
  write_manifest(table, spec, spec.output_dir + "/manifest.json");
}

void write_result_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open results csv for writing: " + path);
  out << "# config_hash=" << table.config_hash << "\n";
  out << "solver,metric,value,percent_of_fp\n";
  char buf[64];
  for (const ResultRow& row : table.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.4f", row.value, row.percent_of_fp);
    out << row.solver << ',' << row.metric << ',' << buf << '\n';
  }
}

void write_manifest(const ResultTable& table, const ExperimentSpec& spec,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
  out << "{\n";
  out << "  \"scenario\": \"" << table.scenario << "\",\n";
  out << "  \"config_hash\": \"" << table.config_hash << "\",\n";
  out << "  \"seed\": " << table.seed << ",\n";
  out << "  \"code_version\": \"" << version_string() << "\",\n";
  out << "  \"timestamp\": \"" << timestamp_utc() << "\",\n";
  out << "  \"distance\": \"" << spec.distance << "\",\n";
  out << "  \"links\": " << spec.link_count << ",\n";
  out << "  \"region_edge_m\": " << spec.region_edge_m << ",\n";
  out << "  \"metadata\": {";
  bool first = true;
  for (const auto& [k, v] : table.metadata) {
    out << (first ? "" : ", ") << "\"" << k << "\": \"" << v << "\"";
    first = false;
  }
  out << "}\n}\n";
}

}  // namespace d2d
