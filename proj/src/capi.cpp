#include "d2dsched/capi.h"

#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <new>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "d2dsched/harness.hpp"
#include "d2dsched/training.hpp"

using nlohmann::json;

struct d2d_session {
  std::string last_error;
};

struct d2d_model {
  d2d::ModelWeights weights;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(::operator new(s.size() + 1, std::nothrow));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int fail(d2d_session* session, int code, const std::string& message) {
  if (session) session->last_error = message;
  return code;
}

int guarded(d2d_session* session, char** out_json, const std::function<json()>& body) {
  if (!session) return D2D_ERR_CONFIG;
  session->last_error.clear();
  try {
    const json result = body();
    if (out_json) {
      *out_json = dup_string(result.dump(2));
      if (!*out_json) return fail(session, D2D_ERR_RUNTIME, "allocation failure");
    }
    return D2D_OK;
  } catch (const std::invalid_argument& e) {
    return fail(session, D2D_ERR_CONFIG, e.what());
  } catch (const std::domain_error& e) {
    return fail(session, D2D_ERR_CONFIG, e.what());
  } catch (const json::exception& e) {
    return fail(session, D2D_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(session, D2D_ERR_RUNTIME, e.what());
  }
}

json parse_spec(const char* spec_json) {
  if (!spec_json) throw std::invalid_argument("null spec");
  return json::parse(spec_json);
}

d2d::ExperimentSpec experiment_from_json(const json& spec) {
  d2d::ExperimentSpec out;
  out.scenario = spec.value("scenario", out.scenario);
  out.region_edge_m = spec.value("region_edge_m", out.region_edge_m);
  out.cell_edge_m = spec.value("cell_edge_m", out.cell_edge_m);
  out.link_count = spec.value("links", out.link_count);
  out.distance = spec.value("distance", out.distance);
  if (spec.value("annulus_area", false)) out.radial_law = d2d::RadialLaw::kUniformArea;
  if (spec.contains("solvers")) out.solvers = spec.at("solvers").get<std::vector<std::string>>();
  out.eval_layouts = spec.value("eval_layouts", out.eval_layouts);
  out.seed = spec.value("seed", out.seed);
  out.fading = spec.value("fading", out.fading);
  out.pf_slots = spec.value("pf_slots", out.pf_slots);
  out.feedback_iters = spec.value("nn_iters", out.feedback_iters);
  out.model_path = spec.value("model", out.model_path);
  out.output_dir = spec.value("output_dir", out.output_dir);
  out.workers = spec.value("workers", out.workers);
  out.audit = spec.value("audit", out.audit);
  return out;
}

json table_to_json(const d2d::ResultTable& table) {
  json rows = json::array();
  for (const d2d::ResultRow& row : table.rows) {
    rows.push_back({{"solver", row.solver},
                    {"metric", row.metric},
                    {"value", row.value},
                    {"percent_of_fp", row.percent_of_fp}});
  }
  json meta(table.metadata);
  return json{{"scenario", table.scenario},
              {"config_hash", table.config_hash},
              {"seed", table.seed},
              {"rows", rows},
              {"metadata", meta}};
}

}  // namespace

extern "C" {

const char* d2d_version(void) { return d2d::version_string(); }

d2d_session* d2d_session_open(void) { return new (std::nothrow) d2d_session; }

void d2d_session_close(d2d_session* session) { delete session; }

const char* d2d_session_last_error(const d2d_session* session) {
  return session ? session->last_error.c_str() : "";
}

void d2d_buffer_free(char* buffer) { ::operator delete(buffer); }

int d2d_generate(d2d_session* session, const char* spec_json, char** out_json) {
  return guarded(session, out_json, [&]() {
    const json spec = parse_spec(spec_json);
    d2d::ExperimentSpec exp = experiment_from_json(spec);
    exp.eval_layouts = spec.value("layouts", exp.eval_layouts);
    if (exp.solvers.empty()) exp.solvers = {"fp"};
    d2d::generate_dataset(exp, spec.value("export_channels", false));
    return json{{"ok", true},
                {"output_dir", exp.output_dir},
                {"layouts", exp.eval_layouts},
                {"config_hash", d2d::config_hash(exp)}};
  });
}

int d2d_train(d2d_session* session, const char* spec_json, char** out_json) {
  return guarded(session, out_json, [&]() {
    const json spec = parse_spec(spec_json);
    d2d::TrainConfig cfg;
    cfg.total_layouts = spec.value("layouts", cfg.total_layouts);
    cfg.batch_layouts = spec.value("batch", cfg.batch_layouts);
    cfg.learning_rate = spec.value("learning_rate", cfg.learning_rate);
    cfg.lr_min = spec.value("lr_min", cfg.lr_min);
    cfg.unroll_min = spec.value("unroll_min", cfg.unroll_min);
    cfg.unroll_max = spec.value("unroll_max", cfg.unroll_max);
    cfg.mix_prob = spec.value("mix_prob", cfg.mix_prob);
    cfg.link_count = spec.value("links", cfg.link_count);
    cfg.region_edge_m = spec.value("region_edge_m", cfg.region_edge_m);
    cfg.cell_edge_m = spec.value("cell_edge_m", cfg.cell_edge_m);
    cfg.filter_cells = spec.value("filter_cells", cfg.filter_cells);
    cfg.seed = spec.value("seed", cfg.seed);
    cfg.checkpoint_every_batches = spec.value("checkpoint_every", cfg.checkpoint_every_batches);
    cfg.eval_every_batches = spec.value("eval_every", cfg.eval_every_batches);
    cfg.eval_layouts = spec.value("eval_layouts", cfg.eval_layouts);
    cfg.workers = spec.value("workers", cfg.workers);
    cfg.output_dir = spec.value("output_dir", cfg.output_dir);
    cfg.resume_dir = spec.value("resume_dir", cfg.resume_dir);
    cfg.resume_batch = spec.value("resume_batch", cfg.resume_batch);
    const bool verbose = spec.value("verbose", false);

    const d2d::TrainResult result = d2d::train(cfg, [verbose](const d2d::TrainLogRow& row) {
      if (!verbose) return;
      if (row.eval_ratio_pct > 0.0)
        std::fprintf(stderr, "batch %ld (%ld layouts): loss %.2f Mbps, eval %.2f%% of FP\n",
                     row.batch, row.layouts_seen, row.loss_mbps, row.eval_ratio_pct);
      else if (row.batch % 25 == 0)
        std::fprintf(stderr, "batch %ld (%ld layouts): loss %.2f Mbps\n", row.batch,
                     row.layouts_seen, row.loss_mbps);
    });
    double final_ratio = 0.0;
    for (auto it = result.log.rbegin(); it != result.log.rend(); ++it) {
      if (it->eval_ratio_pct > 0.0) {
        final_ratio = it->eval_ratio_pct;
        break;
      }
    }
    return json{{"ok", !result.diverged},
                {"diverged", result.diverged},
                {"layouts_seen", result.layouts_seen},
                {"final_eval_ratio_pct", final_ratio},
                {"model", cfg.output_dir.empty() ? "" : cfg.output_dir + "/model_final.txt"}};
  });
}

int d2d_eval_sumrate(d2d_session* session, const char* spec_json, char** out_json) {
  return guarded(session, out_json, [&]() {
    const d2d::ExperimentSpec exp = experiment_from_json(parse_spec(spec_json));
    return table_to_json(d2d::run_sumrate_benchmark(exp));
  });
}

int d2d_eval_pf(d2d_session* session, const char* spec_json, char** out_json) {
  return guarded(session, out_json, [&]() {
    const d2d::ExperimentSpec exp = experiment_from_json(parse_spec(spec_json));
    return table_to_json(d2d::run_pf_benchmark(exp));
  });
}

int d2d_gradcheck(d2d_session* session, const char* spec_json, char** out_json) {
  return guarded(session, out_json, [&]() {
    const json spec = parse_spec(spec_json);
    const int links = spec.value("links", 5);
    const int unroll = spec.value("unroll", 3);
    const int samples = spec.value("samples", 50);
    const double step = spec.value("step", 1e-4);
    const uint64_t seed = spec.value("seed", 7);

    d2d::LayoutConfig lc;
    lc.link_count = links;
    lc.seed = seed;
    d2d::Rng lrng(d2d::derive_seed(seed, 1));
    const d2d::Layout layout = d2d::generate_layout(lc, lrng);
    const d2d::ChannelParams params;
    d2d::Rng crng(0);
    const d2d::ChannelMatrix g = d2d::build_channel_matrix(layout, params, crng);
    d2d::Rng mrng(d2d::derive_seed(seed, 2));
    d2d::ModelWeights weights =
        d2d::init_model(63, lc.cell_edge_m, {6, 30, 30, 1}, mrng);
    d2d::Rng frng(d2d::derive_seed(seed, 3));
    const d2d::FiniteDiffReport report =
        d2d::finite_difference_check(layout, g, params, weights, unroll, samples, step, frng);
    return json{{"ok", true},
                {"max_rel_error", report.max_rel_error},
                {"worst_param", report.worst_param},
                {"samples", report.samples}};
  });
}

int d2d_complexity(d2d_session* session, const char* spec_json, char** out_json) {
  return guarded(session, out_json, [&]() {
    const json spec = parse_spec(spec_json);
    const long long grid = spec.value("grid_cells", 100);
    const long long filter = spec.value("filter_cells", 63);
    std::vector<int> layers = {6, 30, 30, 1};
    if (spec.contains("layer_sizes")) layers = spec.at("layer_sizes").get<std::vector<int>>();
    std::vector<long long> links = {50};
    if (spec.contains("links")) links = spec.at("links").get<std::vector<long long>>();
    json rows = json::array();
    for (long long n : links)
      rows.push_back({{"links", n}, {"operations", d2d::estimate_complexity(n, grid, filter, layers)}});
    return json{{"ok", true}, {"grid_cells", grid}, {"filter_cells", filter}, {"rows", rows}};
  });
}

int d2d_model_load(d2d_session* session, const char* path, d2d_model** out_model) {
  if (!out_model) return fail(session, D2D_ERR_CONFIG, "null model out-parameter");
  *out_model = nullptr;
  return guarded(session, nullptr, [&]() {
    if (!path) throw std::invalid_argument("null model path");
    auto* model = new d2d_model{d2d::load_model(path)};
    *out_model = model;
    return json{};
  });
}

int d2d_model_save(d2d_session* session, const d2d_model* model, const char* path) {
  return guarded(session, nullptr, [&]() {
    if (!model || !path) throw std::invalid_argument("null model or path");
    d2d::save_model(model->weights, path);
    return json{};
  });
}

void d2d_model_free(d2d_model* model) { delete model; }

int d2d_model_schedule(d2d_session* session, const d2d_model* model, const char* layout_path,
                       uint64_t seed, char** out_json) {
  return guarded(session, out_json, [&]() {
    if (!model || !layout_path) throw std::invalid_argument("null model or layout path");
    const d2d::Layout layout = d2d::load_layout(layout_path);
    d2d::Rng rng(seed);
    const d2d::FeedbackResult result =
        d2d::feedback_schedule(layout, model->weights, d2d::FeedbackOptions{}, rng);
    return json{{"ok", true},
                {"links", layout.size()},
                {"schedule", result.schedule.x},
                {"x_relaxed", result.x_relaxed},
                {"active", result.schedule.active_count()}};
  });
}

}  // extern "C"
