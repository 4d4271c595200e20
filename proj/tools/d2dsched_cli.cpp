// Command-line front end. Flags are assembled into JSON specs and handed to
// the shared-library C API; exit codes follow the API status codes
// (0 ok, 2 configuration error, 3 threshold failure in --assert mode).

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "d2dsched/capi.h"

using nlohmann::json;

namespace {

struct Session {
  d2d_session* handle = d2d_session_open();
  ~Session() { d2d_session_close(handle); }
};

int run(d2d_session* session, int (*fn)(d2d_session*, const char*, char**), const json& spec,
        json* result, bool quiet = false) {
  char* out = nullptr;
  const int status = fn(session, spec.dump().c_str(), &out);
  if (status != D2D_OK) {
    std::fprintf(stderr, "error: %s\n", d2d_session_last_error(session));
    return status;
  }
  if (out) {
    if (result) *result = json::parse(out);
    if (!quiet) std::printf("%s\n", out);
    d2d_buffer_free(out);
  }
  return D2D_OK;
}

void print_table(const json& table) {
  std::printf("scenario: %s  (config %s)\n", table["scenario"].get<std::string>().c_str(),
              table["config_hash"].get<std::string>().c_str());
  std::printf("%-16s %-20s %14s %14s\n", "solver", "metric", "value", "% of FP");
  for (const auto& row : table["rows"]) {
    std::printf("%-16s %-20s %14.4f %14.2f\n", row["solver"].get<std::string>().c_str(),
                row["metric"].get<std::string>().c_str(), row["value"].get<double>(),
                row["percent_of_fp"].get<double>());
  }
}

// "solver:min_pct" assertions against the table's percent_of_fp column
int check_assertions(const json& table, const std::vector<std::string>& asserts) {
  for (const std::string& a : asserts) {
    const auto colon = a.find(':');
    if (colon == std::string::npos) {
      std::fprintf(stderr, "error: bad assertion '%s', expected solver:min_pct\n", a.c_str());
      return D2D_ERR_CONFIG;
    }
    const std::string solver = a.substr(0, colon);
    const double min_pct = std::atof(a.c_str() + colon + 1);
    bool found = false;
    for (const auto& row : table["rows"]) {
      if (row["solver"] == solver) {
        found = true;
        const double pct = row["percent_of_fp"].get<double>();
        if (pct < min_pct) {
          std::fprintf(stderr, "assertion failed: %s at %.2f%% of FP, needs >= %.2f%%\n",
                       solver.c_str(), pct, min_pct);
          return D2D_ERR_THRESHOLD;
        }
      }
    }
    if (!found) {
      std::fprintf(stderr, "error: assertion names unknown solver '%s'\n", solver.c_str());
      return D2D_ERR_CONFIG;
    }
  }
  return D2D_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D2D link scheduling lab: layouts, channels, schedulers, benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", d2d_version());

  Session session;

  // shared experiment flags
  std::string distance = "2-65", model, output, scenario = "default";
  std::vector<std::string> solvers;
  std::vector<std::string> assertions;
  int nn_iters = 20;
  double region = 500.0, cell = 5.0;
  int links = 50, layouts = 500, workers = 0;
  uint64_t seed = 1;
  bool fading = false, audit = false, annulus_area = false;

  auto add_common = [&](CLI::App* cmd, bool with_solvers) {
    cmd->add_option("--region", region, "region edge, meters");
    cmd->add_option("--cell", cell, "grid cell edge, meters");
    cmd->add_option("--links", links, "links per layout");
    cmd->add_option("--dist", distance, "30-70 | 2-65 | 10-50 | fixed-30 | custom:<lo>:<hi>");
    cmd->add_option("--layouts", layouts, "evaluation set size");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--output", output, "output directory");
    cmd->add_option("--workers", workers, "worker threads (0 = all cores)");
    cmd->add_option("--scenario", scenario, "scenario label");
    cmd->add_flag("--annulus-area", annulus_area,
                  "receiver radius uniform over annulus area instead of uniform distance");
    if (with_solvers) {
      cmd->add_option("--solvers", solvers, "solver list")->delimiter(',');
      cmd->add_option("--model", model, "neural model checkpoint");
      cmd->add_option("--nn-iters", nn_iters, "neural feedback iterations");
      cmd->add_flag("--fading", fading, "Rayleigh fast fading on evaluation channels");
      cmd->add_flag("--audit", audit, "emit decision logs, traces, audit CSVs");
      cmd->add_option("--assert", assertions, "solver:min_pct threshold (repeatable)");
    }
  };

  auto* generate = app.add_subcommand("generate", "write a layout dataset");
  bool export_channels = false;
  add_common(generate, false);
  generate->add_flag("--export-channels", export_channels, "also write channel CSVs");

  auto* train = app.add_subcommand("train", "unsupervised training run");
  long train_layouts = 96000;
  int batch = 64, unroll_min = 3, unroll_max = 20, eval_layouts = 50;
  int checkpoint_every = 200, eval_every = 100;
  double lr = 1e-3;
  std::string resume_dir;
  long resume_batch = 0;
  train->add_option("--layouts", train_layouts, "total training layouts");
  train->add_option("--batch", batch, "layouts per batch");
  train->add_option("--lr", lr, "learning rate");
  double lr_min = 0.0;
  train->add_option("--lr-min", lr_min, "cosine-decay floor (0 = constant rate)");
  train->add_option("--unroll-min", unroll_min, "minimum unrolled iterations");
  train->add_option("--unroll-max", unroll_max, "maximum unrolled iterations");
  train->add_option("--links", links, "links per training layout");
  train->add_option("--region", region, "region edge, meters");
  train->add_option("--cell", cell, "grid cell edge, meters");
  train->add_option("--seed", seed, "master seed");
  train->add_option("--eval-layouts", eval_layouts, "held-out mini-set size");
  train->add_option("--eval-every", eval_every, "batches between held-out evals");
  train->add_option("--checkpoint-every", checkpoint_every, "batches between checkpoints");
  train->add_option("--workers", workers, "worker threads (0 = all cores)");
  train->add_option("--output", output, "run directory (checkpoints, log)")->required();
  train->add_option("--resume-dir", resume_dir, "checkpoint directory to resume from");
  train->add_option("--resume-batch", resume_batch, "batch counter to resume at");

  auto* eval_sumrate = app.add_subcommand("eval-sumrate", "sum-rate benchmark table");
  add_common(eval_sumrate, true);

  auto* eval_pf = app.add_subcommand("eval-pf", "proportional-fairness benchmark table");
  int pf_slots = 500;
  add_common(eval_pf, true);
  eval_pf->add_option("--slots", pf_slots, "time slots per layout");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  int gc_links = 5, gc_unroll = 3, gc_samples = 50;
  double gc_step = 1e-4;
  gradcheck->add_option("--links", gc_links, "links in the probe layout");
  gradcheck->add_option("--unroll", gc_unroll, "unrolled iterations");
  gradcheck->add_option("--samples", gc_samples, "sampled parameters");
  gradcheck->add_option("--step", gc_step, "central difference step");
  gradcheck->add_option("--seed", seed, "master seed");

  auto* complexity = app.add_subcommand("complexity", "closed-form operation count");
  long long grid_cells = 100, filter_cells = 63;
  std::vector<int> layer_sizes = {6, 30, 30, 1};
  std::vector<long long> link_counts = {50};
  complexity->add_option("--grid", grid_cells, "grid cells per edge (K)");
  complexity->add_option("--filter", filter_cells, "filter cells per edge (J)");
  complexity->add_option("--layers", layer_sizes, "layer sizes")->delimiter(',');
  complexity->add_option("--link-counts", link_counts, "link counts")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  json spec{{"scenario", scenario}, {"region_edge_m", region}, {"cell_edge_m", cell},
            {"links", links},       {"distance", distance},    {"seed", seed},
            {"workers", workers},   {"output_dir", output},    {"annulus_area", annulus_area}};

  if (generate->parsed()) {
    spec["layouts"] = layouts;
    spec["export_channels"] = export_channels;
    return run(session.handle, d2d_generate, spec, nullptr);
  }

  if (train->parsed()) {
    json tspec{{"layouts", train_layouts},
               {"verbose", true},
               {"batch", batch},
               {"learning_rate", lr},
               {"lr_min", lr_min},
               {"unroll_min", unroll_min},
               {"unroll_max", unroll_max},
               {"links", links},
               {"region_edge_m", region},
               {"cell_edge_m", cell},
               {"seed", seed},
               {"eval_layouts", eval_layouts},
               {"eval_every", eval_every},
               {"checkpoint_every", checkpoint_every},
               {"workers", workers},
               {"output_dir", output}};
    if (!resume_dir.empty()) {
      tspec["resume_dir"] = resume_dir;
      tspec["resume_batch"] = resume_batch;
    }
    return run(session.handle, d2d_train, tspec, nullptr);
  }

  if (eval_sumrate->parsed() || eval_pf->parsed()) {
    if (solvers.empty())
      solvers = eval_pf->parsed()
                    ? std::vector<std::string>{"fp", "neural", "weighted-greedy", "max-weight",
                                               "random", "all-active"}
                    : std::vector<std::string>{"fp", "greedy", "strongest", "random", "all-active"};
    spec["solvers"] = solvers;
    spec["eval_layouts"] = layouts;
    spec["fading"] = fading;
    spec["model"] = model;
    spec["audit"] = audit;
    spec["nn_iters"] = nn_iters;
    if (eval_pf->parsed()) spec["pf_slots"] = pf_slots;
    json table;
    const int status = run(session.handle, eval_pf->parsed() ? d2d_eval_pf : d2d_eval_sumrate,
                           spec, &table, true);
    if (status != D2D_OK) return status;
    print_table(table);
    return check_assertions(table, assertions);
  }

  if (gradcheck->parsed()) {
    json gspec{{"links", gc_links}, {"unroll", gc_unroll}, {"samples", gc_samples},
               {"step", gc_step},   {"seed", seed}};
    return run(session.handle, d2d_gradcheck, gspec, nullptr);
  }

  if (complexity->parsed()) {
    json cspec{{"grid_cells", grid_cells},
               {"filter_cells", filter_cells},
               {"layer_sizes", layer_sizes},
               {"links", link_counts}};
    return run(session.handle, d2d_complexity, cspec, nullptr);
  }

  return D2D_ERR_CONFIG;
}
