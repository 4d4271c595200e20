/* C API for the d2dsched core. All functions return a d2d_status code;
 * human-readable failure detail is kept on the session handle. Strings
 * returned through out-parameters are heap buffers owned by the caller and
 * released with d2d_buffer_free. Experiment inputs are JSON spec strings;
 * result files land where the spec's output_dir points and a JSON summary is
 * returned directly. */

#ifndef D2DSCHED_CAPI_H
#define D2DSCHED_CAPI_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* status codes; mirrored by the CLI's exit codes */
#define D2D_OK 0
#define D2D_ERR_CONFIG 2    /* invalid spec, bad file, domain error */
#define D2D_ERR_THRESHOLD 3 /* an asserted threshold was not met */
#define D2D_ERR_RUNTIME 4   /* I/O or internal failure */

typedef struct d2d_session d2d_session;
typedef struct d2d_model d2d_model;

const char* d2d_version(void);

d2d_session* d2d_session_open(void);
void d2d_session_close(d2d_session* session);

/* message for the most recent failure on this session; empty when none */
const char* d2d_session_last_error(const d2d_session* session);

void d2d_buffer_free(char* buffer);

/* Layout dataset generation.
 * spec: {"output_dir", "layouts", "links", "region_edge_m", "cell_edge_m",
 *        "distance", "seed", "export_channels"} */
int d2d_generate(d2d_session* session, const char* spec_json, char** out_json);

/* Unsupervised training run.
 * spec: {"output_dir", "layouts", "batch", "learning_rate", "unroll_min",
 *        "unroll_max", "links", "region_edge_m", "cell_edge_m",
 *        "filter_cells", "seed", "eval_layouts", "workers", ...} */
int d2d_train(d2d_session* session, const char* spec_json, char** out_json);

/* Sum-rate benchmark table.
 * spec: {"scenario", "links", "region_edge_m", "cell_edge_m", "distance",
 *        "solvers": [...], "eval_layouts", "seed", "fading", "model",
 *        "output_dir", "workers"} */
int d2d_eval_sumrate(d2d_session* session, const char* spec_json, char** out_json);

/* Proportional-fairness benchmark table; adds "pf_slots" to the spec. */
int d2d_eval_pf(d2d_session* session, const char* spec_json, char** out_json);

/* Analytic-vs-numeric gradient agreement.
 * spec: {"links", "unroll", "samples", "step", "seed"} */
int d2d_gradcheck(d2d_session* session, const char* spec_json, char** out_json);

/* Closed-form operation count.
 * spec: {"grid_cells", "filter_cells", "layer_sizes": [...], "links": [...]} */
int d2d_complexity(d2d_session* session, const char* spec_json, char** out_json);

/* Model handles. */
int d2d_model_load(d2d_session* session, const char* path, d2d_model** out_model);
int d2d_model_save(d2d_session* session, const d2d_model* model, const char* path);
void d2d_model_free(d2d_model* model);

/* Schedule one layout file with a loaded model; returns a JSON object with
 * the binary schedule and the relaxed activations. */
int d2d_model_schedule(d2d_session* session, const d2d_model* model, const char* layout_path,
                       uint64_t seed, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* D2DSCHED_CAPI_H */
