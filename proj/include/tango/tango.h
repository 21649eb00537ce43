#ifndef TANGO_H
#define TANGO_H

/* C interface to the video-token pruning library.
 *
 * Conventions: constructors return NULL on failure and status-returning
 * calls return a nonzero tango_status; in both cases tango_last_error()
 * holds a message for the calling thread until its next failure. Handles
 * are freed exactly once with their matching _free function. Accessors on
 * a valid handle cannot fail; passing NULL to them is undefined. Returned
 * pointers borrow the handle's storage and die with it. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tango_status {
  TANGO_OK = 0,
  TANGO_FORMAT_ERROR = 1,   /* bad magic or malformed header */
  TANGO_TRUNCATED = 2,      /* payload length mismatch */
  TANGO_VALUE_ERROR = 3,    /* invalid numeric content */
  TANGO_IO_ERROR = 4,
  TANGO_CONFIG_ERROR = 5,   /* invalid parameter combination */
  TANGO_RANGE_ERROR = 6,    /* index out of range */
  TANGO_EMPTY_INPUT = 7,
  TANGO_NO_CANDIDATES = 8,  /* every token masked */
  TANGO_INVALID_ARGUMENT = 9,
  TANGO_UNKNOWN_ERROR = 255
} tango_status;

typedef struct tango_grid tango_grid;
typedef struct tango_attention tango_attention;
typedef struct tango_segment_plan tango_segment_plan;
typedef struct tango_salient tango_salient;
typedef struct tango_cluster_result tango_cluster_result;
typedef struct tango_pruned tango_pruned;
typedef struct tango_rope tango_rope;

/* Token position: timestamp seconds (or 1-based frame index when timestamp
 * alignment is off) plus 1-based grid coordinates. */
typedef struct tango_position3d {
  double t;
  int32_t h;
  int32_t w;
} tango_position3d;

const char* tango_version(void);

/* Message from this thread's most recent failure; empty if none yet. */
const char* tango_last_error(void);

/* Caps internal worker threads; 0 restores automatic selection (also
 * overridable via the TANGO_THREADS environment variable). */
void tango_set_threads(uint32_t n);

/* --- token grids --------------------------------------------------------- */

tango_grid* tango_grid_create(uint32_t frames, uint32_t grid_h, uint32_t grid_w, uint32_t dim,
                              const float* data, const float* timestamps);
tango_grid* tango_grid_load(const char* path);
tango_status tango_grid_save(const tango_grid* grid, const char* path);
void tango_grid_free(tango_grid* grid);

uint32_t tango_grid_frames(const tango_grid* grid);
uint32_t tango_grid_height(const tango_grid* grid);
uint32_t tango_grid_width(const tango_grid* grid);
uint32_t tango_grid_dim(const tango_grid* grid);
const float* tango_grid_data(const tango_grid* grid);
const float* tango_grid_timestamps(const tango_grid* grid);
tango_position3d tango_grid_position(const tango_grid* grid, uint32_t frame, uint32_t cell,
                                     int timestamp_aligned);

/* --- attention maps ------------------------------------------------------ */

tango_attention* tango_attention_create(uint32_t frames, uint32_t per_frame, const float* scores);
tango_attention* tango_attention_load(const char* path);
tango_status tango_attention_save(const tango_attention* attn, const char* path);
void tango_attention_free(tango_attention* attn);

uint32_t tango_attention_frames(const tango_attention* attn);
uint32_t tango_attention_per_frame(const tango_attention* attn);
const float* tango_attention_scores(const tango_attention* attn);

/* Per-frame mean-query softmax saliency. */
tango_attention* tango_global_query_scores(const tango_grid* grid);

/* --- synthetic fixtures --------------------------------------------------- */

typedef struct tango_synth_spec {
  uint32_t frames;
  uint32_t grid_h;
  uint32_t grid_w;
  uint32_t dim;
  uint32_t n_blobs;
  double amplitude;    /* blob cells traveled per frame */
  double noise_sigma;  /* per-component gaussian noise */
  uint32_t blob_size;  /* square footprint side */
} tango_synth_spec;

void tango_synth_spec_init(tango_synth_spec* spec);

tango_status tango_synth(const tango_synth_spec* spec, uint64_t seed, tango_grid** out_grid,
                         tango_attention** out_attn);

/* --- temporal segmentation ------------------------------------------------ */

/* max_segment_len = 0 means unbounded. */
tango_segment_plan* tango_segment(const tango_grid* grid, double tau, uint32_t max_segment_len);
void tango_segment_plan_free(tango_segment_plan* plan);

size_t tango_segment_count(const tango_segment_plan* plan);
uint64_t tango_segment_total_prunable(const tango_segment_plan* plan);
tango_status tango_segment_at(const tango_segment_plan* plan, size_t i, uint32_t* t_s,
                              uint32_t* t_e, uint64_t* n_static, uint64_t* prunable);

/* --- spatio-temporal rotary embedding ------------------------------------- */

/* dims/bases are three-element arrays ordered (t, h, w); pass dims = NULL to
 * derive the default partition of dim, bases = NULL for (1e4, 1e3, 1e3). */
tango_rope* tango_rope_create(uint32_t dim, const uint32_t* dims, const double* bases);
void tango_rope_free(tango_rope* rope);

tango_status tango_rope_rotate(const tango_rope* rope, const float* x, uint32_t dim,
                               tango_position3d p, float* out);
tango_status tango_rope_cos_st(const tango_rope* rope, const float* x_i, tango_position3d p_i,
                               const float* x_j, tango_position3d p_j, uint32_t dim, double* out);
tango_status tango_rope_dist_st(const tango_rope* rope, const float* x_i, tango_position3d p_i,
                                const float* x_j, tango_position3d p_j, uint32_t dim, double* out);

/* --- clustering ----------------------------------------------------------- */

/* DPC-KNN over n row-major feature vectors. positions + rope switch the
 * metric to dist_st on unit-normalized rotated features; with rope = NULL
 * the metric is plain Euclidean on the raw features. */
tango_cluster_result* tango_cluster(const float* features, size_t n, uint32_t dim, size_t k,
                                    uint32_t knn_k, const tango_position3d* positions,
                                    const tango_rope* rope);
void tango_cluster_result_free(tango_cluster_result* result);

size_t tango_cluster_k(const tango_cluster_result* result);
size_t tango_cluster_size(const tango_cluster_result* result);
const size_t* tango_cluster_centers(const tango_cluster_result* result);
const uint32_t* tango_cluster_assignment(const tango_cluster_result* result);
const double* tango_cluster_rho(const tango_cluster_result* result);
const double* tango_cluster_delta(const tango_cluster_result* result);
const double* tango_cluster_gamma(const tango_cluster_result* result);

/* --- salient selection ----------------------------------------------------- */

/* Selection over the raw grid tokens (no segmentation): expand to the top
 * floor(alpha*k) scores, cluster, keep each cluster's attention argmax.
 * attn = NULL computes global-query scores first. */
tango_salient* tango_select(const tango_grid* grid, const tango_attention* attn, size_t k,
                            double alpha, uint32_t knn_k, const uint32_t* sink_indices,
                            size_t sink_count, int use_dist_st, const uint32_t* rope_dims,
                            const double* rope_bases, int timestamp_aligned);
void tango_salient_free(tango_salient* sel);

size_t tango_salient_count(const tango_salient* sel);
const size_t* tango_salient_indices(const tango_salient* sel);     /* flat token ids */
const uint32_t* tango_salient_clusters(const tango_salient* sel);  /* cluster per pick */

/* --- baselines ------------------------------------------------------------- */

/* out must hold budget entries. */
tango_status tango_uniform_sample(size_t n, size_t budget, size_t* out);
tango_status tango_topk(const float* scores, size_t n, size_t budget, size_t* out);

/* --- full pipeline ---------------------------------------------------------- */

typedef struct tango_prune_options {
  double retention;          /* (0, 1] */
  double tau;                /* <= 0 derives it from retention */
  double alpha;
  double split;              /* salient fraction of the budget */
  uint32_t knn_k;
  uint32_t max_segment_len;  /* 0 = unbounded */
  uint32_t rope_dims[3];     /* all zero = default partition */
  double rope_bases[3];
  const uint32_t* sink_indices;
  size_t sink_count;
  int use_dist_st;
  int timestamp_aligned;
  int budget_from_survivors;
} tango_prune_options;

/* Paper defaults: retention 0.10, alpha 1.5, split 0.6, knn 7, bases
 * (1e4, 1e3, 1e3), tau derived (0.65 at retention <= 0.1, else 0.8). */
void tango_prune_options_init(tango_prune_options* opts);

typedef struct tango_prune_audit {
  uint64_t input_tokens;
  uint64_t budget;
  uint64_t k_salient;
  uint64_t k_merge;
  uint64_t survivors;
  uint64_t salient_out;
  uint64_t merged_out;
  uint64_t segments;
  uint64_t static_pooled;
} tango_prune_audit;

typedef enum tango_provenance {
  TANGO_PROV_SALIENT = 0,
  TANGO_PROV_MERGED = 1,
  TANGO_PROV_POOLED_STATIC = 2
} tango_provenance;

/* attn = NULL computes global-query scores. */
tango_pruned* tango_prune(const tango_grid* grid, const tango_attention* attn,
                          const tango_prune_options* opts);
void tango_pruned_free(tango_pruned* pruned);

size_t tango_pruned_count(const tango_pruned* pruned);
uint32_t tango_pruned_dim(const tango_pruned* pruned);
const float* tango_pruned_features(const tango_pruned* pruned);
tango_position3d tango_pruned_position(const tango_pruned* pruned, size_t i);
tango_provenance tango_pruned_provenance(const tango_pruned* pruned, size_t i);
uint32_t tango_pruned_source_count(const tango_pruned* pruned, size_t i);
void tango_pruned_audit(const tango_pruned* pruned, tango_prune_audit* out);

/* --- transformer cost model -------------------------------------------------- */

typedef struct tango_model_config {
  uint64_t layers;
  uint64_t hidden;
  uint64_t ffn;
  uint64_t query_heads;
  uint64_t kv_groups;
} tango_model_config;

void tango_model_config_qwen2_7b(tango_model_config* cfg);

tango_status tango_llm_flops(uint64_t n, const tango_model_config* cfg, uint64_t* out);
tango_status tango_coefficient_ratio(const tango_model_config* cfg, double* out);

/* Per-layer retention schedule of length cfg->layers; writes a multi-line
 * report into buf (truncated to buf_len, always NUL-terminated). */
tango_status tango_flops_report(uint64_t n, const tango_model_config* cfg, const double* schedule,
                                size_t schedule_len, char* buf, size_t buf_len);

#ifdef __cplusplus
}
#endif

#endif /* TANGO_H */
