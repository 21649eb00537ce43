#include "tango/tango.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <span>
#include <string>
#include <vector>

#include "accounting.hpp"
#include "baselines.hpp"
#include "common.hpp"
#include "merging.hpp"
#include "segmentation.hpp"
#include "selection.hpp"
#include "strope.hpp"
#include "token_grid.hpp"
#include "token_list.hpp"
#include "version.hpp"

namespace {

thread_local std::string g_last_error;

tango_status to_c_status(tango::Status s) {
  switch (s) {
    case tango::Status::ok: return TANGO_OK;
    case tango::Status::format_error: return TANGO_FORMAT_ERROR;
    case tango::Status::truncated: return TANGO_TRUNCATED;
    case tango::Status::value_error: return TANGO_VALUE_ERROR;
    case tango::Status::io_error: return TANGO_IO_ERROR;
    case tango::Status::config_error: return TANGO_CONFIG_ERROR;
    case tango::Status::range_error: return TANGO_RANGE_ERROR;
    case tango::Status::empty_input: return TANGO_EMPTY_INPUT;
    case tango::Status::no_candidates: return TANGO_NO_CANDIDATES;
    case tango::Status::invalid_argument: return TANGO_INVALID_ARGUMENT;
  }
  return TANGO_UNKNOWN_ERROR;
}

tango_status record_error(std::exception_ptr ep) noexcept {
  try {
    std::rethrow_exception(ep);
  } catch (const tango::Error& e) {
    try {
      g_last_error = e.what();
    } catch (...) {
    }
    return to_c_status(e.code());
  } catch (const std::exception& e) {
    try {
      g_last_error = e.what();
    } catch (...) {
    }
    return TANGO_UNKNOWN_ERROR;
  } catch (...) {
    try {
      g_last_error = "unknown error";
    } catch (...) {
    }
    return TANGO_UNKNOWN_ERROR;
  }
}

tango_status invalid(const char* msg) noexcept {
  try {
    g_last_error = msg;
  } catch (...) {
  }
  return TANGO_INVALID_ARGUMENT;
}

tango::Position3D from_c(tango_position3d p) {
  return {p.t, p.h, p.w};
}

tango_position3d to_c(const tango::Position3D& p) {
  return {p.t, p.h, p.w};
}

tango::RopeConfig rope_config(std::uint32_t dim, const uint32_t* dims, const double* bases) {
  tango::RopeConfig cfg = dims && (dims[0] | dims[1] | dims[2])
                              ? tango::RopeConfig{dims[0], dims[1], dims[2]}
                              : tango::default_partition(dim);
  if (bases) {
    cfg.theta_t = bases[0];
    cfg.theta_h = bases[1];
    cfg.theta_w = bases[2];
  }
  if (cfg.dim() != dim)
    tango::fail(tango::Status::config_error, "rope section widths do not sum to dim");
  return cfg;
}

}  // namespace

struct tango_grid {
  tango::TokenGrid impl;
};
struct tango_attention {
  tango::AttentionMap impl;
};
struct tango_segment_plan {
  tango::SegmentPlan impl;
};
struct tango_salient {
  tango::SalientSet impl;
};
struct tango_cluster_result {
  tango::ClusterResult impl;
};
struct tango_pruned {
  tango::PrunedOutput impl;
  tango::PruneAudit audit;
};
struct tango_rope {
  tango::Rope impl;
};

extern "C" {

const char* tango_version(void) { return TANGO_VERSION_STRING; }

const char* tango_last_error(void) { return g_last_error.c_str(); }

void tango_set_threads(uint32_t n) { tango::set_thread_count(n); }

/* --- grids --- */

tango_grid* tango_grid_create(uint32_t frames, uint32_t grid_h, uint32_t grid_w, uint32_t dim,
                              const float* data, const float* timestamps) {
  if (!data || !timestamps) {
    invalid("data and timestamps must be non-NULL");
    return nullptr;
  }
  try {
    std::size_t n = static_cast<std::size_t>(frames) * grid_h * grid_w * dim;
    return new tango_grid{tango::TokenGrid(frames, grid_h, grid_w, dim,
                                           std::vector<float>(data, data + n),
                                           std::vector<float>(timestamps, timestamps + frames))};
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

tango_grid* tango_grid_load(const char* path) {
  if (!path) {
    invalid("path must be non-NULL");
    return nullptr;
  }
  try {
    return new tango_grid{tango::load_grid(path)};
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

tango_status tango_grid_save(const tango_grid* grid, const char* path) {
  if (!grid || !path) return invalid("grid and path must be non-NULL");
  try {
    tango::save_grid(grid->impl, path);
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

void tango_grid_free(tango_grid* grid) { delete grid; }

uint32_t tango_grid_frames(const tango_grid* grid) { return grid->impl.frames(); }
uint32_t tango_grid_height(const tango_grid* grid) { return grid->impl.grid_h(); }
uint32_t tango_grid_width(const tango_grid* grid) { return grid->impl.grid_w(); }
uint32_t tango_grid_dim(const tango_grid* grid) { return grid->impl.dim(); }
const float* tango_grid_data(const tango_grid* grid) { return grid->impl.data().data(); }
const float* tango_grid_timestamps(const tango_grid* grid) {
  return grid->impl.timestamps().data();
}

tango_position3d tango_grid_position(const tango_grid* grid, uint32_t frame, uint32_t cell,
                                     int timestamp_aligned) {
  return to_c(grid->impl.position(frame, cell, timestamp_aligned != 0));
}

/* --- attention --- */

tango_attention* tango_attention_create(uint32_t frames, uint32_t per_frame, const float* scores) {
  if (!scores) {
    invalid("scores must be non-NULL");
    return nullptr;
  }
  try {
    std::size_t n = static_cast<std::size_t>(frames) * per_frame;
    return new tango_attention{
        tango::AttentionMap(frames, per_frame, std::vector<float>(scores, scores + n))};
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

tango_attention* tango_attention_load(const char* path) {
  if (!path) {
    invalid("path must be non-NULL");
    return nullptr;
  }
  try {
    return new tango_attention{tango::load_attention(path)};
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

tango_status tango_attention_save(const tango_attention* attn, const char* path) {
  if (!attn || !path) return invalid("attention and path must be non-NULL");
  try {
    tango::save_attention(attn->impl, path);
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

void tango_attention_free(tango_attention* attn) { delete attn; }

uint32_t tango_attention_frames(const tango_attention* attn) { return attn->impl.frames(); }
uint32_t tango_attention_per_frame(const tango_attention* attn) { return attn->impl.per_frame(); }
const float* tango_attention_scores(const tango_attention* attn) {
  return attn->impl.scores().data();
}

tango_attention* tango_global_query_scores(const tango_grid* grid) {
  if (!grid) {
    invalid("grid must be non-NULL");
    return nullptr;
  }
  try {
    return new tango_attention{tango::global_query_scores(grid->impl)};
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

/* --- synthetic fixtures --- */

void tango_synth_spec_init(tango_synth_spec* spec) {
  if (!spec) return;
  tango::SynthSpec d;
  *spec = {d.frames, d.grid_h, d.grid_w, d.dim, d.n_blobs, d.amplitude, d.noise_sigma, d.blob_size};
}

tango_status tango_synth(const tango_synth_spec* spec, uint64_t seed, tango_grid** out_grid,
                         tango_attention** out_attn) {
  if (!spec || !out_grid || !out_attn) return invalid("spec and outputs must be non-NULL");
  try {
    tango::SynthSpec s{spec->frames,    spec->grid_h,      spec->grid_w,   spec->dim,
                       spec->n_blobs,   spec->amplitude,   spec->noise_sigma, spec->blob_size};
    tango::SynthResult r = tango::synth_video(s, seed);
    *out_grid = new tango_grid{std::move(r.grid)};
    *out_attn = new tango_attention{std::move(r.attention)};
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

/* --- segmentation --- */

tango_segment_plan* tango_segment(const tango_grid* grid, double tau, uint32_t max_segment_len) {
  if (!grid) {
    invalid("grid must be non-NULL");
    return nullptr;
  }
  try {
    tango::SegConfig cfg;
    cfg.tau = tau;
    cfg.max_segment_len = max_segment_len;
    return new tango_segment_plan{tango::optimal_segmentation(grid->impl, cfg)};
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

void tango_segment_plan_free(tango_segment_plan* plan) { delete plan; }

size_t tango_segment_count(const tango_segment_plan* plan) { return plan->impl.segments.size(); }

uint64_t tango_segment_total_prunable(const tango_segment_plan* plan) {
  return plan->impl.total_prunable;
}

tango_status tango_segment_at(const tango_segment_plan* plan, size_t i, uint32_t* t_s,
                              uint32_t* t_e, uint64_t* n_static, uint64_t* prunable) {
  if (!plan) return invalid("plan must be non-NULL");
  if (i >= plan->impl.segments.size()) {
    g_last_error = "segment index out of range";
    return TANGO_RANGE_ERROR;
  }
  const tango::Segment& seg = plan->impl.segments[i];
  std::uint64_t stat = 0;
  for (std::uint8_t m : seg.static_mask) stat += m;
  if (t_s) *t_s = seg.t_s;
  if (t_e) *t_e = seg.t_e;
  if (n_static) *n_static = stat;
  if (prunable) *prunable = stat * (seg.len() - 1);
  return TANGO_OK;
}

/* --- rope --- */

tango_rope* tango_rope_create(uint32_t dim, const uint32_t* dims, const double* bases) {
  try {
    return new tango_rope{tango::Rope(rope_config(dim, dims, bases))};
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

void tango_rope_free(tango_rope* rope) { delete rope; }

tango_status tango_rope_rotate(const tango_rope* rope, const float* x, uint32_t dim,
                               tango_position3d p, float* out) {
  if (!rope || !x || !out) return invalid("rope, x and out must be non-NULL");
  try {
    rope->impl.rotate({x, dim}, from_c(p), {out, dim});
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

tango_status tango_rope_cos_st(const tango_rope* rope, const float* x_i, tango_position3d p_i,
                               const float* x_j, tango_position3d p_j, uint32_t dim, double* out) {
  if (!rope || !x_i || !x_j || !out) return invalid("rope, vectors and out must be non-NULL");
  try {
    *out = rope->impl.cos_st({x_i, dim}, from_c(p_i), {x_j, dim}, from_c(p_j));
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

tango_status tango_rope_dist_st(const tango_rope* rope, const float* x_i, tango_position3d p_i,
                                const float* x_j, tango_position3d p_j, uint32_t dim,
                                double* out) {
  if (!rope || !x_i || !x_j || !out) return invalid("rope, vectors and out must be non-NULL");
  try {
    *out = rope->impl.dist_st({x_i, dim}, from_c(p_i), {x_j, dim}, from_c(p_j));
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

/* --- clustering --- */

tango_cluster_result* tango_cluster(const float* features, size_t n, uint32_t dim, size_t k,
                                    uint32_t knn_k, const tango_position3d* positions,
                                    const tango_rope* rope) {
  if (!features) {
    invalid("features must be non-NULL");
    return nullptr;
  }
  if (rope && !positions) {
    invalid("positions are required with a rope metric");
    return nullptr;
  }
  try {
    std::span<const float> feats(features, n * dim);
    tango::ClusterParams params{k, knn_k};
    tango::ClusterResult res;
    if (rope) {
      std::vector<float> metric(n * dim);
      tango::parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<float> unit(dim);
        for (std::size_t i = begin; i < end; ++i) {
          std::span<const float> x = feats.subspan(i * dim, dim);
          double sq = 0.0;
          for (float v : x) sq += static_cast<double>(v) * v;
          if (sq == 0.0) {
            std::copy(x.begin(), x.end(), unit.begin());
          } else {
            double inv = 1.0 / std::sqrt(sq);
            for (std::uint32_t c = 0; c < dim; ++c) unit[c] = static_cast<float>(x[c] * inv);
          }
          rope->impl.rotate(unit, from_c(positions[i]),
                            std::span<float>(metric.data() + i * dim, dim));
        }
      });
      res = tango::cluster(n, tango::euclidean_distance(metric, dim), params);
    } else {
      res = tango::cluster(n, tango::euclidean_distance(feats, dim), params);
    }
    return new tango_cluster_result{std::move(res)};
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

void tango_cluster_result_free(tango_cluster_result* result) { delete result; }

size_t tango_cluster_k(const tango_cluster_result* result) { return result->impl.centers.size(); }
size_t tango_cluster_size(const tango_cluster_result* result) {
  return result->impl.assignment.size();
}
const size_t* tango_cluster_centers(const tango_cluster_result* result) {
  return result->impl.centers.data();
}
const uint32_t* tango_cluster_assignment(const tango_cluster_result* result) {
  return result->impl.assignment.data();
}
const double* tango_cluster_rho(const tango_cluster_result* result) {
  return result->impl.rho.data();
}
const double* tango_cluster_delta(const tango_cluster_result* result) {
  return result->impl.delta.data();
}
const double* tango_cluster_gamma(const tango_cluster_result* result) {
  return result->impl.gamma.data();
}

/* --- selection --- */

tango_salient* tango_select(const tango_grid* grid, const tango_attention* attn, size_t k,
                            double alpha, uint32_t knn_k, const uint32_t* sink_indices,
                            size_t sink_count, int use_dist_st, const uint32_t* rope_dims,
                            const double* rope_bases, int timestamp_aligned) {
  if (!grid) {
    invalid("grid must be non-NULL");
    return nullptr;
  }
  try {
    const tango::TokenGrid& g = grid->impl;
    tango::AttentionMap scores = attn ? attn->impl : tango::global_query_scores(g);
    if (scores.frames() != g.frames() || scores.per_frame() != g.cells())
      tango::fail(tango::Status::value_error, "attention shape does not match grid");
    tango::SinkSpec sink;
    if (sink_indices) sink.indices.assign(sink_indices, sink_indices + sink_count);
    scores = tango::mask_sinks(scores, sink);

    tango::TokenList tokens;
    tokens.dim = g.dim();
    tokens.features = g.data();
    tokens.scores = scores.scores();
    std::uint64_t total = g.total_tokens();
    tokens.positions.reserve(total);
    tokens.segment.assign(total, 0);
    tokens.source_count.assign(total, 1);
    tokens.pooled.assign(total, 0);
    for (std::uint32_t t = 0; t < g.frames(); ++t)
      for (std::uint32_t c = 0; c < g.cells(); ++c)
        tokens.positions.push_back(g.position(t, c, timestamp_aligned != 0));

    tango::SelectParams params;
    params.k = k;
    params.alpha = alpha;
    params.knn_k = knn_k;
    params.use_dist_st = use_dist_st != 0;
    tango::RopeConfig rc = rope_config(g.dim(), rope_dims, rope_bases);
    return new tango_salient{tango::select_salient(tokens, params, rc)};
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

void tango_salient_free(tango_salient* sel) { delete sel; }

size_t tango_salient_count(const tango_salient* sel) { return sel->impl.indices.size(); }
const size_t* tango_salient_indices(const tango_salient* sel) { return sel->impl.indices.data(); }
const uint32_t* tango_salient_clusters(const tango_salient* sel) {
  return sel->impl.cluster_of.data();
}

/* --- baselines --- */

tango_status tango_uniform_sample(size_t n, size_t budget, size_t* out) {
  if (!out) return invalid("out must be non-NULL");
  try {
    std::vector<std::size_t> idx = tango::uniform_sample(n, budget);
    std::memcpy(out, idx.data(), idx.size() * sizeof(size_t));
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

tango_status tango_topk(const float* scores, size_t n, size_t budget, size_t* out) {
  if (!scores || !out) return invalid("scores and out must be non-NULL");
  try {
    std::vector<std::size_t> idx = tango::topk_select({scores, n}, budget);
    std::memcpy(out, idx.data(), idx.size() * sizeof(size_t));
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

/* --- pipeline --- */

void tango_prune_options_init(tango_prune_options* opts) {
  if (!opts) return;
  *opts = {};
  opts->retention = 0.10;
  opts->tau = 0.0;
  opts->alpha = 1.5;
  opts->split = 0.6;
  opts->knn_k = 7;
  opts->rope_bases[0] = 1e4;
  opts->rope_bases[1] = 1e3;
  opts->rope_bases[2] = 1e3;
  opts->use_dist_st = 1;
  opts->timestamp_aligned = 1;
}

tango_pruned* tango_prune(const tango_grid* grid, const tango_attention* attn,
                          const tango_prune_options* opts) {
  if (!grid || !opts) {
    invalid("grid and options must be non-NULL");
    return nullptr;
  }
  try {
    const tango::TokenGrid& g = grid->impl;
    tango::PruneConfig cfg;
    cfg.retention = opts->retention;
    cfg.budget_split = opts->split;
    cfg.seg.tau = opts->tau > 0.0 ? opts->tau : (opts->retention <= 0.1 ? 0.65 : 0.8);
    cfg.seg.max_segment_len = opts->max_segment_len;
    cfg.select.alpha = opts->alpha;
    cfg.select.knn_k = opts->knn_k;
    cfg.select.use_dist_st = opts->use_dist_st != 0;
    if (opts->sink_indices)
      cfg.select.sink.indices.assign(opts->sink_indices, opts->sink_indices + opts->sink_count);
    cfg.timestamp_aligned = opts->timestamp_aligned != 0;
    cfg.budget_from_survivors = opts->budget_from_survivors != 0;
    if (opts->rope_dims[0] | opts->rope_dims[1] | opts->rope_dims[2])
      cfg.rope = tango::RopeConfig{opts->rope_dims[0], opts->rope_dims[1], opts->rope_dims[2]};
    cfg.rope.theta_t = opts->rope_bases[0];
    cfg.rope.theta_h = opts->rope_bases[1];
    cfg.rope.theta_w = opts->rope_bases[2];

    tango::AttentionMap scores = attn ? attn->impl : tango::global_query_scores(g);
    auto* out = new tango_pruned{};
    try {
      out->impl = tango::prune_video(g, scores, cfg, &out->audit);
    } catch (...) {
      delete out;
      throw;
    }
    return out;
  } catch (...) {
    record_error(std::current_exception());
    return nullptr;
  }
}

void tango_pruned_free(tango_pruned* pruned) { delete pruned; }

size_t tango_pruned_count(const tango_pruned* pruned) { return pruned->impl.size(); }
uint32_t tango_pruned_dim(const tango_pruned* pruned) { return pruned->impl.dim; }
const float* tango_pruned_features(const tango_pruned* pruned) {
  return pruned->impl.features.data();
}
tango_position3d tango_pruned_position(const tango_pruned* pruned, size_t i) {
  return to_c(pruned->impl.positions[i]);
}
tango_provenance tango_pruned_provenance(const tango_pruned* pruned, size_t i) {
  return static_cast<tango_provenance>(pruned->impl.provenance[i]);
}
uint32_t tango_pruned_source_count(const tango_pruned* pruned, size_t i) {
  return pruned->impl.source_counts[i];
}
void tango_pruned_audit(const tango_pruned* pruned, tango_prune_audit* out) {
  if (!pruned || !out) return;
  const tango::PruneAudit& a = pruned->audit;
  *out = {a.input_tokens, a.budget,     a.k_salient, a.k_merge,      a.survivors,
          a.salient_out,  a.merged_out, a.segments,  a.static_pooled};
}

/* --- cost model --- */

void tango_model_config_qwen2_7b(tango_model_config* cfg) {
  if (!cfg) return;
  tango::ModelConfig m = tango::qwen2_7b();
  *cfg = {m.layers, m.hidden, m.ffn, m.query_heads, m.kv_groups};
}

tango_status tango_llm_flops(uint64_t n, const tango_model_config* cfg, uint64_t* out) {
  if (!cfg || !out) return invalid("config and out must be non-NULL");
  try {
    *out = tango::llm_flops(n, {cfg->layers, cfg->hidden, cfg->ffn, cfg->query_heads,
                                cfg->kv_groups});
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

tango_status tango_coefficient_ratio(const tango_model_config* cfg, double* out) {
  if (!cfg || !out) return invalid("config and out must be non-NULL");
  try {
    *out = tango::coefficient_ratio(
        {cfg->layers, cfg->hidden, cfg->ffn, cfg->query_heads, cfg->kv_groups});
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

tango_status tango_flops_report(uint64_t n, const tango_model_config* cfg, const double* schedule,
                                size_t schedule_len, char* buf, size_t buf_len) {
  if (!cfg || !schedule || !buf || buf_len == 0)
    return invalid("config, schedule and buffer must be non-NULL");
  try {
    tango::ModelConfig m{cfg->layers, cfg->hidden, cfg->ffn, cfg->query_heads, cfg->kv_groups};
    tango::FlopsReport rep = tango::flops_report(n, m, {schedule, schedule_len});
    std::string text = tango::format_report(rep, m);
    std::size_t len = std::min(text.size(), buf_len - 1);
    std::memcpy(buf, text.data(), len);
    buf[len] = '\0';
    return TANGO_OK;
  } catch (...) {
    return record_error(std::current_exception());
  }
}

}  // extern "C"
