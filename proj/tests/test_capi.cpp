#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <tango/tango.h>

TEST_CASE("version and error plumbing") {
  REQUIRE(tango_version() != nullptr);
  CHECK(std::strlen(tango_version()) > 0);

  CHECK(tango_grid_load("this_file_does_not_exist.tg") == nullptr);
  std::string msg = tango_last_error();
  CHECK(msg.find("this_file_does_not_exist.tg") != std::string::npos);

  CHECK(tango_grid_create(1, 1, 1, 1, nullptr, nullptr) == nullptr);
  CHECK(tango_grid_load(nullptr) == nullptr);
}

TEST_CASE("grid lifecycle through the C surface") {
  const float data[] = {1.f, 2.f, 3.f, 4.f, 5.f, 6.f, 7.f, 8.f};
  const float ts[] = {0.5f, 1.5f};
  tango_grid* g = tango_grid_create(2, 1, 2, 2, data, ts);
  REQUIRE(g != nullptr);
  CHECK(tango_grid_frames(g) == 2);
  CHECK(tango_grid_height(g) == 1);
  CHECK(tango_grid_width(g) == 2);
  CHECK(tango_grid_dim(g) == 2);
  CHECK(std::memcmp(tango_grid_data(g), data, sizeof data) == 0);
  CHECK(std::memcmp(tango_grid_timestamps(g), ts, sizeof ts) == 0);

  tango_position3d p = tango_grid_position(g, 1, 1, 1);
  CHECK(p.t == 1.5);
  CHECK(p.h == 1);
  CHECK(p.w == 2);
  p = tango_grid_position(g, 1, 1, 0);  // alignment off: frame index
  CHECK(p.t == 2.0);

  const char* path = "capi_grid.tg";
  REQUIRE(tango_grid_save(g, path) == TANGO_OK);
  tango_grid* back = tango_grid_load(path);
  REQUIRE(back != nullptr);
  CHECK(std::memcmp(tango_grid_data(back), data, sizeof data) == 0);
  tango_grid_free(back);
  tango_grid_free(g);
  std::remove(path);

  // invalid content surfaces as NULL plus a status message
  const float nan_data[] = {1.f, NAN};
  tango_grid* bad = tango_grid_create(1, 1, 1, 2, nan_data, ts);
  CHECK(bad == nullptr);
  CHECK(std::strlen(tango_last_error()) > 0);
}

TEST_CASE("attention lifecycle and global query") {
  const float scores[] = {0.25f, 0.75f};
  tango_attention* a = tango_attention_create(1, 2, scores);
  REQUIRE(a != nullptr);
  CHECK(tango_attention_frames(a) == 1);
  CHECK(tango_attention_per_frame(a) == 2);
  CHECK(tango_attention_scores(a)[1] == 0.75f);

  const char* path = "capi_attn.ta";
  REQUIRE(tango_attention_save(a, path) == TANGO_OK);
  tango_attention* back = tango_attention_load(path);
  REQUIRE(back != nullptr);
  CHECK(std::memcmp(tango_attention_scores(back), scores, sizeof scores) == 0);
  tango_attention_free(back);
  tango_attention_free(a);
  std::remove(path);

  const float grid_data[] = {2.f, 0.f};
  const float ts[] = {0.f};
  tango_grid* g = tango_grid_create(1, 1, 2, 1, grid_data, ts);
  REQUIRE(g != nullptr);
  tango_attention* q = tango_global_query_scores(g);
  REQUIRE(q != nullptr);
  double z = std::exp(2.0) + 1.0;
  CHECK(tango_attention_scores(q)[0] == doctest::Approx(std::exp(2.0) / z).epsilon(1e-6));
  tango_attention_free(q);
  tango_grid_free(g);
}

TEST_CASE("synth and segmentation round trip") {
  tango_synth_spec spec;
  tango_synth_spec_init(&spec);
  CHECK(spec.frames == 8);
  CHECK(spec.dim == 16);
  spec.frames = 6;
  spec.grid_h = 4;
  spec.grid_w = 4;
  spec.dim = 6;
  spec.amplitude = 0.0;  // static video: one segment
  spec.noise_sigma = 0.0;

  tango_grid* grid = nullptr;
  tango_attention* attn = nullptr;
  REQUIRE(tango_synth(&spec, 7, &grid, &attn) == TANGO_OK);
  REQUIRE(grid != nullptr);
  REQUIRE(attn != nullptr);

  tango_segment_plan* plan = tango_segment(grid, 0.8, 0);
  REQUIRE(plan != nullptr);
  CHECK(tango_segment_count(plan) == 1);
  CHECK(tango_segment_total_prunable(plan) == 16 * 5);

  uint32_t t_s = 0, t_e = 0;
  uint64_t n_static = 0, prunable = 0;
  REQUIRE(tango_segment_at(plan, 0, &t_s, &t_e, &n_static, &prunable) == TANGO_OK);
  CHECK(t_s == 1);
  CHECK(t_e == 7);
  CHECK(n_static == 16);
  CHECK(prunable == 80);
  CHECK(tango_segment_at(plan, 5, &t_s, &t_e, &n_static, &prunable) == TANGO_RANGE_ERROR);

  tango_segment_plan_free(plan);
  CHECK(tango_segment(grid, 1.5, 0) == nullptr);  // tau out of range

  tango_attention_free(attn);
  tango_grid_free(grid);
}

TEST_CASE("rope rotation through the C surface") {
  tango_rope* rope = tango_rope_create(6, nullptr, nullptr);
  REQUIRE(rope != nullptr);

  const float x[] = {1.f, 0.f, 1.f, 0.f, 1.f, 0.f};
  float out[6];
  tango_position3d p{1.0, 0, 0};
  REQUIRE(tango_rope_rotate(rope, x, 6, p, out) == TANGO_OK);
  CHECK(out[0] == doctest::Approx(std::cos(1.0)).epsilon(1e-6));
  CHECK(out[1] == doctest::Approx(std::sin(1.0)).epsilon(1e-6));

  // unit vector: dist^2 + 2 cos must come back as exactly 2
  const float inv = static_cast<float>(1.0 / std::sqrt(3.0));
  const float u[] = {inv, 0.f, inv, 0.f, inv, 0.f};
  tango_position3d zero{0.0, 0, 0};
  double c = 0.0, d = 0.0;
  REQUIRE(tango_rope_cos_st(rope, u, p, u, zero, 6, &c) == TANGO_OK);
  REQUIRE(tango_rope_dist_st(rope, u, p, u, zero, 6, &d) == TANGO_OK);
  CHECK(c == doctest::Approx((2.0 + std::cos(1.0)) / 3.0).epsilon(1e-6));
  CHECK(d * d + 2.0 * c == doctest::Approx(2.0).epsilon(1e-9));

  // mismatched dim is a config error, null pointers invalid arguments
  CHECK(tango_rope_rotate(rope, x, 4, p, out) == TANGO_CONFIG_ERROR);
  CHECK(tango_rope_rotate(nullptr, x, 6, p, out) == TANGO_INVALID_ARGUMENT);
  CHECK(tango_rope_create(7, nullptr, nullptr) == nullptr);

  const uint32_t dims[3] = {2, 2, 2};
  const double bases[3] = {100.0, 10.0, 10.0};
  tango_rope* custom = tango_rope_create(6, dims, bases);
  REQUIRE(custom != nullptr);
  tango_rope_free(custom);
  tango_rope_free(rope);
}

TEST_CASE("clustering through the C surface") {
  // two tight pairs on a line
  const float feats[] = {0.f, 0.1f, 5.f, 5.1f};
  tango_cluster_result* r = tango_cluster(feats, 4, 1, 2, 2, nullptr, nullptr);
  REQUIRE(r != nullptr);
  CHECK(tango_cluster_k(r) == 2);
  CHECK(tango_cluster_size(r) == 4);

  const uint32_t* assign = tango_cluster_assignment(r);
  CHECK(assign[0] == assign[1]);
  CHECK(assign[2] == assign[3]);
  CHECK(assign[0] != assign[2]);

  const size_t* centers = tango_cluster_centers(r);
  CHECK(centers[0] < 4);
  CHECK(tango_cluster_rho(r) != nullptr);
  CHECK(tango_cluster_delta(r) != nullptr);
  CHECK(tango_cluster_gamma(r) != nullptr);
  tango_cluster_result_free(r);

  CHECK(tango_cluster(feats, 4, 1, 0, 2, nullptr, nullptr) == nullptr);  // k = 0
  CHECK(tango_cluster(nullptr, 4, 1, 2, 2, nullptr, nullptr) == nullptr);
}

TEST_CASE("selection through the C surface") {
  tango_synth_spec spec;
  tango_synth_spec_init(&spec);
  spec.frames = 4;
  spec.grid_h = 4;
  spec.grid_w = 4;
  spec.dim = 12;
  spec.noise_sigma = 0.2;

  tango_grid* grid = nullptr;
  tango_attention* attn = nullptr;
  REQUIRE(tango_synth(&spec, 11, &grid, &attn) == TANGO_OK);

  tango_salient* sel = tango_select(grid, attn, 5, 2.0, 3, nullptr, 0, 1, nullptr, nullptr, 1);
  REQUIRE(sel != nullptr);
  REQUIRE(tango_salient_count(sel) == 5);
  const size_t* idx = tango_salient_indices(sel);
  const uint32_t* cl = tango_salient_clusters(sel);
  for (size_t i = 0; i < 5; ++i) {
    CHECK(idx[i] < 64);
    CHECK(cl[i] < 5);
    if (i) CHECK(idx[i] > idx[i - 1]);
  }
  tango_salient_free(sel);

  // sinks must be excluded from the picks
  const uint32_t sinks[] = {0};
  tango_salient* masked = tango_select(grid, attn, 3, 2.0, 3, sinks, 1, 1, nullptr, nullptr, 1);
  REQUIRE(masked != nullptr);
  const size_t* midx = tango_salient_indices(masked);
  for (size_t i = 0; i < tango_salient_count(masked); ++i) CHECK(midx[i] % 16 != 0);
  tango_salient_free(masked);

  // attn = NULL derives global-query scores internally
  tango_salient* derived = tango_select(grid, nullptr, 4, 1.5, 3, nullptr, 0, 0, nullptr,
                                        nullptr, 1);
  REQUIRE(derived != nullptr);
  CHECK(tango_salient_count(derived) == 4);
  tango_salient_free(derived);

  tango_attention_free(attn);
  tango_grid_free(grid);
}

TEST_CASE("baselines through the C surface") {
  size_t out[3] = {0, 0, 0};
  REQUIRE(tango_uniform_sample(7, 3, out) == TANGO_OK);
  CHECK(out[0] == 0);
  CHECK(out[1] == 2);
  CHECK(out[2] == 5);
  CHECK(tango_uniform_sample(3, 5, out) == TANGO_CONFIG_ERROR);
  CHECK(tango_uniform_sample(3, 1, nullptr) == TANGO_INVALID_ARGUMENT);

  const float scores[] = {0.4f, 0.9f, 0.9f, 0.1f};
  size_t top[2] = {0, 0};
  REQUIRE(tango_topk(scores, 4, 2, top) == TANGO_OK);
  CHECK(top[0] == 1);
  CHECK(top[1] == 2);
}

TEST_CASE("prune through the C surface") {
  tango_synth_spec spec;
  tango_synth_spec_init(&spec);
  spec.frames = 8;
  spec.grid_h = 6;
  spec.grid_w = 6;
  spec.dim = 12;
  spec.n_blobs = 3;
  spec.noise_sigma = 0.3;

  tango_grid* grid = nullptr;
  tango_attention* attn = nullptr;
  REQUIRE(tango_synth(&spec, 5, &grid, &attn) == TANGO_OK);

  tango_prune_options opts;
  tango_prune_options_init(&opts);
  CHECK(opts.retention == 0.10);
  CHECK(opts.alpha == 1.5);
  CHECK(opts.split == 0.6);
  CHECK(opts.knn_k == 7);
  CHECK(opts.tau <= 0.0);  // derived by default

  opts.retention = 0.25;
  tango_pruned* pruned = tango_prune(grid, attn, &opts);
  REQUIRE(pruned != nullptr);

  tango_prune_audit audit;
  tango_pruned_audit(pruned, &audit);
  CHECK(audit.input_tokens == 288);
  CHECK(audit.budget == 72);
  CHECK(tango_pruned_count(pruned) == 72);
  CHECK(tango_pruned_dim(pruned) == 12);
  REQUIRE(tango_pruned_features(pruned) != nullptr);

  size_t salient = 0;
  for (size_t i = 0; i < tango_pruned_count(pruned); ++i) {
    tango_provenance prov = tango_pruned_provenance(pruned, i);
    if (prov == TANGO_PROV_SALIENT) ++salient;
    CHECK(tango_pruned_source_count(pruned, i) >= 1);
    tango_position3d p = tango_pruned_position(pruned, i);
    CHECK(p.h >= 1);
    CHECK(p.w >= 1);
  }
  CHECK(salient == audit.salient_out);
  CHECK(audit.salient_out + audit.merged_out == 72);
  tango_pruned_free(pruned);

  // attn = NULL runs on derived scores
  tango_pruned* derived = tango_prune(grid, nullptr, &opts);
  REQUIRE(derived != nullptr);
  CHECK(tango_pruned_count(derived) == 72);
  tango_pruned_free(derived);

  opts.retention = 0.0;
  CHECK(tango_prune(grid, attn, &opts) == nullptr);

  tango_attention_free(attn);
  tango_grid_free(grid);
}

TEST_CASE("cost model through the C surface") {
  tango_model_config cfg;
  tango_model_config_qwen2_7b(&cfg);
  CHECK(cfg.hidden == 3584);

  uint64_t flops = 0;
  REQUIRE(tango_llm_flops(6272, &cfg, &flops) == TANGO_OK);
  CHECK(flops == 97643799773184ull);

  double ratio = 0.0;
  REQUIRE(tango_coefficient_ratio(&cfg, &ratio) == TANGO_OK);
  CHECK(ratio == doctest::Approx(32512.0).epsilon(1e-9));

  std::vector<double> sched(28, 0.1);
  char buf[2048];
  REQUIRE(tango_flops_report(6272, &cfg, sched.data(), sched.size(), buf, sizeof buf) == TANGO_OK);
  CHECK(std::strstr(buf, "flops full:") != nullptr);
  CHECK(std::strstr(buf, "not wall-clock") != nullptr);

  CHECK(tango_llm_flops(0, &cfg, &flops) == TANGO_VALUE_ERROR);
  CHECK(tango_llm_flops(10, nullptr, &flops) == TANGO_INVALID_ARGUMENT);
  CHECK(tango_flops_report(100, &cfg, sched.data(), 5, buf, sizeof buf) == TANGO_VALUE_ERROR);
}

TEST_CASE("thread override is exposed") {
  tango_set_threads(2);
  tango_set_threads(0);
  CHECK(true);  // no crash, no state leak observable here
}
