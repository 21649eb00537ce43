#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "baselines.hpp"
#include "common.hpp"
#include "selection.hpp"
#include "token_grid.hpp"
#include "token_list.hpp"

using namespace tango;

namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

// Token list over one frame, positions strung along the h axis.
TokenList make_list(const std::vector<std::vector<float>>& feats,
                    const std::vector<float>& scores) {
  TokenList list;
  list.dim = static_cast<std::uint32_t>(feats[0].size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    list.features.insert(list.features.end(), feats[i].begin(), feats[i].end());
    list.positions.push_back({1.0, static_cast<std::int32_t>(i + 1), 1});
    list.segment.push_back(0);
    list.source_count.push_back(1);
    list.pooled.push_back(0);
  }
  list.scores = scores;
  return list;
}

// Two well-separated feature modes; mode A outranks all of mode B on score.
TokenList two_mode_list() {
  std::vector<std::vector<float>> feats;
  std::vector<float> scores;
  for (int i = 0; i < 3; ++i) {
    feats.push_back({10.f, 10.f + 0.1f * i, 0.f, 0.f, 0.f, 0.f});
    scores.push_back(0.9f - 0.05f * i);  // 0.9 0.85 0.8
  }
  for (int i = 0; i < 3; ++i) {
    feats.push_back({-10.f, -10.f - 0.1f * i, 0.f, 0.f, 0.f, 0.f});
    scores.push_back(0.7f - 0.05f * i);  // 0.7 0.65 0.6
  }
  return make_list(feats, scores);
}

RopeConfig rope6() {
  RopeConfig cfg;
  cfg.d_t = cfg.d_h = cfg.d_w = 2;
  return cfg;
}

Status code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Status::ok;
}

}  // namespace

TEST_CASE("global query scores softmax the mean-query logits") {
  // one frame, two 1-d tokens {2, 0}: query = 1, logits = {2, 0}
  TokenGrid g(1, 1, 2, 1, {2.f, 0.f}, {0.f});
  AttentionMap attn = global_query_scores(g);
  double z = std::exp(2.0) + 1.0;
  CHECK(attn.at(0, 0) == doctest::Approx(std::exp(2.0) / z).epsilon(1e-6));
  CHECK(attn.at(0, 1) == doctest::Approx(1.0 / z).epsilon(1e-6));

  // scores are a distribution per frame
  TokenGrid g2(2, 2, 2, 3,
               {1.f, 0.f, 2.f, 0.f, 1.f, 1.f, .5f, .5f, .5f, 3.f, 0.f, 0.f,
                1.f, 2.f, 0.f, 0.f, 1.f, 2.f, 2.f, 1.f, 0.f, 1.f, 1.f, 1.f},
               {1.f, 2.f});
  AttentionMap a2 = global_query_scores(g2);
  for (std::uint32_t f = 0; f < 2; ++f) {
    double sum = 0.0;
    for (std::uint32_t c = 0; c < 4; ++c) sum += a2.at(f, c);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("sink masking hits every frame") {
  AttentionMap attn(2, 3, {1.f, 2.f, 3.f, 4.f, 5.f, 6.f});
  SinkSpec sink;
  sink.indices = {1};
  AttentionMap masked = mask_sinks(attn, sink);
  CHECK(masked.at(0, 1) == kNegInf);
  CHECK(masked.at(1, 1) == kNegInf);
  CHECK(masked.at(0, 0) == 1.f);
  CHECK(masked.at(1, 2) == 6.f);

  SinkSpec bad;
  bad.indices = {3};
  CHECK(code_of([&] { mask_sinks(attn, bad); }) == Status::range_error);
}

TEST_CASE("candidate expansion covers both modes where topk cannot") {
  TokenList list = two_mode_list();
  SelectParams params;
  params.k = 2;
  params.alpha = 3.0;   // candidate pool = all six tokens
  params.knn_k = 3;
  params.use_dist_st = false;

  SalientSet sel = select_salient(list, params, rope6());
  REQUIRE(sel.indices.size() == 2);
  // the cluster winners are the score leaders of each mode
  CHECK(sel.indices[0] == 0);
  CHECK(sel.indices[1] == 3);

  // plain top-k drowns in mode A
  auto top = topk_select(list.scores, 2);
  CHECK(top == std::vector<std::size_t>{0, 1});
}

TEST_CASE("alpha = 1 collapses to plain top-k") {
  TokenList list = two_mode_list();
  SelectParams params;
  params.k = 3;
  params.alpha = 1.0;
  params.knn_k = 3;
  params.use_dist_st = false;

  SalientSet sel = select_salient(list, params, rope6());
  auto top = topk_select(list.scores, 3);
  CHECK(sel.indices == top);
  CHECK(sel.candidates == top);
}

TEST_CASE("masked tokens never enter the candidate pool") {
  TokenList list = two_mode_list();
  list.scores[0] = kNegInf;
  list.scores[1] = kNegInf;
  SelectParams params;
  params.k = 2;
  params.alpha = 3.0;
  params.knn_k = 3;
  params.use_dist_st = false;

  SalientSet sel = select_salient(list, params, rope6());
  for (std::size_t idx : sel.indices) CHECK(idx >= 2);
  for (std::size_t idx : sel.candidates) CHECK(idx >= 2);

  // fully masked input has no candidates at all
  for (auto& s : list.scores) s = kNegInf;
  CHECK(code_of([&] { select_salient(list, params, rope6()); }) == Status::no_candidates);
}

TEST_CASE("selection validation") {
  TokenList list = two_mode_list();
  SelectParams params;
  params.use_dist_st = false;

  params.k = 0;
  CHECK(code_of([&] { select_salient(list, params, rope6()); }) == Status::config_error);
  params.k = 7;  // more than the six tokens
  CHECK(code_of([&] { select_salient(list, params, rope6()); }) == Status::config_error);
  params.k = 2;
  params.alpha = 0.5;
  CHECK(code_of([&] { select_salient(list, params, rope6()); }) == Status::config_error);
  params.alpha = 1.5;

  TokenList no_scores = list;
  no_scores.scores.clear();
  CHECK(code_of([&] { select_salient(no_scores, params, rope6()); }) == Status::value_error);

  TokenList nan_scores = list;
  nan_scores.scores[2] = std::nanf("");
  CHECK(code_of([&] { select_salient(nan_scores, params, rope6()); }) == Status::value_error);
}

TEST_CASE("selected indices are sorted, unique, inside the candidate pool") {
  Rng rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t n = 12 + rng.below(20);
    std::vector<std::vector<float>> feats(n, std::vector<float>(6));
    std::vector<float> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : feats[i]) v = static_cast<float>(rng.normal());
      scores[i] = static_cast<float>(rng.uniform());
    }
    TokenList list = make_list(feats, scores);

    SelectParams params;
    params.k = 3 + rng.below(4);
    params.alpha = 1.0 + 0.5 * static_cast<double>(rng.below(4));
    params.knn_k = 3;
    params.use_dist_st = rng.below(2) == 0;

    SalientSet sel = select_salient(list, params, rope6());
    CHECK(sel.indices.size() == params.k);
    CHECK(sel.cluster_of.size() == params.k);
    CHECK(std::is_sorted(sel.indices.begin(), sel.indices.end()));
    CHECK(std::adjacent_find(sel.indices.begin(), sel.indices.end()) == sel.indices.end());
    CHECK(std::is_sorted(sel.candidates.begin(), sel.candidates.end()));
    std::size_t expect_pool = std::min<std::size_t>(
        static_cast<std::size_t>(params.alpha * static_cast<double>(params.k)), n);
    CHECK(sel.candidates.size() == std::max<std::size_t>(expect_pool, params.k));
    for (std::size_t idx : sel.indices)
      CHECK(std::binary_search(sel.candidates.begin(), sel.candidates.end(), idx));
  }
}

TEST_CASE("dist_st separates an identical-feature pair, cosine cannot") {
  // tokens 0 and 1 share one feature vector but sit far apart on the grid;
  // token 2 is nearby with a different vector. Under dist_st the remote twin
  // forms its own cluster, so both score leaders 0 and 1 survive. Under the
  // raw-feature metric the twins are distance 0 and collapse together.
  std::vector<std::vector<float>> feats = {
      {1.f, 0.f, 1.f, 0.f, 1.f, 0.f},
      {1.f, 0.f, 1.f, 0.f, 1.f, 0.f},
      {0.f, 1.f, 0.f, 1.f, 0.f, 1.f},
  };
  std::vector<float> scores = {0.9f, 0.8f, 0.7f};
  TokenList list = make_list(feats, scores);
  list.positions[0] = {1.0, 1, 1};
  list.positions[1] = {1.0, 30, 1};  // spatially remote twin
  list.positions[2] = {1.0, 1, 2};

  SelectParams params;
  params.k = 2;
  params.alpha = 2.0;
  params.knn_k = 2;
  params.use_dist_st = true;

  SalientSet sel = select_salient(list, params, rope6());
  CHECK(sel.indices == std::vector<std::size_t>{0, 1});

  params.use_dist_st = false;
  SalientSet flat = select_salient(list, params, rope6());
  CHECK(flat.indices == std::vector<std::size_t>{0, 2});
}

TEST_CASE("rope dim mismatch is rejected") {
  TokenList list = two_mode_list();
  SelectParams params;
  params.k = 2;
  params.use_dist_st = true;
  RopeConfig wrong;
  wrong.d_t = wrong.d_h = wrong.d_w = 4;  // dim 12 against 6-wide tokens
  CHECK(code_of([&] { select_salient(list, params, wrong); }) == Status::config_error);
}
