#include "selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tango {

AttentionMap global_query_scores(const TokenGrid& grid) {
  std::uint32_t T = grid.frames(), N = grid.cells(), d = grid.dim();
  std::vector<float> scores(static_cast<std::size_t>(T) * N);
  double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  parallel_for(T, [&](std::size_t begin, std::size_t end) {
    std::vector<double> q(d), logits(N);
    for (std::size_t f = begin; f < end; ++f) {
      auto frame = static_cast<std::uint32_t>(f);
      std::fill(q.begin(), q.end(), 0.0);
      for (std::uint32_t k = 0; k < N; ++k) {
        std::span<const float> x = grid.token(frame, k);
        for (std::uint32_t c = 0; c < d; ++c) q[c] += x[c];
      }
      for (std::uint32_t c = 0; c < d; ++c) q[c] /= N;
      double max_logit = -std::numeric_limits<double>::infinity();
      for (std::uint32_t k = 0; k < N; ++k) {
        std::span<const float> x = grid.token(frame, k);
        double dot = 0.0;
        for (std::uint32_t c = 0; c < d; ++c) dot += q[c] * x[c];
        logits[k] = dot * inv_sqrt_d;
        max_logit = std::max(max_logit, logits[k]);
      }
      double z = 0.0;
      for (std::uint32_t k = 0; k < N; ++k) z += std::exp(logits[k] - max_logit);
      for (std::uint32_t k = 0; k < N; ++k)
        scores[f * N + k] = static_cast<float>(std::exp(logits[k] - max_logit) / z);
    }
  });
  return AttentionMap(T, N, std::move(scores));
}

AttentionMap mask_sinks(const AttentionMap& attn, const SinkSpec& sink) {
  for (std::uint32_t idx : sink.indices)
    if (idx >= attn.per_frame()) fail(Status::range_error, "sink index out of range");
  std::vector<float> scores = attn.scores();
  constexpr float kNegInf = -std::numeric_limits<float>::infinity();
  for (std::uint32_t f = 0; f < attn.frames(); ++f)
    for (std::uint32_t idx : sink.indices)
      scores[static_cast<std::size_t>(f) * attn.per_frame() + idx] = kNegInf;
  return AttentionMap(attn.frames(), attn.per_frame(), std::move(scores));
}

SalientSet select_salient(const TokenList& tokens, const SelectParams& params,
                          const RopeConfig& rope_cfg) {
  if (params.k == 0) fail(Status::config_error, "salient budget must be >= 1");
  if (!(params.alpha >= 1.0)) fail(Status::config_error, "alpha must be >= 1");
  std::size_t n = tokens.size();
  if (tokens.scores.size() != n) fail(Status::value_error, "tokens carry no aligned scores");
  if (params.k > n) fail(Status::config_error, "salient budget exceeds token count");

  constexpr float kNegInf = -std::numeric_limits<float>::infinity();
  std::vector<std::size_t> unmasked;
  unmasked.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(tokens.scores[i])) fail(Status::value_error, "NaN attention score");
    if (tokens.scores[i] != kNegInf) unmasked.push_back(i);
  }
  if (unmasked.empty()) fail(Status::no_candidates, "every token is masked");

  std::size_t k_bar = static_cast<std::size_t>(params.alpha * static_cast<double>(params.k));
  k_bar = std::min(std::max(k_bar, params.k), unmasked.size());
  std::size_t k = std::min(params.k, k_bar);

  // Top-k_bar by (score desc, index asc); stable under the total order.
  std::vector<std::size_t> cand = unmasked;
  std::nth_element(cand.begin(), cand.begin() + (k_bar - 1), cand.end(),
                   [&](std::size_t a, std::size_t b) {
                     return tokens.scores[a] > tokens.scores[b] ||
                            (tokens.scores[a] == tokens.scores[b] && a < b);
                   });
  cand.resize(k_bar);
  std::sort(cand.begin(), cand.end());

  SalientSet out;
  out.candidates = cand;

  // Rotated normalized candidate features; dist_st on them is plain Euclidean.
  DistanceFn dist;
  std::uint32_t d = tokens.dim;
  std::vector<float> metric_feats(k_bar * d);
  if (params.use_dist_st) {
    if (rope_cfg.dim() != d) fail(Status::config_error, "rope config does not match token dim");
    Rope rope(rope_cfg);
    parallel_for(k_bar, [&](std::size_t begin, std::size_t end) {
      std::vector<float> unit(d);
      for (std::size_t c = begin; c < end; ++c) {
        std::span<const float> x = tokens.feature(cand[c]);
        double sq = 0.0;
        for (float v : x) sq += static_cast<double>(v) * v;
        if (sq == 0.0) {
          std::copy(x.begin(), x.end(), unit.begin());
        } else {
          double inv = 1.0 / std::sqrt(sq);
          for (std::uint32_t v = 0; v < d; ++v) unit[v] = static_cast<float>(x[v] * inv);
        }
        rope.rotate(unit, tokens.positions[cand[c]],
                    std::span<float>(metric_feats.data() + c * d, d));
      }
    });
  } else {
    for (std::size_t c = 0; c < k_bar; ++c) {
      std::span<const float> x = tokens.feature(cand[c]);
      std::copy(x.begin(), x.end(), metric_feats.begin() + c * d);
    }
  }
  dist = euclidean_distance(metric_feats, d);

  ClusterParams cp;
  cp.k = k;
  cp.knn_k = params.knn_k;
  ClusterResult cr = cluster(k_bar, dist, cp);

  // Highest attention per cluster, ties toward the lower global index.
  std::vector<std::size_t> winner(k, k_bar);
  for (std::size_t c = 0; c < k_bar; ++c) {
    std::uint32_t label = cr.assignment[c];
    std::size_t cur = winner[label];
    if (cur == k_bar || tokens.scores[cand[c]] > tokens.scores[cand[cur]]) winner[label] = c;
  }
  std::vector<std::pair<std::size_t, std::uint32_t>> picked;
  picked.reserve(k);
  for (std::uint32_t label = 0; label < k; ++label) {
    if (winner[label] == k_bar) fail(Status::value_error, "empty cluster in selection");
    picked.emplace_back(cand[winner[label]], label);
  }
  std::sort(picked.begin(), picked.end());
  for (auto& [idx, label] : picked) {
    out.indices.push_back(idx);
    out.cluster_of.push_back(label);
  }
  return out;
}

}  // namespace tango
