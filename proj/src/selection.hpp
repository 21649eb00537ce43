#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpc_knn.hpp"
#include "strope.hpp"
#include "token_grid.hpp"
#include "token_list.hpp"

namespace tango {

struct SelectParams {
  std::size_t k = 1;        // salient budget
  double alpha = 1.5;       // candidate expansion, >= 1
  std::uint32_t knn_k = 7;
  SinkSpec sink;
  bool use_dist_st = true;  // cluster candidates under dist_st, else Euclidean
};

struct SalientSet {
  std::vector<std::size_t> indices;     // selected token ids, ascending
  std::vector<std::size_t> candidates;  // the top-floor(alpha*k) pool, ascending
  std::vector<std::uint32_t> cluster_of;  // cluster per selected token
};

// Per frame: query = mean token, scores = softmax(q . x_i / sqrt(d)).
AttentionMap global_query_scores(const TokenGrid& grid);

// Returns attn with sink cells forced to -inf in every frame.
AttentionMap mask_sinks(const AttentionMap& attn, const SinkSpec& sink);

// Candidate expansion to top-floor(alpha*k) by score, DPC-KNN into k
// clusters, then the highest-scoring member of each cluster. tokens.scores
// must be populated (-inf = masked). k is clamped to the candidate count.
SalientSet select_salient(const TokenList& tokens, const SelectParams& params,
                          const RopeConfig& rope_cfg);

}  // namespace tango
