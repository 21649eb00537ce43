#pragma once

#include <cstdint>
#include <vector>

#include "segmentation.hpp"
#include "selection.hpp"
#include "strope.hpp"
#include "token_grid.hpp"
#include "token_list.hpp"

namespace tango {

enum class Provenance : std::uint8_t { salient, merged, pooled_static };

struct PruneConfig {
  double retention = 0.10;   // in (0, 1]
  double budget_split = 0.6; // salient fraction of the budget
  SegConfig seg;
  SelectParams select;
  RopeConfig rope;           // zero dims = derive via default_partition
  bool timestamp_aligned = true;
  bool budget_from_survivors = false;  // base B on post-segmentation count
};

struct PrunedOutput {
  std::uint32_t dim = 0;
  std::vector<float> features;             // n x dim
  std::vector<Position3D> positions;       // (timestamp, h, w) ascending
  std::vector<Provenance> provenance;
  std::vector<std::uint32_t> source_counts;
  std::size_t size() const { return positions.size(); }
};

// Counters recorded while pruning; lets tests audit each stage exactly.
struct PruneAudit {
  std::uint64_t input_tokens = 0;
  std::uint64_t budget = 0;
  std::uint64_t k_salient = 0;
  std::uint64_t k_merge = 0;
  std::uint64_t survivors = 0;      // tokens after static pooling
  std::uint64_t salient_out = 0;
  std::uint64_t merged_out = 0;
  std::uint64_t segments = 0;
  std::uint64_t static_pooled = 0;  // pooled tokens emitted by segmentation
};

// B = round(retention * total); salient share = round(split * B), remainder
// merges; both floored at 1 when B >= 2. B = 0 is an error.
struct Budget {
  std::uint64_t total = 0;
  std::uint64_t k_salient = 0;
  std::uint64_t k_merge = 0;
};
Budget allocate_budget(std::uint64_t total_tokens, double retention, double split);

// Largest-remainder apportionment of `total` proportional to weights;
// result[i] <= weights[i], sum = min(total, sum(weights)). Remainder ties go
// to the lower index.
std::vector<std::uint64_t> apportion(std::uint64_t total, std::span<const std::uint64_t> weights);

// Clusters one segment's residual tokens under dist_st on normalized+rotated
// features, average-pools raw features per cluster, and positions each merged
// token at its cluster center. k_seg = 0 yields nothing; k_seg >= n passes
// tokens through.
TokenList merge_segment(const TokenList& tokens, std::span<const std::size_t> members,
                        std::size_t k_seg, const RopeConfig& rope_cfg, std::uint32_t knn_k);

// Full pipeline: segmentation + static pooling, global salient selection,
// per-segment merging of the remainder, spatio-temporal output ordering.
PrunedOutput prune_video(const TokenGrid& grid, const AttentionMap& attn, const PruneConfig& cfg,
                         PruneAudit* audit = nullptr);

const char* provenance_name(Provenance p);

}  // namespace tango
