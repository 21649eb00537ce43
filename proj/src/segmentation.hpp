#pragma once

#include <cstdint>
#include <vector>

#include "token_grid.hpp"
#include "token_list.hpp"

namespace tango {

struct SegConfig {
  double tau = 0.8;                  // static-similarity threshold, in (0,1]
  std::uint32_t max_segment_len = 0; // frames per segment; 0 = unbounded
};

// Half-open frame window [t_s, t_e), 1-based, 1 <= t_s < t_e <= T+1.
struct Segment {
  std::uint32_t t_s = 0;
  std::uint32_t t_e = 0;
  std::vector<std::uint8_t> static_mask;  // H'*W' flags

  std::uint32_t len() const { return t_e - t_s; }
};

struct SegmentPlan {
  std::vector<Segment> segments;    // tile [1, T+1) contiguously
  std::uint64_t total_prunable = 0; // sum of g(t_s, t_e) over segments
};

// mask[k] true iff cos(h_{t,k}, h_{t+1,k}) > tau for every adjacent pair in
// the window; a single-frame window is all-true (empty product).
std::vector<std::uint8_t> static_mask(const TokenGrid& grid, std::uint32_t t_s, std::uint32_t t_e,
                                      const SegConfig& cfg);

// g(t_s, t_e) = |static cells| * (t_e - t_s - 1).
std::uint64_t prunable_count(const TokenGrid& grid, std::uint32_t t_s, std::uint32_t t_e,
                             const SegConfig& cfg);

// Maximizes total prunable static tokens over all contiguous segmentations
// via dp[i] = max_j dp[j] + g(j,i). Ties: fewer segments, then the
// lexicographically earliest boundary list.
SegmentPlan optimal_segmentation(const TokenGrid& grid, const SegConfig& cfg);

// Average-pools each segment's static tokens into the first frame of the
// segment; everything else passes through bitwise unchanged. Output order is
// (frame, cell) ascending with pooled tokens sitting at frame t_s. When attn
// is given, output scores are carried along (pooled = mean; -inf propagates).
TokenList pool_static(const TokenGrid& grid, const SegmentPlan& plan,
                      const AttentionMap* attn = nullptr, bool timestamp_aligned = true);

}  // namespace tango
