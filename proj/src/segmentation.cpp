#include "segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tango {
namespace {

void check_cfg(const SegConfig& cfg) {
  if (!(cfg.tau > 0.0) || !(cfg.tau <= 1.0))
    fail(Status::config_error, "tau must be in (0, 1]");
}

void check_window(const TokenGrid& grid, std::uint32_t t_s, std::uint32_t t_e) {
  if (t_s < 1 || t_s >= t_e || t_e > grid.frames() + 1)
    fail(Status::range_error, "segment window out of range");
}

// adj[t*N + k] = 1 iff cell k is static between frames t and t+1 (0-based t).
std::vector<std::uint8_t> adjacent_static(const TokenGrid& grid, double tau) {
  std::uint32_t T = grid.frames(), N = grid.cells();
  if (T < 2) return {};
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(T - 1) * N);
  parallel_for(T - 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t)
      for (std::uint32_t k = 0; k < N; ++k) {
        double c = cosine(grid.token(static_cast<std::uint32_t>(t), k),
                          grid.token(static_cast<std::uint32_t>(t + 1), k));
        adj[t * N + k] = c > tau ? 1 : 0;
      }
  });
  return adj;
}

struct DpCell {
  std::uint64_t value = 0;
  std::uint32_t segs = 0;
};

}  // namespace

std::vector<std::uint8_t> static_mask(const TokenGrid& grid, std::uint32_t t_s, std::uint32_t t_e,
                                      const SegConfig& cfg) {
  check_cfg(cfg);
  check_window(grid, t_s, t_e);
  std::uint32_t N = grid.cells();
  std::vector<std::uint8_t> mask(N, 1);
  for (std::uint32_t t = t_s - 1; t + 1 < t_e - 1; ++t)
    for (std::uint32_t k = 0; k < N; ++k)
      if (mask[k] && !(cosine(grid.token(t, k), grid.token(t + 1, k)) > cfg.tau)) mask[k] = 0;
  return mask;
}

std::uint64_t prunable_count(const TokenGrid& grid, std::uint32_t t_s, std::uint32_t t_e,
                             const SegConfig& cfg) {
  std::vector<std::uint8_t> mask = static_mask(grid, t_s, t_e, cfg);
  std::uint64_t n_static = 0;
  for (std::uint8_t m : mask) n_static += m;
  return n_static * (t_e - t_s - 1);
}

SegmentPlan optimal_segmentation(const TokenGrid& grid, const SegConfig& cfg) {
  check_cfg(cfg);
  std::uint32_t T = grid.frames(), N = grid.cells();
  std::uint32_t max_len = cfg.max_segment_len == 0 ? T : cfg.max_segment_len;
  std::vector<std::uint8_t> adj = adjacent_static(grid, cfg.tau);

  // Suffix DP over 1-based boundaries: dp[j] = best (value, segs) tiling
  // [j, T+1). The per-start histogram cnt[L] = #{cells static through L
  // adjacent pairs} turns every g(j, i) lookup into O(1).
  std::vector<DpCell> dp(T + 2);
  dp[T + 1] = {0, 0};
  std::vector<std::uint32_t> run(N, 0);  // suffix static-run length at current start
  std::vector<std::uint64_t> cnt(T + 1, 0);
  for (std::uint32_t j = T; j >= 1; --j) {
    std::uint32_t s = j - 1;
    if (s + 1 < T)
      for (std::uint32_t k = 0; k < N; ++k)
        run[k] = adj[static_cast<std::size_t>(s) * N + k] ? run[k] + 1 : 0;
    std::uint32_t max_run = T - j;  // run[k] <= T-1-s
    std::fill(cnt.begin(), cnt.begin() + max_run + 1, 0);
    for (std::uint32_t k = 0; k < N; ++k) ++cnt[std::min(run[k], max_run)];
    for (std::uint32_t L = max_run; L > 0; --L) cnt[L - 1] += cnt[L];

    DpCell best;
    bool have = false;
    std::uint32_t i_hi = std::min<std::uint64_t>(T + 1, static_cast<std::uint64_t>(j) + max_len);
    for (std::uint32_t i = j + 1; i <= i_hi; ++i) {
      std::uint32_t L = i - j - 1;
      std::uint64_t g = cnt[L] * L;
      DpCell cand{g + dp[i].value, 1 + dp[i].segs};
      if (!have || cand.value > best.value ||
          (cand.value == best.value && cand.segs < best.segs)) {
        best = cand;
        have = true;
      }
    }
    dp[j] = best;
  }

  // Rebuild left to right, taking the smallest boundary that preserves the
  // (value, segs) optimum; this realizes the lexicographic tie rule.
  SegmentPlan plan;
  plan.total_prunable = dp[1].value;
  std::uint32_t j = 1;
  while (j <= T) {
    std::uint32_t i_hi = std::min<std::uint64_t>(T + 1, static_cast<std::uint64_t>(j) + max_len);
    std::uint32_t pick = 0;

    // Recompute this start's cnt row (runs are cheap to rebuild forward).
    std::vector<std::uint32_t> run_j(N, 0);
    for (std::uint32_t k = 0; k < N; ++k) {
      std::uint32_t r = 0, t = j - 1;
      while (t + 1 < T && adj[static_cast<std::size_t>(t) * N + k]) ++r, ++t;
      run_j[k] = r;
    }
    std::uint32_t max_run = T - j;
    std::vector<std::uint64_t> cnt_j(max_run + 2, 0);
    for (std::uint32_t k = 0; k < N; ++k) ++cnt_j[std::min(run_j[k], max_run)];
    for (std::uint32_t L = max_run; L > 0; --L) cnt_j[L - 1] += cnt_j[L];

    for (std::uint32_t i = j + 1; i <= i_hi; ++i) {
      std::uint32_t L = i - j - 1;
      std::uint64_t g = cnt_j[L] * L;
      if (g + dp[i].value == dp[j].value && 1 + dp[i].segs == dp[j].segs) {
        pick = i;
        break;
      }
    }
    Segment seg;
    seg.t_s = j;
    seg.t_e = pick;
    seg.static_mask.assign(N, 1);
    for (std::uint32_t k = 0; k < N; ++k)
      if (run_j[k] < pick - j - 1) seg.static_mask[k] = 0;
    plan.segments.push_back(std::move(seg));
    j = pick;
  }
  return plan;
}

TokenList pool_static(const TokenGrid& grid, const SegmentPlan& plan, const AttentionMap* attn,
                      bool timestamp_aligned) {
  std::uint32_t T = grid.frames(), N = grid.cells(), d = grid.dim();
  std::uint32_t expect = 1;
  for (const Segment& seg : plan.segments) {
    if (seg.t_s != expect || seg.t_e <= seg.t_s || seg.static_mask.size() != N)
      fail(Status::value_error, "segment plan does not tile the grid");
    expect = seg.t_e;
  }
  if (expect != T + 1) fail(Status::value_error, "segment plan does not cover all frames");
  if (attn && (attn->frames() != T || attn->per_frame() != N))
    fail(Status::value_error, "attention shape does not match grid");

  TokenList out;
  out.dim = d;
  std::uint64_t total = 0;
  for (const Segment& seg : plan.segments) {
    std::uint64_t n_static = 0;
    for (std::uint8_t m : seg.static_mask) n_static += m;
    total += static_cast<std::uint64_t>(N) * seg.len() - n_static * (seg.len() - 1);
  }
  out.features.reserve(total * d);
  out.positions.reserve(total);
  out.segment.reserve(total);
  out.source_count.reserve(total);
  out.pooled.reserve(total);
  if (attn) out.scores.reserve(total);

  constexpr float kNegInf = -std::numeric_limits<float>::infinity();
  std::vector<double> acc(d);
  for (std::uint32_t si = 0; si < plan.segments.size(); ++si) {
    const Segment& seg = plan.segments[si];
    std::uint32_t len = seg.len();
    for (std::uint32_t k = 0; k < N; ++k) {
      bool pool = len > 1 && seg.static_mask[k];
      if (pool) {
        std::fill(acc.begin(), acc.end(), 0.0);
        double score_acc = 0.0;
        bool masked = false;
        for (std::uint32_t t = seg.t_s - 1; t < seg.t_e - 1; ++t) {
          std::span<const float> x = grid.token(t, k);
          for (std::uint32_t c = 0; c < d; ++c) acc[c] += x[c];
          if (attn) {
            float s = attn->at(t, k);
            if (s == kNegInf)
              masked = true;
            else
              score_acc += s;
          }
        }
        for (std::uint32_t c = 0; c < d; ++c)
          out.features.push_back(static_cast<float>(acc[c] / len));
        out.positions.push_back(grid.position(seg.t_s - 1, k, timestamp_aligned));
        out.segment.push_back(si);
        out.source_count.push_back(len);
        out.pooled.push_back(1);
        if (attn) out.scores.push_back(masked ? kNegInf : static_cast<float>(score_acc / len));
      } else {
        std::span<const float> x = grid.token(seg.t_s - 1, k);
        out.features.insert(out.features.end(), x.begin(), x.end());
        out.positions.push_back(grid.position(seg.t_s - 1, k, timestamp_aligned));
        out.segment.push_back(si);
        out.source_count.push_back(1);
        out.pooled.push_back(0);
        if (attn) out.scores.push_back(attn->at(seg.t_s - 1, k));
      }
    }
    for (std::uint32_t t = seg.t_s; t < seg.t_e - 1; ++t)
      for (std::uint32_t k = 0; k < N; ++k) {
        if (seg.static_mask[k]) continue;
        std::span<const float> x = grid.token(t, k);
        out.features.insert(out.features.end(), x.begin(), x.end());
        out.positions.push_back(grid.position(t, k, timestamp_aligned));
        out.segment.push_back(si);
        out.source_count.push_back(1);
        out.pooled.push_back(0);
        if (attn) out.scores.push_back(attn->at(t, k));
      }
  }
  return out;
}

}  // namespace tango
