#include "merging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace tango {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::salient: return "salient";
    case Provenance::merged: return "merged";
    case Provenance::pooled_static: return "pooled_static";
  }
  return "unknown";
}

Budget allocate_budget(std::uint64_t total_tokens, double retention, double split) {
  if (total_tokens == 0) fail(Status::value_error, "no input tokens");
  if (!(retention > 0.0) || !(retention <= 1.0))
    fail(Status::config_error, "retention must be in (0, 1]");
  if (!(split >= 0.0) || !(split <= 1.0))
    fail(Status::config_error, "budget split must be in [0, 1]");
  Budget b;
  b.total = static_cast<std::uint64_t>(
      std::llround(retention * static_cast<double>(total_tokens)));
  if (b.total == 0) fail(Status::config_error, "retention budget rounds to zero tokens");
  b.total = std::min(b.total, total_tokens);
  b.k_salient = static_cast<std::uint64_t>(std::llround(split * static_cast<double>(b.total)));
  b.k_salient = std::min(b.k_salient, b.total);
  if (b.total >= 2 && split > 0.0 && split < 1.0)
    b.k_salient = std::clamp<std::uint64_t>(b.k_salient, 1, b.total - 1);
  b.k_merge = b.total - b.k_salient;
  return b;
}

std::vector<std::uint64_t> apportion(std::uint64_t total, std::span<const std::uint64_t> weights) {
  std::size_t n = weights.size();
  std::vector<std::uint64_t> out(n, 0);
  unsigned __int128 w_sum = 0;
  for (std::uint64_t w : weights) w_sum += w;
  if (w_sum == 0) return out;
  if (total >= w_sum) {
    std::copy(weights.begin(), weights.end(), out.begin());
    return out;
  }
  std::vector<unsigned __int128> rem(n);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    unsigned __int128 num = static_cast<unsigned __int128>(total) * weights[i];
    out[i] = static_cast<std::uint64_t>(num / w_sum);
    rem[i] = num % w_sum;
    assigned += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rem[a] > rem[b] || (rem[a] == rem[b] && a < b);
  });
  for (std::size_t t = 0; t < total - assigned; ++t) ++out[order[t]];
  return out;
}

TokenList merge_segment(const TokenList& tokens, std::span<const std::size_t> members,
                        std::size_t k_seg, const RopeConfig& rope_cfg, std::uint32_t knn_k) {
  TokenList out;
  out.dim = tokens.dim;
  std::size_t n = members.size();
  if (k_seg == 0 || n == 0) return out;

  if (k_seg >= n) {
    for (std::size_t i : members) {
      std::span<const float> x = tokens.feature(i);
      out.features.insert(out.features.end(), x.begin(), x.end());
      out.positions.push_back(tokens.positions[i]);
      out.segment.push_back(tokens.segment[i]);
      out.source_count.push_back(tokens.source_count[i]);
      out.pooled.push_back(tokens.pooled[i]);
    }
    return out;
  }

  std::uint32_t d = tokens.dim;
  if (rope_cfg.dim() != d) fail(Status::config_error, "rope config does not match token dim");
  Rope rope(rope_cfg);
  std::vector<float> raw(n * d), metric(n * d);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<float> unit(d);
    for (std::size_t m = begin; m < end; ++m) {
      std::span<const float> x = tokens.feature(members[m]);
      std::copy(x.begin(), x.end(), raw.begin() + m * d);
      double sq = 0.0;
      for (float v : x) sq += static_cast<double>(v) * v;
      if (sq == 0.0) {
        std::copy(x.begin(), x.end(), unit.begin());
      } else {
        double inv = 1.0 / std::sqrt(sq);
        for (std::uint32_t c = 0; c < d; ++c) unit[c] = static_cast<float>(x[c] * inv);
      }
      rope.rotate(unit, tokens.positions[members[m]],
                  std::span<float>(metric.data() + m * d, d));
    }
  });

  ClusterParams cp;
  cp.k = k_seg;
  cp.knn_k = knn_k;
  ClusterResult cr = cluster(n, euclidean_distance(metric, d), cp);
  PooledClusters pooled = pool_clusters(raw, d, cr);

  for (std::size_t c = 0; c < k_seg; ++c) {
    std::size_t center_global = members[cr.centers[c]];
    out.features.insert(out.features.end(), pooled.means.begin() + c * d,
                        pooled.means.begin() + (c + 1) * d);
    out.positions.push_back(tokens.positions[center_global]);
    out.segment.push_back(tokens.segment[center_global]);
    if (pooled.counts[c] == 1) {
      out.source_count.push_back(tokens.source_count[center_global]);
      out.pooled.push_back(tokens.pooled[center_global]);
    } else {
      std::uint32_t sum = 0;
      for (std::size_t m = 0; m < n; ++m)
        if (cr.assignment[m] == c) sum += tokens.source_count[members[m]];
      out.source_count.push_back(sum);
      out.pooled.push_back(0);
    }
  }
  return out;
}

namespace {

struct OutputToken {
  Position3D pos;
  std::span<const float> feature;
  Provenance prov;
  std::uint32_t sources;
};

bool position_less(const Position3D& a, const Position3D& b) {
  return std::tie(a.t, a.h, a.w) < std::tie(b.t, b.h, b.w);
}

PrunedOutput assemble(std::uint32_t dim, std::vector<OutputToken>& items) {
  std::sort(items.begin(), items.end(),
            [](const OutputToken& a, const OutputToken& b) { return position_less(a.pos, b.pos); });
  PrunedOutput out;
  out.dim = dim;
  out.features.reserve(items.size() * dim);
  out.positions.reserve(items.size());
  out.provenance.reserve(items.size());
  out.source_counts.reserve(items.size());
  for (const OutputToken& it : items) {
    out.features.insert(out.features.end(), it.feature.begin(), it.feature.end());
    out.positions.push_back(it.pos);
    out.provenance.push_back(it.prov);
    out.source_counts.push_back(it.sources);
  }
  return out;
}

}  // namespace

PrunedOutput prune_video(const TokenGrid& grid, const AttentionMap& attn, const PruneConfig& cfg,
                         PruneAudit* audit) {
  if (attn.frames() != grid.frames() || attn.per_frame() != grid.cells())
    fail(Status::value_error, "attention shape does not match grid");
  std::uint64_t total = grid.total_tokens();
  PruneAudit local;
  PruneAudit& au = audit ? *audit : local;
  au = PruneAudit{};
  au.input_tokens = total;

  if (!cfg.budget_from_survivors) {
    Budget b = allocate_budget(total, cfg.retention, cfg.budget_split);
    au.budget = b.total;
    au.k_salient = b.k_salient;
    au.k_merge = b.k_merge;
    if (b.total >= total) {
      // Full retention: the pipeline must reproduce the input bitwise.
      std::vector<OutputToken> items;
      items.reserve(total);
      for (std::uint32_t t = 0; t < grid.frames(); ++t)
        for (std::uint32_t k = 0; k < grid.cells(); ++k)
          items.push_back({grid.position(t, k, cfg.timestamp_aligned), grid.token(t, k),
                           Provenance::salient, 1});
      au.survivors = total;
      au.salient_out = total;
      return assemble(grid.dim(), items);
    }
  }

  AttentionMap masked = mask_sinks(attn, cfg.select.sink);
  SegmentPlan plan = optimal_segmentation(grid, cfg.seg);
  TokenList pooledlist = pool_static(grid, plan, &masked, cfg.timestamp_aligned);
  std::size_t survivors = pooledlist.size();
  au.segments = plan.segments.size();
  au.survivors = survivors;
  for (std::uint8_t p : pooledlist.pooled) au.static_pooled += p;

  Budget b = allocate_budget(cfg.budget_from_survivors ? survivors : total, cfg.retention,
                             cfg.budget_split);
  au.budget = b.total;
  au.k_salient = b.k_salient;
  au.k_merge = b.k_merge;

  RopeConfig rope = cfg.rope;
  if (rope.d_t + rope.d_h + rope.d_w == 0) {
    RopeConfig part = default_partition(grid.dim());
    rope.d_t = part.d_t;
    rope.d_h = part.d_h;
    rope.d_w = part.d_w;
  }

  std::size_t k_salient = std::min<std::uint64_t>(b.k_salient, survivors);
  SalientSet salient;
  if (k_salient > 0) {
    SelectParams sp = cfg.select;
    sp.k = k_salient;
    salient = select_salient(pooledlist, sp, rope);
  }

  std::vector<std::uint8_t> is_salient(survivors, 0);
  for (std::size_t i : salient.indices) is_salient[i] = 1;

  std::size_t n_segments = plan.segments.size();
  std::vector<std::vector<std::size_t>> residual(n_segments);
  for (std::size_t i = 0; i < survivors; ++i)
    if (!is_salient[i]) residual[pooledlist.segment[i]].push_back(i);
  std::vector<std::uint64_t> weights(n_segments);
  std::uint64_t residual_total = 0;
  for (std::size_t s = 0; s < n_segments; ++s) {
    weights[s] = residual[s].size();
    residual_total += weights[s];
  }
  std::uint64_t k_merge = std::min<std::uint64_t>(b.k_merge, residual_total);
  std::vector<std::uint64_t> quota = apportion(k_merge, weights);

  std::vector<OutputToken> items;
  items.reserve(salient.indices.size() + k_merge);
  for (std::size_t i : salient.indices)
    items.push_back({pooledlist.positions[i], pooledlist.feature(i), Provenance::salient,
                     pooledlist.source_count[i]});
  au.salient_out = salient.indices.size();

  std::vector<TokenList> merged(n_segments);
  for (std::size_t s = 0; s < n_segments; ++s)
    merged[s] = merge_segment(pooledlist, residual[s], static_cast<std::size_t>(quota[s]), rope,
                              cfg.select.knn_k);
  for (const TokenList& m : merged)
    for (std::size_t i = 0; i < m.size(); ++i) {
      Provenance prov = m.pooled[i] ? Provenance::pooled_static : Provenance::merged;
      items.push_back({m.positions[i], m.feature(i), prov, m.source_count[i]});
      ++au.merged_out;
    }

  return assemble(grid.dim(), items);
}

}  // namespace tango
