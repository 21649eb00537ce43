#include "dpc_knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tango {
namespace {

// Shared ordering for neighbor selection: by distance, then point index.
struct Neighbor {
  double d;
  std::size_t j;
  bool operator<(const Neighbor& o) const { return d < o.d || (d == o.d && j < o.j); }
};

// Totalized density order: ties broken toward the lower index.
inline bool denser(std::span<const double> rho, std::size_t j, std::size_t i) {
  return rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
}

}  // namespace

std::vector<double> local_density(std::size_t n, const DistanceFn& dist, std::uint32_t knn_k) {
  if (n == 0) fail(Status::empty_input, "no points to cluster");
  if (knn_k == 0) fail(Status::config_error, "knn_k must be >= 1");
  std::size_t k_eff = std::min<std::size_t>(knn_k, n - 1);
  std::vector<double> rho(n);
  if (k_eff == 0) {
    rho.assign(n, 1.0);
    return rho;
  }
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<Neighbor> cand;
    cand.reserve(n - 1);
    for (std::size_t i = begin; i < end; ++i) {
      cand.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) cand.push_back({dist(i, j), j});
      std::nth_element(cand.begin(), cand.begin() + (k_eff - 1), cand.end());
      std::sort(cand.begin(), cand.begin() + k_eff);
      double sum = 0.0;
      for (std::size_t t = 0; t < k_eff; ++t) sum += cand[t].d * cand[t].d;
      rho[i] = std::exp(-sum / static_cast<double>(k_eff));
    }
  });
  return rho;
}

std::vector<double> delta_distance(std::size_t n, const DistanceFn& dist,
                                   std::span<const double> rho) {
  if (n == 0) fail(Status::empty_input, "no points to cluster");
  if (rho.size() != n) fail(Status::value_error, "rho length does not match point count");
  std::vector<double> delta(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double nearest_higher = -1.0, farthest = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double d = dist(i, j);
        farthest = std::max(farthest, d);
        if (denser(rho, j, i) && (nearest_higher < 0.0 || d < nearest_higher))
          nearest_higher = d;
      }
      delta[i] = nearest_higher >= 0.0 ? nearest_higher : farthest;
    }
  });
  return delta;
}

ClusterResult cluster(std::size_t n, const DistanceFn& dist, const ClusterParams& params) {
  if (n == 0) fail(Status::empty_input, "no points to cluster");
  if (params.k == 0) fail(Status::config_error, "cluster count must be >= 1");
  if (params.k > n) fail(Status::config_error, "cluster count exceeds point count");

  ClusterResult res;
  res.rho = local_density(n, dist, params.knn_k);
  res.delta = delta_distance(n, dist, res.rho);
  res.gamma.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.gamma[i] = res.rho[i] * res.delta[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return res.gamma[a] > res.gamma[b] || (res.gamma[a] == res.gamma[b] && a < b);
  });
  res.centers.assign(order.begin(), order.begin() + params.k);

  res.assignment.assign(n, 0);
  std::vector<std::uint32_t> center_of(n, 0);
  std::vector<std::uint8_t> is_center(n, 0);
  for (std::uint32_t c = 0; c < res.centers.size(); ++c) {
    is_center[res.centers[c]] = 1;
    center_of[res.centers[c]] = c;
  }
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (is_center[i]) {
        res.assignment[i] = center_of[i];
        continue;
      }
      std::uint32_t best = 0;
      double best_d = 0.0;
      bool have = false;
      for (std::uint32_t c = 0; c < res.centers.size(); ++c) {
        double d = dist(i, res.centers[c]);
        // Ties go to the center with the lower point index.
        if (!have || d < best_d || (d == best_d && res.centers[c] < res.centers[best])) {
          best = c;
          best_d = d;
          have = true;
        }
      }
      res.assignment[i] = best;
    }
  });
  return res;
}

PooledClusters pool_clusters(std::span<const float> features, std::uint32_t dim,
                             const ClusterResult& result) {
  std::size_t n = result.assignment.size();
  if (dim == 0 || features.size() != n * dim)
    fail(Status::value_error, "feature matrix does not match assignment");
  std::size_t k = result.centers.size();
  PooledClusters out;
  out.dim = dim;
  out.counts.assign(k, 0);
  std::vector<double> acc(k * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t c = result.assignment[i];
    if (c >= k) fail(Status::value_error, "assignment label out of range");
    ++out.counts[c];
    const float* x = features.data() + i * dim;
    double* a = acc.data() + static_cast<std::size_t>(c) * dim;
    for (std::uint32_t v = 0; v < dim; ++v) a[v] += x[v];
  }
  out.means.resize(k * dim);
  for (std::size_t c = 0; c < k; ++c) {
    if (out.counts[c] == 0) fail(Status::value_error, "empty cluster in pooled result");
    for (std::uint32_t v = 0; v < dim; ++v)
      out.means[c * dim + v] = static_cast<float>(acc[c * dim + v] / out.counts[c]);
  }
  return out;
}

DistanceFn euclidean_distance(std::span<const float> features, std::uint32_t dim) {
  if (dim == 0 || features.size() % dim != 0)
    fail(Status::value_error, "feature matrix shape invalid");
  return [features, dim](std::size_t i, std::size_t j) {
    return std::sqrt(squared_distance(features.subspan(i * dim, dim),
                                      features.subspan(j * dim, dim)));
  };
}

}  // namespace tango
