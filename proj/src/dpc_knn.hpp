#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "common.hpp"

namespace tango {

// Symmetric distance over point indices; must be pure and non-negative.
using DistanceFn = std::function<double(std::size_t, std::size_t)>;

struct ClusterParams {
  std::size_t k = 1;      // cluster count
  std::uint32_t knn_k = 7;  // neighbors for the density estimate
};

struct ClusterResult {
  std::vector<std::size_t> centers;     // k point indices, gamma-descending
  std::vector<std::uint32_t> assignment;  // n labels in [0, k)
  std::vector<double> rho, delta, gamma;
};

// rho_i = exp(-(1/K) sum over the K nearest neighbors of d^2), self excluded,
// with effective K = min(K, n-1). KNN ties resolved by (distance, index).
std::vector<double> local_density(std::size_t n, const DistanceFn& dist, std::uint32_t knn_k);

// delta_i = distance to the closest strictly-higher-density point, where the
// density order is totalized by index; the global maximum takes the farthest
// distance to any other point instead.
std::vector<double> delta_distance(std::size_t n, const DistanceFn& dist,
                                   std::span<const double> rho);

// Density-peaks clustering: centers = top-k by (gamma, then lower index),
// members assigned to the nearest center (ties to the lower center point
// index). Deterministic for identical inputs under any worker count.
ClusterResult cluster(std::size_t n, const DistanceFn& dist, const ClusterParams& params);

// Arithmetic means of raw member features per cluster, plus member counts.
struct PooledClusters {
  std::uint32_t dim = 0;
  std::vector<float> means;              // k x dim
  std::vector<std::uint32_t> counts;     // sum = n
};
PooledClusters pool_clusters(std::span<const float> features, std::uint32_t dim,
                             const ClusterResult& result);

// Euclidean distance over a row-major n x dim float matrix.
DistanceFn euclidean_distance(std::span<const float> features, std::uint32_t dim);

}  // namespace tango
