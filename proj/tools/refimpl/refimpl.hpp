#pragma once

// Brute-force reference implementations used to cross-check the library.
// Everything here is written against the documented behavior alone and must
// stay free of library headers so the two sides cannot share a bug.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace refimpl {

// Cosine over raw features: double accumulation in index order, zero-norm
// inputs give 0, bitwise-equal nonzero inputs give exactly 1.
double cosine(const float* a, const float* b, std::size_t d);

struct BruteSegmentation {
  std::vector<std::uint32_t> starts;  // 1-based segment starts, first is 1
  unsigned long long total_prunable = 0;
};

// Enumerates all 2^(T-1) contiguous segmentations of a T x n_cells x dim
// frame-major tensor and keeps the best under (max prunable, min segments,
// lexicographically earliest starts). max_len = 0 means unbounded.
BruteSegmentation best_segmentation(const float* data, std::uint32_t frames,
                                    std::uint32_t n_cells, std::uint32_t dim, double tau,
                                    std::uint32_t max_len);

using Distance = std::function<double(std::size_t, std::size_t)>;

struct NaiveClusters {
  std::vector<std::size_t> centers;
  std::vector<std::uint32_t> assignment;
  std::vector<double> rho, delta, gamma;
};

// Density-peaks clustering by full sorts: rho from the K nearest neighbors
// (ties by index), delta against the index-totalized density order, centers
// as the k largest gamma, members to the nearest center (ties to the lower
// center point index).
NaiveClusters cluster(std::size_t n, const Distance& dist, std::size_t k, std::uint32_t knn_k);

// Euclidean over a row-major float matrix, independent of the library's.
Distance euclidean(const float* features, std::size_t n, std::uint32_t dim);

struct RopeSections {
  std::uint32_t d_t, d_h, d_w;
  double theta_t, theta_h, theta_w;
};

// Applies the full block-diagonal rotation matrix for position (t, h, w) by
// an explicit dim x dim matrix-vector product.
std::vector<float> rotate_direct(const float* x, const RopeSections& sec, double t, double h,
                                 double w);

}  // namespace refimpl
