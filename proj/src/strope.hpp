#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "token_grid.hpp"

namespace tango {

// Per-axis section widths and base frequencies of the spatio-temporal rotary
// embedding. Sections are laid out [t | h | w] over the feature dimension.
struct RopeConfig {
  std::uint32_t d_t = 0, d_h = 0, d_w = 0;  // even, >= 2 each
  double theta_t = 1e4, theta_h = 1e3, theta_w = 1e3;

  std::uint32_t dim() const { return d_t + d_h + d_w; }
};

// Splits d into three near-equal even sections, remainder to the temporal
// one; d=3554 lands on (1186, 1184, 1184).
RopeConfig default_partition(std::uint32_t d);

// theta_k = base^(-2(k-1)/d_p) for k in [1, d_p/2]; one list per section.
struct FrequencyTable {
  std::vector<double> t, h, w;
};
FrequencyTable frequencies(const RopeConfig& cfg);

// Precomputed rotation machinery shared read-only across workers.
class Rope {
 public:
  explicit Rope(const RopeConfig& cfg);

  const RopeConfig& config() const { return cfg_; }
  const FrequencyTable& freq() const { return freq_; }

  // Applies the block-diagonal 2x2 rotations for position p; norm-preserving,
  // identity at p = (0,0,0). x must have cfg.dim() components.
  void rotate(std::span<const float> x, const Position3D& p, std::span<float> out) const;
  std::vector<float> rotate(std::span<const float> x, const Position3D& p) const;

  // cos_st = dot(rotate(x_i, p_i), rotate(x_j, p_j)); computed in the
  // relative form x_i . R(dp) x_j so common shifts cancel exactly.
  double cos_st(std::span<const float> x_i, const Position3D& p_i, std::span<const float> x_j,
                const Position3D& p_j) const;

  // sqrt(2(1 - cos_st)), clamped at 0; the Euclidean distance between the
  // rotated unit vectors.
  double dist_st(std::span<const float> x_i, const Position3D& p_i, std::span<const float> x_j,
                 const Position3D& p_j) const;

 private:
  RopeConfig cfg_;
  FrequencyTable freq_;
};

enum class Axis { t, h, w };

struct DecayPoint {
  double m = 0;            // relative distance along the axis
  double mean_magnitude;   // Monte-Carlo mean |sum c_k e^(i m theta_k)|
  double mean_bound;       // MC mean of (max |c_{k+1}-c_k|) * sum |S_{k+1}|
  double sum_abs_partial;  // exact sum_{l=1}^{d_p/2} |S_l|, draw-independent
};

// Long-term decay diagnostics for one axis' frequency bank: the exact Abel
// partial-sum magnitude sum |S_l| plus Monte-Carlo envelopes over random unit
// section vectors.
std::vector<DecayPoint> decay_envelope(const RopeConfig& cfg, Axis axis,
                                       std::span<const double> m_values, std::uint32_t trials,
                                       std::uint64_t seed);

}  // namespace tango
