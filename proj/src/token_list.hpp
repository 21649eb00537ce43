#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "token_grid.hpp"

namespace tango {

// Flat, position-annotated token sequence flowing between pipeline stages.
// Parallel arrays indexed by token; `scores` may be empty when no attention
// accompanies the tokens, otherwise it is aligned 1:1 (-inf = masked sink).
struct TokenList {
  std::uint32_t dim = 0;
  std::vector<float> features;             // size() x dim, row-major
  std::vector<Position3D> positions;
  std::vector<std::uint32_t> segment;      // owning segment index in the plan
  std::vector<std::uint32_t> source_count; // inputs averaged into this token
  std::vector<std::uint8_t> pooled;        // came out of static pooling
  std::vector<float> scores;

  std::size_t size() const { return positions.size(); }
  std::span<const float> feature(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
};

}  // namespace tango
