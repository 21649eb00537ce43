#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "token_grid.hpp"

namespace tango {

// Evenly spaced keep-set: round(j*n/B) for j = 0..B-1, shifted forward past
// duplicates. Strictly increasing, exactly B entries.
std::vector<std::size_t> uniform_sample(std::size_t n, std::size_t budget);

// B highest scores (ties toward the lower index) over a flat score list;
// -inf entries are masked out. Returns ascending indices.
std::vector<std::size_t> topk_select(std::span<const float> scores, std::size_t budget);

}  // namespace tango
