#include "baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tango {

std::vector<std::size_t> uniform_sample(std::size_t n, std::size_t budget) {
  if (budget == 0) fail(Status::config_error, "budget must be >= 1");
  if (budget > n) fail(Status::config_error, "budget exceeds token count");
  std::vector<std::size_t> out;
  out.reserve(budget);
  for (std::size_t j = 0; j < budget; ++j) {
    auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(n) / static_cast<double>(budget)));
    if (!out.empty() && idx <= out.back()) idx = out.back() + 1;
    out.push_back(std::min(idx, n - 1));
  }
  return out;
}

std::vector<std::size_t> topk_select(std::span<const float> scores, std::size_t budget) {
  if (budget == 0) fail(Status::config_error, "budget must be >= 1");
  constexpr float kNegInf = -std::numeric_limits<float>::infinity();
  std::vector<std::size_t> idx;
  idx.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) fail(Status::value_error, "NaN attention score");
    if (scores[i] != kNegInf) idx.push_back(i);
  }
  if (budget > idx.size()) fail(Status::config_error, "budget exceeds unmasked token count");
  std::nth_element(idx.begin(), idx.begin() + (budget - 1), idx.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                   });
  idx.resize(budget);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace tango
