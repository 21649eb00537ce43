#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"

namespace tango {

struct ModelConfig {
  std::uint64_t layers = 0;       // L
  std::uint64_t hidden = 0;       // d
  std::uint64_t ffn = 0;          // m, intermediate width
  std::uint64_t query_heads = 0;  // H
  std::uint64_t kv_groups = 0;    // G
};

ModelConfig qwen2_7b();  // d=3584, m=18944, H=28, G=4, L=28

struct FlopsBreakdown {
  std::uint64_t attn_linear = 0;  // 4Nd^2(1 + G/H)
  std::uint64_t attn_quad = 0;    // 4N^2 d
  std::uint64_t ffn = 0;          // 6Ndm
  std::uint64_t total() const { return attn_linear + attn_quad + ffn; }
};

// One transformer layer at sequence length N, exact integer arithmetic (the
// G/H factor is applied as a rational before dividing).
FlopsBreakdown layer_flops(std::uint64_t n, const ModelConfig& cfg);

// L times the per-layer cost.
std::uint64_t llm_flops(std::uint64_t n, const ModelConfig& cfg);

// [linear coefficient] / [quadratic coefficient] of the per-layer cost in N:
// (4d^2(1+G/H) + 6dm) / (4d).
double coefficient_ratio(const ModelConfig& cfg);

// Mean of per-layer retention ratios, each in (0, 1].
double equivalent_retention(std::span<const double> schedule);

// Constant pre-LLM retention switching to a deeper-layer ratio after
// `switch_layer` (1-based; 0 = never switch).
std::vector<double> hybrid_schedule(std::uint64_t layers, double pre, std::uint64_t switch_layer,
                                    double post);

struct FlopsReport {
  std::uint64_t n_full = 0;
  std::uint64_t flops_full = 0;       // all layers at N
  std::uint64_t flops_scheduled = 0;  // per-layer N_l = round(r_l * N)
  double exact_ratio = 0.0;           // scheduled / full
  double speedup = 0.0;               // full / scheduled
  double mean_retention = 0.0;        // the simplified linear estimate
  FlopsBreakdown full_layer;          // single-layer terms at N
};

FlopsReport flops_report(std::uint64_t n_full, const ModelConfig& cfg,
                         std::span<const double> schedule);

// Human-readable rendering of a report (also the CLI output).
std::string format_report(const FlopsReport& rep, const ModelConfig& cfg);

}  // namespace tango
