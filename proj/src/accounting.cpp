#include "accounting.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tango {
namespace {

using u128 = unsigned __int128;

void check_model(const ModelConfig& cfg) {
  if (cfg.layers == 0 || cfg.hidden == 0 || cfg.ffn == 0 || cfg.query_heads == 0 ||
      cfg.kv_groups == 0)
    fail(Status::config_error, "model dimensions must be positive");
  if (cfg.kv_groups > cfg.query_heads || cfg.query_heads % cfg.kv_groups != 0)
    fail(Status::config_error, "query heads must be a positive multiple of kv groups");
}

std::uint64_t narrow(u128 v, const char* what) {
  if (v > std::numeric_limits<std::uint64_t>::max())
    fail(Status::value_error, std::string("FLOPs overflow in ") + what);
  return static_cast<std::uint64_t>(v);
}

}  // namespace

ModelConfig qwen2_7b() { return {28, 3584, 18944, 28, 4}; }

FlopsBreakdown layer_flops(std::uint64_t n, const ModelConfig& cfg) {
  check_model(cfg);
  if (n == 0) fail(Status::value_error, "sequence length must be >= 1");
  FlopsBreakdown out;
  u128 d = cfg.hidden;
  // 4Nd^2(H+G)/H, rounded to nearest when H does not divide the product.
  u128 num = u128{4} * n * d * d * (cfg.query_heads + cfg.kv_groups);
  u128 q = num / cfg.query_heads, r = num % cfg.query_heads;
  if (2 * r >= cfg.query_heads) ++q;
  out.attn_linear = narrow(q, "attention linear term");
  out.attn_quad = narrow(u128{4} * n * n * d, "attention quadratic term");
  out.ffn = narrow(u128{6} * n * d * cfg.ffn, "ffn term");
  narrow(u128{out.attn_linear} + out.attn_quad + out.ffn, "layer total");
  return out;
}

std::uint64_t llm_flops(std::uint64_t n, const ModelConfig& cfg) {
  FlopsBreakdown layer = layer_flops(n, cfg);
  return narrow(u128{cfg.layers} * layer.total(), "llm total");
}

double coefficient_ratio(const ModelConfig& cfg) {
  check_model(cfg);
  double d = static_cast<double>(cfg.hidden);
  double linear = 4.0 * d * d *
                      (1.0 + static_cast<double>(cfg.kv_groups) / cfg.query_heads) +
                  6.0 * d * static_cast<double>(cfg.ffn);
  return linear / (4.0 * d);
}

double equivalent_retention(std::span<const double> schedule) {
  if (schedule.empty()) fail(Status::empty_input, "empty retention schedule");
  double sum = 0.0;
  for (double r : schedule) {
    if (!(r > 0.0) || !(r <= 1.0)) fail(Status::value_error, "retention ratios must be in (0, 1]");
    sum += r;
  }
  return sum / static_cast<double>(schedule.size());
}

std::vector<double> hybrid_schedule(std::uint64_t layers, double pre, std::uint64_t switch_layer,
                                    double post) {
  if (layers == 0) fail(Status::config_error, "layer count must be >= 1");
  std::vector<double> sched(layers, pre);
  for (std::uint64_t l = switch_layer; l < layers && switch_layer > 0; ++l) sched[l] = post;
  return sched;
}

FlopsReport flops_report(std::uint64_t n_full, const ModelConfig& cfg,
                         std::span<const double> schedule) {
  check_model(cfg);
  if (schedule.size() != cfg.layers)
    fail(Status::value_error, "schedule length does not match layer count");
  FlopsReport rep;
  rep.n_full = n_full;
  rep.full_layer = layer_flops(n_full, cfg);
  rep.flops_full = narrow(u128{cfg.layers} * rep.full_layer.total(), "llm total");
  rep.mean_retention = equivalent_retention(schedule);
  u128 scheduled = 0;
  for (double r : schedule) {
    auto n_l = static_cast<std::uint64_t>(std::llround(r * static_cast<double>(n_full)));
    if (n_l == 0) n_l = 1;
    scheduled += layer_flops(n_l, cfg).total();
  }
  rep.flops_scheduled = narrow(scheduled, "scheduled total");
  rep.exact_ratio = static_cast<double>(rep.flops_scheduled) / static_cast<double>(rep.flops_full);
  rep.speedup = static_cast<double>(rep.flops_full) / static_cast<double>(rep.flops_scheduled);
  return rep;
}

std::string format_report(const FlopsReport& rep, const ModelConfig& cfg) {
  std::ostringstream os;
  os << "model: L=" << cfg.layers << " d=" << cfg.hidden << " m=" << cfg.ffn
     << " H=" << cfg.query_heads << " G=" << cfg.kv_groups << "\n";
  os << "sequence length: " << rep.n_full << "\n";
  os << "per-layer terms at full length: attn_linear=" << rep.full_layer.attn_linear
     << " attn_quadratic=" << rep.full_layer.attn_quad << " ffn=" << rep.full_layer.ffn << "\n";
  os << "flops full: " << rep.flops_full << "\n";
  os << "flops scheduled: " << rep.flops_scheduled << "\n";
  os << "exact flops ratio: " << rep.exact_ratio << "\n";
  os << "theoretical flops speedup: " << rep.speedup << "\n";
  os << "mean retention (simplified linear estimate): " << rep.mean_retention << "\n";
  os << "note: theoretical FLOPs only, not wall-clock\n";
  return os.str();
}

}  // namespace tango
