#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>
#include <string>
#include <vector>

#include "accounting.hpp"
#include "common.hpp"

using namespace tango;

namespace {

Status code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Status::ok;
}

}  // namespace

TEST_CASE("hand-checked layer cost") {
  // N=1, d=4, m=8, H=2, G=1: 4*16*1.5 = 96, 4*4 = 16, 6*4*8 = 192
  ModelConfig tiny{1, 4, 8, 2, 1};
  FlopsBreakdown fb = layer_flops(1, tiny);
  CHECK(fb.attn_linear == 96);
  CHECK(fb.attn_quad == 16);
  CHECK(fb.ffn == 192);
  CHECK(fb.total() == 304);
  CHECK(llm_flops(1, tiny) == 304);

  ModelConfig two_layers = tiny;
  two_layers.layers = 2;
  CHECK(llm_flops(1, two_layers) == 608);
}

TEST_CASE("reference model layer terms") {
  ModelConfig cfg = qwen2_7b();
  CHECK(cfg.layers == 28);
  CHECK(cfg.hidden == 3584);
  CHECK(cfg.ffn == 18944);
  CHECK(cfg.query_heads == 28);
  CHECK(cfg.kv_groups == 4);

  // frozen from exact integer evaluation at N = 6272
  FlopsBreakdown fb = layer_flops(6272, cfg);
  CHECK(fb.attn_linear == 368293445632ull);
  CHECK(fb.attn_quad == 563949338624ull);
  CHECK(fb.ffn == 2555035779072ull);
  CHECK(llm_flops(6272, cfg) == 97643799773184ull);
}

TEST_CASE("coefficient ratio of the reference model") {
  double ratio = coefficient_ratio(qwen2_7b());
  CHECK(ratio == doctest::Approx(32512.0).epsilon(1e-12));
  CHECK(ratio >= 32000.0);
  CHECK(ratio <= 33000.0);
}

TEST_CASE("retention schedules") {
  auto sched = hybrid_schedule(28, 0.122, 18, 0.061);
  REQUIRE(sched.size() == 28);
  for (std::size_t l = 0; l < 18; ++l) CHECK(sched[l] == 0.122);
  for (std::size_t l = 18; l < 28; ++l) CHECK(sched[l] == 0.061);

  double mean = equivalent_retention(sched);
  CHECK(mean == doctest::Approx(0.1002142857).epsilon(1e-9));
  CHECK(mean >= 0.098);
  CHECK(mean <= 0.102);

  // never switching keeps the pre ratio everywhere
  auto flat = hybrid_schedule(4, 0.3, 0, 0.1);
  for (double r : flat) CHECK(r == 0.3);

  std::vector<double> bad = {0.5, 1.2};
  CHECK(code_of([&] { equivalent_retention(bad); }) == Status::value_error);
  std::vector<double> none;
  CHECK(code_of([&] { equivalent_retention(none); }) == Status::empty_input);
}

TEST_CASE("scheduled flops report against frozen oracles") {
  ModelConfig cfg = qwen2_7b();
  auto sched = hybrid_schedule(28, 0.122, 18, 0.061);
  FlopsReport rep = flops_report(6272, cfg, sched);

  // per-layer lengths: round(0.122*6272) = 765, round(0.061*6272) = 383
  CHECK(rep.flops_full == 97643799773184ull);
  CHECK(rep.flops_scheduled == 8375265239040ull);
  CHECK(rep.exact_ratio == doctest::Approx(0.0857736514).epsilon(1e-7));
  CHECK(rep.speedup == doctest::Approx(11.6585919355).epsilon(1e-7));
  CHECK(rep.mean_retention == doctest::Approx(0.1002142857).epsilon(1e-9));

  // the quadratic attention term keeps the exact ratio below the linear
  // estimate; at this length the gap is real but bounded
  CHECK(rep.exact_ratio < rep.mean_retention);
  CHECK(rep.exact_ratio > 0.5 * rep.mean_retention);
}

TEST_CASE("report rendering carries the headline numbers") {
  ModelConfig cfg = qwen2_7b();
  auto sched = hybrid_schedule(28, 0.1, 0, 0.1);
  FlopsReport rep = flops_report(1000, cfg, sched);
  std::string text = format_report(rep, cfg);
  CHECK(text.find("flops full:") != std::string::npos);
  CHECK(text.find("flops scheduled:") != std::string::npos);
  CHECK(text.find("exact flops ratio:") != std::string::npos);
  CHECK(text.find("not wall-clock") != std::string::npos);
  CHECK(text.find(std::to_string(rep.flops_full)) != std::string::npos);
}

TEST_CASE("model validation and overflow guards") {
  ModelConfig bad = qwen2_7b();
  bad.kv_groups = 3;  // 28 % 3 != 0
  CHECK(code_of([&] { layer_flops(16, bad); }) == Status::config_error);
  bad = qwen2_7b();
  bad.hidden = 0;
  CHECK(code_of([&] { layer_flops(16, bad); }) == Status::config_error);

  CHECK(code_of([] { layer_flops(0, qwen2_7b()); }) == Status::value_error);

  // 4N^2 d at N = 2^40 overflows 64 bits and must be caught, not wrapped
  CHECK(code_of([] { layer_flops(1ull << 40, qwen2_7b()); }) == Status::value_error);

  auto sched = hybrid_schedule(4, 0.1, 0, 0.1);
  CHECK(code_of([&] { flops_report(100, qwen2_7b(), sched); }) == Status::value_error);
}
