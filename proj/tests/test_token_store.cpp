#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "token_grid.hpp"

using namespace tango;

namespace {

std::string tmp_path(const char* name) {
  return std::string("tmp_store_") + name;
}

TokenGrid make_grid(std::uint32_t T, std::uint32_t H, std::uint32_t W, std::uint32_t d,
                    float base = 0.25f) {
  std::vector<float> data(static_cast<std::size_t>(T) * H * W * d);
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = base + 0.125f * static_cast<float>(i % 37) - 1.5f;
  std::vector<float> ts(T);
  for (std::uint32_t t = 0; t < T; ++t) ts[t] = 0.5f * static_cast<float>(t);
  return TokenGrid(T, H, W, d, std::move(data), std::move(ts));
}

Status code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Status::ok;
}

}  // namespace

TEST_CASE("grid round trip is bitwise") {
  TokenGrid g = make_grid(3, 2, 4, 5);
  std::string path = tmp_path("roundtrip.tg");
  save_grid(g, path);
  TokenGrid back = load_grid(path);

  CHECK(back.frames() == 3);
  CHECK(back.grid_h() == 2);
  CHECK(back.grid_w() == 4);
  CHECK(back.dim() == 5);
  REQUIRE(back.data().size() == g.data().size());
  CHECK(std::memcmp(back.data().data(), g.data().data(), g.data().size() * 4) == 0);
  CHECK(std::memcmp(back.timestamps().data(), g.timestamps().data(), 3 * 4) == 0);
  std::remove(path.c_str());
}

TEST_CASE("token spans address the right slice") {
  TokenGrid g = make_grid(2, 2, 3, 4);
  // frame 1, cell 4 starts at ((1*6)+4)*4 = 40
  auto span = g.token(1, 4);
  REQUIRE(span.size() == 4);
  CHECK(span.data() == g.data().data() + 40);
  CHECK(g.total_tokens() == 12);
  CHECK(g.cells() == 6);
}

TEST_CASE("positions are 1-based and timestamped") {
  TokenGrid g = make_grid(3, 2, 3, 2);
  Position3D p = g.position(2, 4);
  CHECK(p.t == doctest::Approx(1.0));  // timestamps are 0.5*t
  CHECK(p.h == 2);
  CHECK(p.w == 2);
  // alignment off: temporal coordinate is the 1-based frame index
  Position3D q = g.position(2, 4, false);
  CHECK(q.t == 3.0);
}

TEST_CASE("all-zero timestamps fall back to frame indices") {
  std::vector<float> data(2 * 1 * 1 * 2, 0.5f);
  TokenGrid g(2, 1, 1, 2, std::move(data), {0.0f, 0.0f});
  CHECK_FALSE(g.has_timestamps());
  CHECK(g.position(0, 0).t == 1.0);
  CHECK(g.position(1, 0).t == 2.0);
}

TEST_CASE("constructor validation") {
  std::vector<float> ok(4, 1.0f);
  CHECK(code_of([&] { TokenGrid(0, 1, 1, 4, ok, {}); }) == Status::value_error);
  CHECK(code_of([&] { TokenGrid(1, 1, 1, 4, {1.f, 2.f}, {0.f}); }) == Status::value_error);
  CHECK(code_of([&] { TokenGrid(1, 1, 1, 4, ok, {0.f, 1.f}); }) == Status::value_error);

  std::vector<float> nan_data = {1.f, std::nanf(""), 0.f, 0.f};
  CHECK(code_of([&] { TokenGrid(1, 1, 1, 4, nan_data, {0.f}); }) == Status::value_error);

  // timestamps must be strictly increasing or all zero
  std::vector<float> d8(8, 1.0f);
  CHECK(code_of([&] { TokenGrid(2, 1, 1, 4, d8, {1.f, 1.f}); }) == Status::value_error);
  CHECK(code_of([&] { TokenGrid(2, 1, 1, 4, d8, {2.f, 1.f}); }) == Status::value_error);
  CHECK(code_of([&] { TokenGrid(2, 1, 1, 4, d8, {-1.f, 1.f}); }) == Status::value_error);
}

TEST_CASE("bad magic is a format error") {
  std::string path = tmp_path("magic.tg");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTTANGO" << std::string(16, '\0');
  }
  CHECK(code_of([&] { load_grid(path); }) == Status::format_error);
  CHECK(code_of([&] { load_attention(path); }) == Status::format_error);
  std::remove(path.c_str());
}

TEST_CASE("short payload is reported as truncated") {
  TokenGrid g = make_grid(2, 2, 2, 3);
  std::string path = tmp_path("trunc.tg");
  save_grid(g, path);
  // chop the last 4 bytes off
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 4));
  }
  CHECK(code_of([&] { load_grid(path); }) == Status::truncated);
  std::remove(path.c_str());
}

TEST_CASE("zero header dimension is a format error") {
  std::string path = tmp_path("zerodim.tg");
  {
    std::ofstream out(path, std::ios::binary);
    out << "TANGOTG1";
    std::uint32_t dims[4] = {1, 0, 1, 4};
    out.write(reinterpret_cast<const char*>(dims), 16);
  }
  CHECK(code_of([&] { load_grid(path); }) == Status::format_error);
  std::remove(path.c_str());
}

TEST_CASE("missing file is an io error") {
  CHECK(code_of([&] { load_grid("no_such_file_here.tg"); }) == Status::io_error);
}

TEST_CASE("attention round trip and validation") {
  AttentionMap a(2, 3, {0.f, 1.f, 2.f, 3.f, 4.f, 5.f});
  std::string path = tmp_path("attn.ta");
  save_attention(a, path);
  AttentionMap back = load_attention(path);
  CHECK(back.frames() == 2);
  CHECK(back.per_frame() == 3);
  CHECK(std::memcmp(back.scores().data(), a.scores().data(), 6 * 4) == 0);
  CHECK(back.at(1, 2) == 5.0f);
  std::remove(path.c_str());

  constexpr float kInf = std::numeric_limits<float>::infinity();
  CHECK(code_of([&] { AttentionMap(1, 2, {0.f, std::nanf("")}); }) == Status::value_error);
  CHECK(code_of([&] { AttentionMap(1, 2, {0.f, kInf}); }) == Status::value_error);
  CHECK(code_of([&] { AttentionMap(1, 2, {0.f, -1.f}); }) == Status::value_error);

  // -inf is the in-memory sink sentinel, storable in RAM but not on disk
  AttentionMap masked(1, 2, {0.5f, -kInf});
  CHECK(code_of([&] { save_attention(masked, path); }) == Status::value_error);
}

TEST_CASE("normalize scales to unit length and skips zero tokens") {
  std::vector<float> data = {3.f, 4.f, 0.f, 0.f};
  TokenGrid g(1, 2, 1, 2, std::move(data), {0.f});
  std::uint32_t zeros = 77;
  TokenGrid n = normalize_tokens(g, &zeros);
  CHECK(n.data()[0] == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(n.data()[1] == doctest::Approx(0.8).epsilon(1e-7));
  CHECK(n.data()[2] == 0.0f);
  CHECK(n.data()[3] == 0.0f);
  CHECK(zeros == 1);

  double norm = std::sqrt(static_cast<double>(n.data()[0]) * n.data()[0] +
                          static_cast<double>(n.data()[1]) * n.data()[1]);
  CHECK(std::abs(norm - 1.0) < 1e-6);
}

TEST_CASE("synth is deterministic per (spec, seed)") {
  SynthSpec spec;
  spec.frames = 6;
  spec.grid_h = 5;
  spec.grid_w = 7;
  spec.dim = 12;
  spec.n_blobs = 3;
  spec.noise_sigma = 0.1;

  SynthResult a = synth_video(spec, 42);
  SynthResult b = synth_video(spec, 42);
  CHECK(std::memcmp(a.grid.data().data(), b.grid.data().data(),
                    a.grid.data().size() * 4) == 0);
  CHECK(std::memcmp(a.attention.scores().data(), b.attention.scores().data(),
                    a.attention.scores().size() * 4) == 0);

  SynthResult c = synth_video(spec, 43);
  CHECK(std::memcmp(a.grid.data().data(), c.grid.data().data(),
                    a.grid.data().size() * 4) != 0);
}

TEST_CASE("synth truth matches the noise-free content") {
  SynthSpec spec;
  spec.frames = 8;
  spec.grid_h = 6;
  spec.grid_w = 6;
  spec.dim = 8;
  spec.n_blobs = 2;
  spec.noise_sigma = 0.0;

  SynthResult r = synth_video(spec, 7);
  REQUIRE(r.truth.adjacent_static.size() == spec.frames - 1);
  REQUIRE(r.truth.static_throughout.size() == spec.grid_h * spec.grid_w);

  // with zero noise, "static between t and t+1" means bitwise-equal features
  for (std::uint32_t t = 0; t + 1 < spec.frames; ++t) {
    for (std::uint32_t cell = 0; cell < r.grid.cells(); ++cell) {
      auto x = r.grid.token(t, cell);
      auto y = r.grid.token(t + 1, cell);
      bool same = std::memcmp(x.data(), y.data(), spec.dim * 4) == 0;
      CHECK(same == (r.truth.adjacent_static[t][cell] != 0));
    }
  }

  // never-visited cells are static throughout; visited agrees with blob_cells
  for (std::uint32_t cell = 0; cell < r.grid.cells(); ++cell) {
    if (!r.truth.visited[cell]) CHECK(r.truth.static_throughout[cell]);
  }
  REQUIRE(r.truth.blob_cells.size() == spec.frames);
  for (const auto& frame : r.truth.blob_cells) REQUIRE(frame.size() == spec.n_blobs);

  // attention concentrates on blob cells
  for (std::uint32_t t = 0; t < spec.frames; ++t) {
    std::uint32_t blob_cell = r.truth.blob_cells[t][0];
    double blob_score = r.attention.at(t, blob_cell);
    double bg_min = 1e30;
    for (std::uint32_t cell = 0; cell < r.grid.cells(); ++cell) {
      bool is_blob = false;
      for (std::uint32_t bcell : r.truth.blob_cells[t])
        if (bcell == cell) is_blob = true;
      if (!is_blob) bg_min = std::min(bg_min, static_cast<double>(r.attention.at(t, cell)));
    }
    CHECK(blob_score > bg_min);
  }
}

TEST_CASE("synth rejects impossible specs") {
  SynthSpec spec;
  spec.grid_h = 2;
  spec.grid_w = 2;
  spec.n_blobs = 5;  // more blobs than cells
  CHECK(code_of([&] { synth_video(spec, 1); }) == Status::config_error);

  SynthSpec big;
  big.blob_size = 10;  // footprint larger than the 8x8 default grid
  CHECK(code_of([&] { synth_video(big, 1); }) == Status::config_error);
}
