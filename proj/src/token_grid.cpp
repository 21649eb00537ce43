#include "token_grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace tango {
namespace {

constexpr char kGridMagic[8] = {'T', 'A', 'N', 'G', 'O', 'T', 'G', '1'};
constexpr char kAttnMagic[8] = {'T', 'A', 'N', 'G', 'O', 'A', 'T', '1'};
constexpr std::uint64_t kMaxFloats = std::uint64_t{1} << 40;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Status::io_error, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(Status::io_error, "read failed: " + path);
  return bytes;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Status::io_error, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail(Status::io_error, "write failed: " + path);
}

void check_magic(const std::string& bytes, const char (&magic)[8], const std::string& path) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), magic, 8) != 0)
    fail(Status::format_error, "bad magic in " + path);
}

std::vector<float> decode_f32(const unsigned char* p, std::uint64_t count) {
  std::vector<float> out(count);
  for (std::uint64_t i = 0; i < count; ++i) out[i] = get_f32(p + 4 * i);
  return out;
}

}  // namespace

TokenGrid::TokenGrid(std::uint32_t frames, std::uint32_t grid_h, std::uint32_t grid_w,
                     std::uint32_t dim, std::vector<float> data, std::vector<float> timestamps)
    : frames_(frames), grid_h_(grid_h), grid_w_(grid_w), dim_(dim),
      data_(std::move(data)), timestamps_(std::move(timestamps)) {
  if (frames_ == 0 || grid_h_ == 0 || grid_w_ == 0 || dim_ == 0)
    fail(Status::value_error, "grid dimensions must be positive");
  unsigned __int128 want = static_cast<unsigned __int128>(frames_) * grid_h_ * grid_w_ * dim_;
  if (want > kMaxFloats) fail(Status::value_error, "grid too large");
  if (data_.size() != static_cast<std::uint64_t>(want))
    fail(Status::value_error, "data length does not match dimensions");
  if (timestamps_.size() != frames_)
    fail(Status::value_error, "timestamp count does not match frame count");
  for (float v : data_)
    if (!std::isfinite(v)) fail(Status::value_error, "non-finite token feature");
  bool all_zero = true, sorted = true;
  for (std::uint32_t t = 0; t < frames_; ++t) {
    float ts = timestamps_[t];
    if (!std::isfinite(ts) || ts < 0.0f) fail(Status::value_error, "bad timestamp");
    if (ts != 0.0f) all_zero = false;
    if (t > 0 && !(timestamps_[t - 1] < ts)) sorted = false;
  }
  if (frames_ > 1 && !sorted && !all_zero)
    fail(Status::value_error, "timestamps must be strictly increasing or all zero");
  has_timestamps_ = frames_ == 1 || sorted;
}

AttentionMap::AttentionMap(std::uint32_t frames, std::uint32_t per_frame, std::vector<float> scores)
    : frames_(frames), per_frame_(per_frame), scores_(std::move(scores)) {
  if (frames_ == 0 || per_frame_ == 0)
    fail(Status::value_error, "attention dimensions must be positive");
  if (scores_.size() != static_cast<std::uint64_t>(frames_) * per_frame_)
    fail(Status::value_error, "score length does not match dimensions");
  for (float v : scores_) {
    // -inf is the in-memory sink sentinel; anything else must be a usable score.
    if (v == -std::numeric_limits<float>::infinity()) continue;
    if (!std::isfinite(v) || v < 0.0f) fail(Status::value_error, "attention scores must be >= 0 and finite");
  }
}

TokenGrid load_grid(const std::string& path) {
  std::string bytes = read_file(path);
  check_magic(bytes, kGridMagic, path);
  if (bytes.size() < 8 + 16) fail(Status::truncated, "header truncated: " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::uint32_t T = get_u32(p + 8), H = get_u32(p + 12), W = get_u32(p + 16), d = get_u32(p + 20);
  if (T == 0 || H == 0 || W == 0 || d == 0) fail(Status::format_error, "zero dimension in header: " + path);
  unsigned __int128 count = static_cast<unsigned __int128>(T) * H * W * d;
  if (count > kMaxFloats) fail(Status::format_error, "header dimensions too large: " + path);
  std::uint64_t n = static_cast<std::uint64_t>(count);
  std::uint64_t expect = 8 + 16 + 4 * n + 4 * static_cast<std::uint64_t>(T);
  if (bytes.size() != expect)
    fail(Status::truncated, "payload length mismatch in " + path);
  std::vector<float> data = decode_f32(p + 24, n);
  std::vector<float> ts = decode_f32(p + 24 + 4 * n, T);
  return TokenGrid(T, H, W, d, std::move(data), std::move(ts));
}

void save_grid(const TokenGrid& grid, const std::string& path) {
  std::string bytes;
  bytes.reserve(24 + 4 * (grid.data().size() + grid.timestamps().size()));
  bytes.append(kGridMagic, 8);
  put_u32(bytes, grid.frames());
  put_u32(bytes, grid.grid_h());
  put_u32(bytes, grid.grid_w());
  put_u32(bytes, grid.dim());
  for (float v : grid.data()) put_f32(bytes, v);
  for (float v : grid.timestamps()) put_f32(bytes, v);
  write_file(path, bytes);
}

AttentionMap load_attention(const std::string& path) {
  std::string bytes = read_file(path);
  check_magic(bytes, kAttnMagic, path);
  if (bytes.size() < 8 + 8) fail(Status::truncated, "header truncated: " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::uint32_t T = get_u32(p + 8), N = get_u32(p + 12);
  if (T == 0 || N == 0) fail(Status::format_error, "zero dimension in header: " + path);
  unsigned __int128 count = static_cast<unsigned __int128>(T) * N;
  if (count > kMaxFloats) fail(Status::format_error, "header dimensions too large: " + path);
  std::uint64_t n = static_cast<std::uint64_t>(count);
  if (bytes.size() != 16 + 4 * n) fail(Status::truncated, "payload length mismatch in " + path);
  std::vector<float> scores = decode_f32(p + 16, n);
  for (float v : scores)
    if (!std::isfinite(v) || v < 0.0f) fail(Status::value_error, "bad attention score in " + path);
  return AttentionMap(T, N, std::move(scores));
}

void save_attention(const AttentionMap& attn, const std::string& path) {
  for (float v : attn.scores())
    if (!std::isfinite(v)) fail(Status::value_error, "cannot save non-finite attention scores");
  std::string bytes;
  bytes.reserve(16 + 4 * attn.scores().size());
  bytes.append(kAttnMagic, 8);
  put_u32(bytes, attn.frames());
  put_u32(bytes, attn.per_frame());
  for (float v : attn.scores()) put_f32(bytes, v);
  write_file(path, bytes);
}

TokenGrid normalize_tokens(const TokenGrid& grid, std::uint32_t* zero_count) {
  std::vector<float> out(grid.data().size());
  std::uint32_t d = grid.dim();
  std::uint64_t n_tokens = grid.total_tokens();
  std::uint32_t zeros = 0;
  const float* src = grid.data().data();
  for (std::uint64_t i = 0; i < n_tokens; ++i) {
    const float* x = src + i * d;
    double sq = 0.0;
    for (std::uint32_t c = 0; c < d; ++c) sq += static_cast<double>(x[c]) * x[c];
    float* y = out.data() + i * d;
    if (sq == 0.0) {
      ++zeros;
      std::memcpy(y, x, sizeof(float) * d);
    } else {
      double inv = 1.0 / std::sqrt(sq);
      for (std::uint32_t c = 0; c < d; ++c) y[c] = static_cast<float>(x[c] * inv);
    }
  }
  if (zero_count) *zero_count = zeros;
  return TokenGrid(grid.frames(), grid.grid_h(), grid.grid_w(), d, std::move(out),
                   grid.timestamps());
}

namespace {

std::vector<float> random_unit(Rng& rng, std::uint32_t d) {
  std::vector<float> v(d);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (std::uint32_t c = 0; c < d; ++c) {
      double g = rng.normal();
      v[c] = static_cast<float>(g);
      sq += g * g;
    }
  } while (sq < 1e-12);
  double inv = 1.0 / std::sqrt(sq);
  for (std::uint32_t c = 0; c < d; ++c) v[c] = static_cast<float>(v[c] * inv);
  return v;
}

// 8 compass directions; integer steps keep motion exactly reproducible.
constexpr int kDirs[8][2] = {{0, 1},  {1, 0},  {0, -1}, {-1, 0},
                             {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};

}  // namespace

SynthResult synth_video(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.frames == 0 || spec.grid_h == 0 || spec.grid_w == 0 || spec.dim == 0 ||
      spec.blob_size == 0)
    fail(Status::config_error, "synth dimensions must be positive");
  if (!(spec.noise_sigma >= 0.0) || !(spec.amplitude >= 0.0))
    fail(Status::config_error, "synth amplitude and noise must be >= 0");
  std::uint32_t T = spec.frames, H = spec.grid_h, W = spec.grid_w, d = spec.dim;
  std::uint32_t N = H * W;
  if (spec.n_blobs > N) fail(Status::config_error, "more blobs than grid cells");
  if (spec.blob_size > H || spec.blob_size > W)
    fail(Status::config_error, "blob footprint exceeds grid");

  Rng rng(seed);
  std::vector<std::vector<float>> background(N);
  for (std::uint32_t k = 0; k < N; ++k) background[k] = random_unit(rng, d);
  std::vector<std::vector<float>> blob_feat(spec.n_blobs);
  for (std::uint32_t b = 0; b < spec.n_blobs; ++b) blob_feat[b] = random_unit(rng, d);

  std::vector<std::uint32_t> start(spec.n_blobs);
  std::vector<bool> taken(N, false);
  for (std::uint32_t b = 0; b < spec.n_blobs; ++b) {
    std::uint32_t cell;
    do {
      cell = static_cast<std::uint32_t>(rng.below(N));
    } while (taken[cell]);
    taken[cell] = true;
    start[b] = cell;
  }
  std::vector<int> dir_y(spec.n_blobs), dir_x(spec.n_blobs);
  for (std::uint32_t b = 0; b < spec.n_blobs; ++b) {
    const int* dir = kDirs[rng.below(8)];
    dir_y[b] = dir[0];
    dir_x[b] = dir[1];
  }

  auto wrap = [](long long v, std::uint32_t m) {
    long long r = v % static_cast<long long>(m);
    return static_cast<std::uint32_t>(r < 0 ? r + m : r);
  };

  // content[t][cell]: -1 background, otherwise owning blob (later blobs paint over).
  std::vector<std::vector<std::int32_t>> content(T, std::vector<std::int32_t>(N, -1));
  SynthTruth truth;
  truth.blob_cells.assign(T, std::vector<std::uint32_t>(spec.n_blobs, 0));
  truth.visited.assign(N, 0);
  for (std::uint32_t t = 0; t < T; ++t) {
    for (std::uint32_t b = 0; b < spec.n_blobs; ++b) {
      long long step = std::llround(spec.amplitude * static_cast<double>(t));
      std::uint32_t top = wrap(static_cast<long long>(start[b] / W) + step * dir_y[b], H);
      std::uint32_t left = wrap(static_cast<long long>(start[b] % W) + step * dir_x[b], W);
      truth.blob_cells[t][b] = top * W + left;
      for (std::uint32_t dy = 0; dy < spec.blob_size; ++dy)
        for (std::uint32_t dx = 0; dx < spec.blob_size; ++dx) {
          std::uint32_t cell = wrap(top + dy, H) * W + wrap(left + dx, W);
          content[t][cell] = static_cast<std::int32_t>(b);
          truth.visited[cell] = 1;
        }
    }
  }

  truth.adjacent_static.assign(T > 1 ? T - 1 : 0, std::vector<std::uint8_t>(N, 1));
  for (std::uint32_t t = 0; t + 1 < T; ++t)
    for (std::uint32_t k = 0; k < N; ++k)
      truth.adjacent_static[t][k] = content[t][k] == content[t + 1][k] ? 1 : 0;
  truth.static_throughout.assign(N, 1);
  for (std::uint32_t k = 0; k < N; ++k)
    for (std::uint32_t t = 1; t < T; ++t)
      if (content[t][k] != content[0][k]) {
        truth.static_throughout[k] = 0;
        break;
      }

  std::vector<float> data(static_cast<std::size_t>(T) * N * d);
  std::vector<float> scores(static_cast<std::size_t>(T) * N);
  for (std::uint32_t t = 0; t < T; ++t)
    for (std::uint32_t k = 0; k < N; ++k) {
      std::int32_t id = content[t][k];
      const std::vector<float>& base = id < 0 ? background[k] : blob_feat[id];
      float* out = data.data() + (static_cast<std::size_t>(t) * N + k) * d;
      if (spec.noise_sigma == 0.0) {
        std::memcpy(out, base.data(), sizeof(float) * d);
      } else {
        for (std::uint32_t c = 0; c < d; ++c)
          out[c] = static_cast<float>(base[c] + spec.noise_sigma * rng.normal());
      }
      double level = id < 0 ? 0.01 : 1.0;
      scores[static_cast<std::size_t>(t) * N + k] =
          static_cast<float>(level * (1.0 + 0.1 * rng.uniform()));
    }

  std::vector<float> ts(T);
  for (std::uint32_t t = 0; t < T; ++t) ts[t] = static_cast<float>(0.5 * t);

  return SynthResult{TokenGrid(T, H, W, d, std::move(data), std::move(ts)),
                     AttentionMap(T, N, std::move(scores)), std::move(truth)};
}

}  // namespace tango
