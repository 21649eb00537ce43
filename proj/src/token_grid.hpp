#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"

namespace tango {

// 3D position of a token: timestamp in seconds plus 1-based grid indices.
struct Position3D {
  double t = 0.0;
  std::int32_t h = 1;
  std::int32_t w = 1;
};

// Dense feature tensor of a sampled video: frames x grid_h x grid_w x dim,
// frame-major, row-major within a frame, channels last. Immutable once built.
class TokenGrid {
 public:
  TokenGrid(std::uint32_t frames, std::uint32_t grid_h, std::uint32_t grid_w, std::uint32_t dim,
            std::vector<float> data, std::vector<float> timestamps);

  std::uint32_t frames() const { return frames_; }
  std::uint32_t grid_h() const { return grid_h_; }
  std::uint32_t grid_w() const { return grid_w_; }
  std::uint32_t dim() const { return dim_; }
  std::uint32_t cells() const { return grid_h_ * grid_w_; }  // tokens per frame
  std::uint64_t total_tokens() const { return static_cast<std::uint64_t>(frames_) * cells(); }

  const std::vector<float>& data() const { return data_; }
  const std::vector<float>& timestamps() const { return timestamps_; }

  // Feature vector of token (frame, cell); frame is 0-based, cell flat in [0, cells).
  std::span<const float> token(std::uint32_t frame, std::uint32_t cell) const {
    std::size_t off = (static_cast<std::size_t>(frame) * cells() + cell) * dim_;
    return {data_.data() + off, dim_};
  }

  // With timestamp alignment off, or under the all-zero timestamp fallback,
  // the temporal coordinate is the 1-based frame index.
  Position3D position(std::uint32_t frame, std::uint32_t cell, bool timestamp_aligned = true) const {
    Position3D p;
    p.t = timestamp_aligned && has_timestamps_ ? static_cast<double>(timestamps_[frame])
                                               : static_cast<double>(frame + 1);
    p.h = static_cast<std::int32_t>(cell / grid_w_) + 1;
    p.w = static_cast<std::int32_t>(cell % grid_w_) + 1;
    return p;
  }

  bool has_timestamps() const { return has_timestamps_; }

 private:
  std::uint32_t frames_, grid_h_, grid_w_, dim_;
  std::vector<float> data_;
  std::vector<float> timestamps_;
  bool has_timestamps_ = true;
};

// Per-frame, per-cell scalar saliency scores. Scores loaded from files are
// non-negative and finite; mask_sinks (selection.hpp) produces in-memory maps
// holding -inf sentinels, which are valid everywhere except save_attention.
class AttentionMap {
 public:
  AttentionMap(std::uint32_t frames, std::uint32_t per_frame, std::vector<float> scores);

  std::uint32_t frames() const { return frames_; }
  std::uint32_t per_frame() const { return per_frame_; }
  const std::vector<float>& scores() const { return scores_; }

  float at(std::uint32_t frame, std::uint32_t cell) const {
    return scores_[static_cast<std::size_t>(frame) * per_frame_ + cell];
  }
  std::span<const float> frame(std::uint32_t f) const {
    return {scores_.data() + static_cast<std::size_t>(f) * per_frame_, per_frame_};
  }

 private:
  std::uint32_t frames_, per_frame_;
  std::vector<float> scores_;
};

// Flat per-frame cell indices whose scores are masked before selection.
struct SinkSpec {
  std::vector<std::uint32_t> indices;
};

// --- binary formats --------------------------------------------------------
//
// Grid file (.tg):   "TANGOTG1" | u32 T | u32 H | u32 W | u32 d
//                    | T*H*W*d f32 payload | T f32 timestamps, all little-endian.
// Attention (.ta):   "TANGOAT1" | u32 T | u32 N | T*N f32 scores.

TokenGrid load_grid(const std::string& path);
void save_grid(const TokenGrid& grid, const std::string& path);

AttentionMap load_attention(const std::string& path);
void save_attention(const AttentionMap& attn, const std::string& path);

// Unit-normalizes every token; all-zero tokens pass through unchanged and are
// tallied in zero_count.
TokenGrid normalize_tokens(const TokenGrid& grid, std::uint32_t* zero_count = nullptr);

// --- synthetic videos -------------------------------------------------------

struct SynthSpec {
  std::uint32_t frames = 8;
  std::uint32_t grid_h = 8;
  std::uint32_t grid_w = 8;
  std::uint32_t dim = 16;
  std::uint32_t n_blobs = 2;
  double amplitude = 1.0;   // cells of blob travel per frame
  double noise_sigma = 0.0; // iid gaussian added to every component
  std::uint32_t blob_size = 1;  // square footprint side
};

struct SynthTruth {
  // adjacent_static[t][cell]: content at cell identical between frames t and
  // t+1, ignoring noise. T-1 rows.
  std::vector<std::vector<std::uint8_t>> adjacent_static;
  // Cells whose noise-free content never changes across the whole video.
  std::vector<std::uint8_t> static_throughout;
  // blob_cells[frame][blob] = top-left cell of the blob's footprint.
  std::vector<std::vector<std::uint32_t>> blob_cells;
  // Every cell covered by any blob in any frame.
  std::vector<std::uint8_t> visited;
};

struct SynthResult {
  TokenGrid grid;
  AttentionMap attention;
  SynthTruth truth;
};

// Deterministic for a fixed (spec, seed). Background cells carry a constant
// per-cell unit vector; each blob paints its own vector over a moving square
// footprint (toroidal wrap); attention mass concentrates on blob cells.
SynthResult synth_video(const SynthSpec& spec, std::uint64_t seed);

}  // namespace tango
