#include "strope.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace tango {
namespace {

void check_cfg(const RopeConfig& cfg) {
  if (cfg.d_t < 2 || cfg.d_h < 2 || cfg.d_w < 2 || cfg.d_t % 2 || cfg.d_h % 2 || cfg.d_w % 2)
    fail(Status::config_error, "rope section widths must be even and >= 2");
  if (!(cfg.theta_t > 0.0) || !(cfg.theta_h > 0.0) || !(cfg.theta_w > 0.0))
    fail(Status::config_error, "rope bases must be positive");
}

std::vector<double> section_freqs(std::uint32_t d_p, double base) {
  std::vector<double> th(d_p / 2);
  for (std::uint32_t k = 1; k <= d_p / 2; ++k)
    th[k - 1] = std::pow(base, -2.0 * (k - 1) / d_p);
  return th;
}

// Rotates the section of x covered by th in place of out, by angle coord*theta_k
// per pair; returns the component offset past the section.
std::uint32_t rotate_section(std::span<const float> x, std::uint32_t off,
                             const std::vector<double>& th, double coord, std::span<float> out) {
  for (double theta : th) {
    double a = coord * theta;
    double c = std::cos(a), s = std::sin(a);
    double x0 = x[off], x1 = x[off + 1];
    out[off] = static_cast<float>(c * x0 - s * x1);
    out[off + 1] = static_cast<float>(s * x0 + c * x1);
    off += 2;
  }
  return off;
}

std::uint32_t dot_section(std::span<const float> a, std::span<const float> b, std::uint32_t off,
                          const std::vector<double>& th, double coord, double& acc) {
  for (double theta : th) {
    double ang = coord * theta;
    double c = std::cos(ang), s = std::sin(ang);
    double b0 = b[off], b1 = b[off + 1];
    acc += a[off] * (c * b0 - s * b1) + a[off + 1] * (s * b0 + c * b1);
    off += 2;
  }
  return off;
}

}  // namespace

RopeConfig default_partition(std::uint32_t d) {
  if (d < 6 || d % 2) fail(Status::config_error, "rope dimension must be even and >= 6");
  RopeConfig cfg;
  std::uint32_t e = 2 * (d / 6);
  cfg.d_h = cfg.d_w = e;
  cfg.d_t = d - 2 * e;
  check_cfg(cfg);
  return cfg;
}

FrequencyTable frequencies(const RopeConfig& cfg) {
  check_cfg(cfg);
  return {section_freqs(cfg.d_t, cfg.theta_t), section_freqs(cfg.d_h, cfg.theta_h),
          section_freqs(cfg.d_w, cfg.theta_w)};
}

Rope::Rope(const RopeConfig& cfg) : cfg_(cfg), freq_(frequencies(cfg)) {}

void Rope::rotate(std::span<const float> x, const Position3D& p, std::span<float> out) const {
  if (x.size() != cfg_.dim() || out.size() != cfg_.dim())
    fail(Status::config_error, "vector dimension does not match rope config");
  std::uint32_t off = 0;
  off = rotate_section(x, off, freq_.t, p.t, out);
  off = rotate_section(x, off, freq_.h, static_cast<double>(p.h), out);
  rotate_section(x, off, freq_.w, static_cast<double>(p.w), out);
}

std::vector<float> Rope::rotate(std::span<const float> x, const Position3D& p) const {
  std::vector<float> out(x.size());
  rotate(x, p, out);
  return out;
}

double Rope::cos_st(std::span<const float> x_i, const Position3D& p_i, std::span<const float> x_j,
                    const Position3D& p_j) const {
  if (x_i.size() != cfg_.dim() || x_j.size() != cfg_.dim())
    fail(Status::config_error, "vector dimension does not match rope config");
  double dt = p_j.t - p_i.t;
  double dh = static_cast<double>(p_j.h) - p_i.h;
  double dw = static_cast<double>(p_j.w) - p_i.w;
  double acc = 0.0;
  std::uint32_t off = 0;
  off = dot_section(x_i, x_j, off, freq_.t, dt, acc);
  off = dot_section(x_i, x_j, off, freq_.h, dh, acc);
  dot_section(x_i, x_j, off, freq_.w, dw, acc);
  return std::clamp(acc, -1.0, 1.0);
}

double Rope::dist_st(std::span<const float> x_i, const Position3D& p_i, std::span<const float> x_j,
                     const Position3D& p_j) const {
  double c = cos_st(x_i, p_i, x_j, p_j);
  return std::sqrt(std::max(0.0, 2.0 * (1.0 - c)));
}

std::vector<DecayPoint> decay_envelope(const RopeConfig& cfg, Axis axis,
                                       std::span<const double> m_values, std::uint32_t trials,
                                       std::uint64_t seed) {
  if (trials == 0) fail(Status::config_error, "decay trials must be >= 1");
  for (double m : m_values)
    if (!(m >= 0.0)) fail(Status::value_error, "relative distances must be >= 0");
  FrequencyTable tab = frequencies(cfg);
  const std::vector<double>& th = axis == Axis::t ? tab.t : axis == Axis::h ? tab.h : tab.w;
  std::size_t half = th.size();

  std::vector<DecayPoint> out;
  out.reserve(m_values.size());
  for (double m : m_values) {
    DecayPoint pt;
    pt.m = m;

    // S_l = sum_{k=0}^{l-1} e^(i m theta_k), exact partial phase sums.
    double sum_abs = 0.0;
    std::complex<double> s(0.0, 0.0);
    std::vector<std::complex<double>> phase(half);
    for (std::size_t k = 0; k < half; ++k) {
      double a = m * th[k];
      phase[k] = {std::cos(a), std::sin(a)};
      s += phase[k];
      sum_abs += std::abs(s);
    }
    pt.sum_abs_partial = sum_abs;

    Rng rng(seed);
    double mag_acc = 0.0, bound_acc = 0.0;
    std::vector<std::complex<double>> c(half + 1);
    for (std::uint32_t trial = 0; trial < trials; ++trial) {
      // Random unit section vectors; c_k pairs their components as complex
      // products per the decay derivation.
      std::vector<double> xi(2 * half), xj(2 * half);
      double ni = 0.0, nj = 0.0;
      for (std::size_t v = 0; v < 2 * half; ++v) {
        xi[v] = rng.normal();
        xj[v] = rng.normal();
        ni += xi[v] * xi[v];
        nj += xj[v] * xj[v];
      }
      ni = 1.0 / std::sqrt(ni);
      nj = 1.0 / std::sqrt(nj);
      std::complex<double> total(0.0, 0.0);
      double max_step = 0.0;
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> a(xi[2 * k] * ni, xi[2 * k + 1] * ni);
        std::complex<double> b(xj[2 * k] * nj, -xj[2 * k + 1] * nj);
        c[k] = a * b;
        total += c[k] * phase[k];
      }
      c[half] = {0.0, 0.0};
      for (std::size_t k = 0; k < half; ++k)
        max_step = std::max(max_step, std::abs(c[k + 1] - c[k]));
      mag_acc += std::abs(total);
      bound_acc += max_step * sum_abs;
    }
    pt.mean_magnitude = mag_acc / trials;
    pt.mean_bound = bound_acc / trials;
    out.push_back(pt);
  }
  return out;
}

}  // namespace tango
