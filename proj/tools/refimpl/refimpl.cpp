#include "refimpl.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace refimpl {

double cosine(const float* a, const float* b, std::size_t d) {
  if (std::memcmp(a, b, d * sizeof(float)) == 0) {
    for (std::size_t i = 0; i < d; ++i)
      if (a[i] != 0.0f) return 1.0;
    return 0.0;
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::min(1.0, std::max(-1.0, c));
}

BruteSegmentation best_segmentation(const float* data, std::uint32_t frames,
                                    std::uint32_t n_cells, std::uint32_t dim, double tau,
                                    std::uint32_t max_len) {
  if (frames == 0 || frames > 20) throw std::runtime_error("enumeration needs 1 <= T <= 20");
  std::uint32_t cap = max_len == 0 ? frames : max_len;

  // adjacent_ok[t][k]: cell k unchanged enough between frames t and t+1.
  std::vector<std::uint8_t> adjacent_ok;
  if (frames > 1) {
    adjacent_ok.resize(static_cast<std::size_t>(frames - 1) * n_cells);
    for (std::uint32_t t = 0; t + 1 < frames; ++t)
      for (std::uint32_t k = 0; k < n_cells; ++k) {
        const float* a = data + (static_cast<std::size_t>(t) * n_cells + k) * dim;
        const float* b = data + (static_cast<std::size_t>(t + 1) * n_cells + k) * dim;
        adjacent_ok[static_cast<std::size_t>(t) * n_cells + k] = cosine(a, b, dim) > tau ? 1 : 0;
      }
  }

  auto prunable = [&](std::uint32_t t_s, std::uint32_t t_e) -> unsigned long long {
    unsigned long long n_static = 0;
    for (std::uint32_t k = 0; k < n_cells; ++k) {
      bool ok = true;
      for (std::uint32_t t = t_s - 1; ok && t + 1 <= t_e - 2; ++t)
        ok = adjacent_ok[static_cast<std::size_t>(t) * n_cells + k] != 0;
      if (ok) ++n_static;
    }
    return n_static * (t_e - t_s - 1);
  };

  BruteSegmentation best;
  bool have = false;
  std::uint32_t n_cuts = frames - 1;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n_cuts); ++bits) {
    // Bit c set = a new segment starts at frame c+2.
    std::vector<std::uint32_t> starts{1};
    for (std::uint32_t c = 0; c < n_cuts; ++c)
      if (bits & (std::uint64_t{1} << c)) starts.push_back(c + 2);
    bool legal = true;
    unsigned long long value = 0;
    for (std::size_t s = 0; legal && s < starts.size(); ++s) {
      std::uint32_t t_s = starts[s];
      std::uint32_t t_e = s + 1 < starts.size() ? starts[s + 1] : frames + 1;
      if (t_e - t_s > cap)
        legal = false;
      else
        value += prunable(t_s, t_e);
    }
    if (!legal) continue;
    if (!have || value > best.total_prunable ||
        (value == best.total_prunable && (starts.size() < best.starts.size() ||
                                          (starts.size() == best.starts.size() &&
                                           starts < best.starts)))) {
      best.starts = starts;
      best.total_prunable = value;
      have = true;
    }
  }
  if (!have) throw std::runtime_error("no legal segmentation under max_len");
  return best;
}

NaiveClusters cluster(std::size_t n, const Distance& dist, std::size_t k, std::uint32_t knn_k) {
  if (n == 0 || k == 0 || k > n || knn_k == 0)
    throw std::runtime_error("bad clustering parameters");
  NaiveClusters res;
  res.rho.resize(n);
  std::size_t k_eff = std::min<std::size_t>(knn_k, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (k_eff == 0) {
      res.rho[i] = 1.0;
      continue;
    }
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) all.emplace_back(dist(i, j), j);
    std::sort(all.begin(), all.end());
    double sum = 0.0;
    for (std::size_t t = 0; t < k_eff; ++t) sum += all[t].first * all[t].first;
    res.rho[i] = std::exp(-sum / static_cast<double>(k_eff));
  }

  res.delta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool found = false;
    double best = 0.0, far = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = dist(i, j);
      if (d > far) far = d;
      bool higher = res.rho[j] > res.rho[i] || (res.rho[j] == res.rho[i] && j < i);
      if (higher && (!found || d < best)) {
        best = d;
        found = true;
      }
    }
    res.delta[i] = found ? best : far;
  }

  res.gamma.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.gamma[i] = res.rho[i] * res.delta[i];

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (res.gamma[a] != res.gamma[b]) return res.gamma[a] > res.gamma[b];
    return a < b;
  });
  res.centers.assign(order.begin(), order.begin() + k);

  res.assignment.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    bool self = false;
    for (std::size_t c = 0; c < k; ++c)
      if (res.centers[c] == i) {
        res.assignment[i] = static_cast<std::uint32_t>(c);
        self = true;
        break;
      }
    if (self) continue;
    std::size_t best_c = 0;
    double best_d = 0.0;
    bool have = false;
    for (std::size_t c = 0; c < k; ++c) {
      double d = dist(i, res.centers[c]);
      if (!have || d < best_d || (d == best_d && res.centers[c] < res.centers[best_c])) {
        best_c = c;
        best_d = d;
        have = true;
      }
    }
    res.assignment[i] = static_cast<std::uint32_t>(best_c);
  }
  return res;
}

Distance euclidean(const float* features, std::size_t n, std::uint32_t dim) {
  (void)n;
  return [features, dim](std::size_t i, std::size_t j) {
    const float* a = features + i * dim;
    const float* b = features + j * dim;
    double sq = 0.0;
    for (std::uint32_t c = 0; c < dim; ++c) {
      double diff = static_cast<double>(a[c]) - b[c];
      sq += diff * diff;
    }
    return std::sqrt(sq);
  };
}

std::vector<float> rotate_direct(const float* x, const RopeSections& sec, double t, double h,
                                 double w) {
  std::uint32_t d = sec.d_t + sec.d_h + sec.d_w;
  std::vector<double> mat(static_cast<std::size_t>(d) * d, 0.0);
  std::uint32_t off = 0;
  auto fill = [&](std::uint32_t d_p, double base, double coord) {
    for (std::uint32_t k = 1; k <= d_p / 2; ++k) {
      double theta = std::pow(base, -2.0 * (k - 1) / d_p);
      double a = coord * theta;
      double c = std::cos(a), s = std::sin(a);
      std::uint32_t r = off + 2 * (k - 1);
      mat[static_cast<std::size_t>(r) * d + r] = c;
      mat[static_cast<std::size_t>(r) * d + r + 1] = -s;
      mat[static_cast<std::size_t>(r + 1) * d + r] = s;
      mat[static_cast<std::size_t>(r + 1) * d + r + 1] = c;
    }
    off += d_p;
  };
  fill(sec.d_t, sec.theta_t, t);
  fill(sec.d_h, sec.theta_h, h);
  fill(sec.d_w, sec.theta_w, w);

  std::vector<float> out(d);
  for (std::uint32_t r = 0; r < d; ++r) {
    double acc = 0.0;
    for (std::uint32_t c = 0; c < d; ++c) acc += mat[static_cast<std::size_t>(r) * d + c] * x[c];
    out[r] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace refimpl
