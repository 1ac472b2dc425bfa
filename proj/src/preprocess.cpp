#include "rangepose/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "rangepose/detail/rng.hpp"

namespace rangepose {
namespace {

using detail::HashRng;
using detail::splitmix64;

struct Plane {
  double a = 0, bu = 0, bv = 0;  // z = a + bu*u + bv*v
  double residual(double u, double v, double z) const { return z - (a + bu * u + bv * v); }
};

struct WindowSample {
  int u, v;
  double z;
};

std::optional<Plane> plane_through(const WindowSample& p, const WindowSample& q,
                                   const WindowSample& r) {
  double au = q.u - p.u, av = q.v - p.v, az = q.z - p.z;
  double bu = r.u - p.u, bv = r.v - p.v, bz = r.z - p.z;
  double det = au * bv - av * bu;
  if (std::abs(det) < 1e-12) return std::nullopt;  // collinear pixel coordinates
  double gu = (az * bv - av * bz) / det;
  double gv = (au * bz - az * bu) / det;
  return Plane{p.z - gu * p.u - gv * p.v, gu, gv};
}

std::optional<Plane> ransac_plane(const std::vector<WindowSample>& pts,
                                  const DespikeParams& params, std::uint64_t window_key) {
  if (pts.size() < 3) return std::nullopt;
  HashRng rng(params.seed ^ window_key);
  std::optional<Plane> best;
  int best_inliers = -1;
  double best_residual = std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::uint32_t>(pts.size());
  for (int it = 0; it < params.iters; ++it) {
    std::uint32_t i = rng.below(n), j = rng.below(n), k = rng.below(n);
    if (i == j || i == k || j == k) continue;
    auto plane = plane_through(pts[i], pts[j], pts[k]);
    if (!plane) continue;
    int inliers = 0;
    double residual_sum = 0;
    for (const auto& p : pts) {
      double r = plane->residual(p.u, p.v, p.z);
      if (std::abs(r) <= params.inlier_tol) {
        ++inliers;
        residual_sum += r * r;
      }
    }
    if (inliers > best_inliers ||
        (inliers == best_inliers && residual_sum < best_residual)) {
      best = plane;
      best_inliers = inliers;
      best_residual = residual_sum;
    }
  }
  return best;
}

// Window origins along one axis: stride steps plus a final origin flush with
// the border so every pixel is covered.
std::vector<int> window_origins(int extent, int window, int stride) {
  std::vector<int> origins;
  int last = std::max(0, extent - window);
  for (int o = 0; o < last; o += stride) origins.push_back(o);
  origins.push_back(last);
  return origins;
}

struct DespikeGrid {
  std::vector<int> us, vs;                 // window origins per axis
  std::vector<std::vector<int>> cover_u;   // origin indices covering each row
  std::vector<std::vector<int>> cover_v;

  DespikeGrid(const RangeImage& img, const DespikeParams& p) {
    us = window_origins(img.height(), p.window, p.stride);
    vs = window_origins(img.width(), p.window, p.stride);
    cover_u.resize(img.height());
    cover_v.resize(img.width());
    for (int i = 0; i < static_cast<int>(us.size()); ++i)
      for (int u = us[i]; u < std::min(us[i] + p.window, img.height()); ++u)
        cover_u[u].push_back(i);
    for (int j = 0; j < static_cast<int>(vs.size()); ++j)
      for (int v = vs[j]; v < std::min(vs[j] + p.window, img.width()); ++v)
        cover_v[v].push_back(j);
  }

  int index(int i, int j) const { return i * static_cast<int>(vs.size()) + j; }
  int count() const { return static_cast<int>(us.size() * vs.size()); }
};

std::vector<WindowSample> window_samples(const RangeImage& img, int u0, int v0, int window) {
  std::vector<WindowSample> pts;
  pts.reserve(static_cast<std::size_t>(window) * window);
  for (int u = u0; u < std::min(u0 + window, img.height()); ++u)
    for (int v = v0; v < std::min(v0 + window, img.width()); ++v)
      if (img.valid(u, v)) pts.push_back({u, v, img.depth(u, v)});
  return pts;
}

DespikeResult despike_impl(const RangeImage& img, const DespikeParams& params, bool parallel) {
  if (params.window < 5 || params.window % 2 == 0)
    throw Error(ErrorCode::InvalidParams, "despike window must be odd and >= 5");
  if (params.stride < 1 || params.iters < 1 || params.inlier_tol <= 0)
    throw Error(ErrorCode::InvalidParams, "bad despike parameters");

  DespikeGrid grid(img, params);
  std::vector<std::optional<Plane>> models(grid.count());

#pragma omp parallel for collapse(2) schedule(dynamic) if (parallel)
  for (int i = 0; i < static_cast<int>(grid.us.size()); ++i) {
    for (int j = 0; j < static_cast<int>(grid.vs.size()); ++j) {
      auto pts = window_samples(img, grid.us[i], grid.vs[j], params.window);
      models[grid.index(i, j)] =
          ransac_plane(pts, params, splitmix64(static_cast<std::uint64_t>(grid.index(i, j))));
    }
  }

  const int height = img.height(), width = img.width();
  std::vector<std::uint8_t> flagged(static_cast<std::size_t>(height) * width, 0);

#pragma omp parallel for schedule(static) if (parallel)
  for (int u = 0; u < height; ++u) {
    for (int v = 0; v < width; ++v) {
      if (!img.valid(u, v)) continue;
      bool covered = false, inlier = false;
      for (int i : grid.cover_u[u]) {
        for (int j : grid.cover_v[v]) {
          const auto& m = models[grid.index(i, j)];
          if (!m) continue;
          covered = true;
          if (std::abs(m->residual(u, v, img.depth(u, v))) <= params.inlier_tol)
            inlier = true;
        }
      }
      if (covered && !inlier)
        flagged[static_cast<std::size_t>(u) * width + v] = 1;
    }
  }

  DespikeResult result{img, flagged};

#pragma omp parallel for schedule(static) if (parallel)
  for (int u = 0; u < height; ++u) {
    for (int v = 0; v < width; ++v) {
      if (!flagged[static_cast<std::size_t>(u) * width + v]) continue;
      // Home window: covering window with a model whose center is nearest in
      // Chebyshev distance; ties go to scan order.
      int home = -1, home_dist = std::numeric_limits<int>::max();
      for (int i : grid.cover_u[u]) {
        for (int j : grid.cover_v[v]) {
          int idx = grid.index(i, j);
          if (!models[idx]) continue;
          int cu = grid.us[i] + params.window / 2;
          int cv = grid.vs[j] + params.window / 2;
          int dist = std::max(std::abs(u - cu), std::abs(v - cv));
          if (dist < home_dist) { home_dist = dist; home = idx; }
        }
      }
      std::vector<double> donors;
      int i = home / static_cast<int>(grid.vs.size());
      int j = home % static_cast<int>(grid.vs.size());
      for (int uu = grid.us[i]; uu < std::min(grid.us[i] + params.window, height); ++uu)
        for (int vv = grid.vs[j]; vv < std::min(grid.vs[j] + params.window, width); ++vv)
          if (img.valid(uu, vv) && !flagged[static_cast<std::size_t>(uu) * width + vv])
            donors.push_back(img.depth(uu, vv));
      if (donors.empty()) {
        result.image.invalidate(u, v);
      } else {
        auto mid = donors.begin() + donors.size() / 2;
        std::nth_element(donors.begin(), mid, donors.end());
        double median = *mid;
        if (donors.size() % 2 == 0) {
          double lower = *std::max_element(donors.begin(), mid);
          median = (median + lower) / 2.0;
        }
        result.image.set(u, v, median);
      }
    }
  }
  return result;
}

RangeImage smooth_impl(const RangeImage& img, double sigma, int radius, bool parallel) {
  if (sigma <= 0) throw Error(ErrorCode::InvalidParams, "sigma must be positive");
  if (radius < 1) throw Error(ErrorCode::InvalidParams, "radius must be >= 1");

  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
  for (int du = -radius; du <= radius; ++du)
    for (int dv = -radius; dv <= radius; ++dv)
      kernel[static_cast<std::size_t>(du + radius) * (2 * radius + 1) + (dv + radius)] =
          std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));

  RangeImage out(img.height(), img.width());
#pragma omp parallel for schedule(static) if (parallel)
  for (int u = 0; u < img.height(); ++u) {
    for (int v = 0; v < img.width(); ++v) {
      if (!img.valid(u, v)) continue;
      double acc = 0, weight = 0;
      for (int du = -radius; du <= radius; ++du) {
        for (int dv = -radius; dv <= radius; ++dv) {
          int uu = u + du, vv = v + dv;
          if (!img.in_bounds(uu, vv) || !img.valid(uu, vv)) continue;
          double w = kernel[static_cast<std::size_t>(du + radius) * (2 * radius + 1) + (dv + radius)];
          acc += w * img.depth(uu, vv);
          weight += w;
        }
      }
      out.set(u, v, acc / weight);  // center is valid, so weight > 0
    }
  }
  return out;
}

}  // namespace

RangeImage ellipse_crop(const RangeImage& img, double scale) {
  if (scale <= 0) throw Error(ErrorCode::InvalidParams, "crop scale must be positive");
  double su = 0, sv = 0;
  std::size_t n = 0;
  for (int u = 0; u < img.height(); ++u)
    for (int v = 0; v < img.width(); ++v)
      if (img.valid(u, v)) { su += u; sv += v; ++n; }
  if (n < 16)
    throw Error(ErrorCode::TooFewValidPixels, "ellipse_crop needs >= 16 valid pixels");
  const double mu = su / n, mv = sv / n;

  double cuu = 0, cvv = 0, cuv = 0;
  for (int u = 0; u < img.height(); ++u)
    for (int v = 0; v < img.width(); ++v)
      if (img.valid(u, v)) {
        double du = u - mu, dv = v - mv;
        cuu += du * du;
        cvv += dv * dv;
        cuv += du * dv;
      }
  cuu /= n; cvv /= n; cuv /= n;

  // Principal axes of the 2x2 coordinate covariance.
  double trace = cuu + cvv;
  double diff = cuu - cvv;
  double root = std::sqrt(diff * diff / 4.0 + cuv * cuv);
  double l1 = trace / 2.0 + root, l2 = trace / 2.0 - root;
  double theta = 0.5 * std::atan2(2.0 * cuv, diff);
  double ct = std::cos(theta), st = std::sin(theta);
  double a1 = scale * std::sqrt(std::max(l1, 0.0));
  double a2 = scale * std::sqrt(std::max(l2, 0.0));
  a1 = std::max(a1, 1e-9);
  a2 = std::max(a2, 1e-9);

  RangeImage out = img;
  for (int u = 0; u < img.height(); ++u) {
    for (int v = 0; v < img.width(); ++v) {
      if (!img.valid(u, v)) continue;
      double du = u - mu, dv = v - mv;
      double t1 = (du * ct + dv * st) / a1;
      double t2 = (-du * st + dv * ct) / a2;
      if (t1 * t1 + t2 * t2 > 1.0) out.invalidate(u, v);
    }
  }
  return out;
}

RangeImage gaussian_smooth(const RangeImage& img, double sigma, int radius) {
  return smooth_impl(img, sigma, radius, true);
}

DespikeResult ransac_despike(const RangeImage& img, const DespikeParams& params) {
  return despike_impl(img, params, true);
}

namespace serial {

RangeImage gaussian_smooth(const RangeImage& img, double sigma, int radius) {
  return smooth_impl(img, sigma, radius, false);
}

DespikeResult ransac_despike(const RangeImage& img, const DespikeParams& params) {
  return despike_impl(img, params, false);
}

}  // namespace serial
}  // namespace rangepose
