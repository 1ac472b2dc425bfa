#pragma once

#include <cstdint>
#include <vector>

#include "rangepose/core.hpp"

namespace rangepose {

struct DespikeParams {
  int window = 11;   // odd, >= 5
  int stride = 5;
  int iters = 100;
  double inlier_tol = 2.0;
  std::uint64_t seed = 0;
};

struct DespikeResult {
  RangeImage image;
  std::vector<std::uint8_t> outlier;  // row-major, 1 = flagged

  bool flagged(int u, int v) const {
    return outlier[static_cast<std::size_t>(u) * image.width() + v] != 0;
  }
  std::size_t flagged_count() const {
    std::size_t n = 0;
    for (auto f : outlier) n += f;
    return n;
  }
};

/// Marks pixels outside the moment-fitted ellipse invalid. Ellipse center is
/// the valid-pixel centroid; semi-axes are `scale` times the principal
/// standard deviations of the valid-pixel coordinates, along the principal
/// directions. Needs at least 16 valid pixels.
RangeImage ellipse_crop(const RangeImage& img, double scale = 2.5);

/// Mask-normalized Gaussian blur over the (2*radius+1)^2 window; invalid
/// pixels contribute nothing and stay invalid.
RangeImage gaussian_smooth(const RangeImage& img, double sigma = 1.0, int radius = 2);

/// Windowed plane-RANSAC despiking. A pixel covered by at least one fitted
/// window but an inlier in none is flagged and repaired with the median of
/// the unflagged valid pixels in its home window (invalidated if there are
/// none). Bit-identical output for a fixed seed, regardless of thread count.
DespikeResult ransac_despike(const RangeImage& img, const DespikeParams& params = {});

namespace serial {
RangeImage gaussian_smooth(const RangeImage& img, double sigma = 1.0, int radius = 2);
DespikeResult ransac_despike(const RangeImage& img, const DespikeParams& params = {});
}  // namespace serial

}  // namespace rangepose
