#include "rangepose/landmarks.hpp"

#include <algorithm>
#include <cmath>

namespace rangepose {
namespace {

bool window_fully_valid(const RangeImage& img, int u, int v) {
  for (int du = -1; du <= 1; ++du)
    for (int dv = -1; dv <= 1; ++dv)
      if (!img.valid(u + du, v + dv)) return false;
  return true;
}

int chebyshev(PixelCoord a, PixelCoord b) {
  return std::max(std::abs(a.u - b.u), std::abs(a.v - b.v));
}

}  // namespace

NoseTip find_nose_tip(const RangeImage& img) {
  bool found = false;
  double best_sum = 0;
  PixelCoord best{};
  for (int u = 1; u + 1 < img.height(); ++u) {
    for (int v = 1; v + 1 < img.width(); ++v) {
      if (!window_fully_valid(img, u, v)) continue;
      double sum = 0;
      for (int du = -1; du <= 1; ++du)
        for (int dv = -1; dv <= 1; ++dv) sum += img.depth(u + du, v + dv);
      if (!found || sum > best_sum) {
        found = true;
        best_sum = sum;
        best = {u, v};
      }
    }
  }
  if (!found)
    throw Error(ErrorCode::NoInteriorPixels, "no interior pixel has a fully valid 3x3 window");
  return {best, img.depth(best)};
}

std::array<EyeCorner, 2> detect_eye_corners(const CurvatureField& field,
                                            double k_thresh, int min_sep) {
  bool have_first = false;
  EyeCorner first{};
  for (int u = 0; u < field.height; ++u) {
    for (int v = 0; v < field.width; ++v) {
      if (!field.is_valid(u, v)) continue;
      if (!(field.H(u, v) > 0 && field.K(u, v) > k_thresh)) continue;
      if (!have_first || field.K(u, v) > first.gauss) {
        have_first = true;
        first = {{u, v}, field.K(u, v)};
      }
    }
  }
  if (!have_first)
    throw Error(ErrorCode::NoCandidates, "no pixel passes H > 0 and K > threshold");

  bool have_second = false;
  EyeCorner second{};
  for (int u = 0; u < field.height; ++u) {
    for (int v = 0; v < field.width; ++v) {
      if (!field.is_valid(u, v)) continue;
      if (!(field.H(u, v) > 0 && field.K(u, v) > k_thresh)) continue;
      if (chebyshev({u, v}, first.at) < min_sep) continue;
      if (!have_second || field.K(u, v) > second.gauss) {
        have_second = true;
        second = {{u, v}, field.K(u, v)};
      }
    }
  }
  if (!have_second)
    throw Error(ErrorCode::OneCandidateOnly, "no second candidate clears the separation rule");
  return {first, second};
}

}  // namespace rangepose
