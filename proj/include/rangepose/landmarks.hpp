#pragma once

#include <array>

#include "rangepose/core.hpp"
#include "rangepose/curvature.hpp"

namespace rangepose {

struct EyeCorner {
  PixelCoord at;
  double gauss = 0;  // K at the corner
};

struct NoseTip {
  PixelCoord at;
  double depth = 0;
};

/// Nose tip plus the two inner eye corners, corners ordered by descending K.
struct LandmarkSet {
  NoseTip nose;
  std::array<EyeCorner, 2> corners;
};

/// Interior pixel maximizing the 3x3 neighborhood depth sum; candidates need
/// a fully valid 3x3 window. Ties break toward smaller u, then smaller v.
NoseTip find_nose_tip(const RangeImage& img);

/// Candidates are valid field pixels with H > 0 and K > k_thresh. First
/// corner is the max-K candidate, second the max-K candidate at Chebyshev
/// distance >= min_sep from the first.
std::array<EyeCorner, 2> detect_eye_corners(const CurvatureField& field,
                                            double k_thresh = 1e-4, int min_sep = 8);

}  // namespace rangepose
