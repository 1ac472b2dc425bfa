#pragma once

#include <cstdint>
#include <vector>

#include "rangepose/core.hpp"

namespace rangepose {

/// Local model z = a + b*x + c*y + d*x*y + e*x^2 + f*y^2 with (x, y) the
/// pixel offsets (du, dv) from the fitted center. Surface partials follow as
/// fx=b, fy=c, fxy=d, fxx=2e, fyy=2f.
struct QuadricCoeffs {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;
};

enum class SurfaceClass {
  EllipticalConvex,     // H<0, K>0
  CylindricalConvex,    // H<0, K=0
  HyperbolicConvex,     // H<0, K<0
  Impossible,           // H=0, K>0
  Planar,               // H=0, K=0
  HyperbolicSymmetric,  // H=0, K<0
  EllipticalConcave,    // H>0, K>0
  CylindricalConcave,   // H>0, K=0
  HyperbolicConcave,    // H>0, K<0
};

const char* to_string(SurfaceClass c);

struct CurvatureField {
  int height = 0, width = 0;
  std::vector<double> mean;      // H
  std::vector<double> gauss;     // K
  std::vector<QuadricCoeffs> coeffs;
  std::vector<std::uint8_t> valid;

  CurvatureField() = default;
  CurvatureField(int h, int w)
      : height(h), width(w),
        mean(static_cast<std::size_t>(h) * w, 0.0),
        gauss(static_cast<std::size_t>(h) * w, 0.0),
        coeffs(static_cast<std::size_t>(h) * w),
        valid(static_cast<std::size_t>(h) * w, 0) {}

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(u) * width + v; }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
  double H(int u, int v) const { return mean[index(u, v)]; }
  double K(int u, int v) const { return gauss[index(u, v)]; }
};

/// Least-squares quadric over the valid pixels of the (2*radius+1)^2 window
/// centered at `at`. Throws UnderDetermined below 6 points and IllConditioned
/// when the normal system's condition number exceeds 1e12.
QuadricCoeffs fit_quadric(const RangeImage& img, PixelCoord at, int radius = 2);

/// Mean and Gaussian curvature from the fitted coefficients:
///   H = ((1+c^2)*2e - 2*b*c*d + (1+b^2)*2f) / (2*(1+b^2+c^2)^(3/2))
///   K = (4*e*f - d^2) / (1+b^2+c^2)^2
void curvature_from_coeffs(const QuadricCoeffs& q, double& H, double& K);

/// Per-pixel curvature over the whole grid. Pixels within `radius` of the
/// border, invalid pixels, and failed fits come out invalid.
CurvatureField curvature_field(const RangeImage& img, int radius = 2);

SurfaceClass hk_classify(double H, double K, double eps_h = 1e-6, double eps_k = 1e-6);

namespace serial {
CurvatureField curvature_field(const RangeImage& img, int radius = 2);
}

}  // namespace rangepose
