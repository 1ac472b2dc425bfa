#include "rangepose/curvature.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace rangepose {
namespace {

constexpr int kModelTerms = 6;
using Mat6 = std::array<std::array<double, kModelTerms>, kModelTerms>;
using Vec6 = std::array<double, kModelTerms>;

void model_basis(double x, double y, Vec6& phi) {
  phi = {1.0, x, y, x * y, x * x, y * y};
}

// Cyclic Jacobi eigendecomposition of a symmetric 6x6 matrix. Small enough
// that a handful of sweeps converges to machine precision.
void jacobi_eigen(Mat6 a, Vec6& eigenvalues, Mat6& vectors) {
  for (int i = 0; i < kModelTerms; ++i)
    for (int j = 0; j < kModelTerms; ++j)
      vectors[i][j] = (i == j) ? 1.0 : 0.0;

  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0, diag = 0;
    for (int p = 0; p < kModelTerms; ++p) {
      diag += a[p][p] * a[p][p];
      for (int q = p + 1; q < kModelTerms; ++q) off += a[p][q] * a[p][q];
    }
    if (off <= 1e-28 * (diag + off)) break;

    for (int p = 0; p < kModelTerms; ++p) {
      for (int q = p + 1; q < kModelTerms; ++q) {
        if (a[p][q] == 0.0) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < kModelTerms; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < kModelTerms; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < kModelTerms; ++k) {
          double vkp = vectors[k][p], vkq = vectors[k][q];
          vectors[k][p] = c * vkp - s * vkq;
          vectors[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  for (int i = 0; i < kModelTerms; ++i) eigenvalues[i] = a[i][i];
}

QuadricCoeffs fit_quadric_impl(const RangeImage& img, PixelCoord at, int radius,
                               bool* ok) {
  Mat6 ata{};
  Vec6 atb{};
  int points = 0;
  for (int du = -radius; du <= radius; ++du) {
    for (int dv = -radius; dv <= radius; ++dv) {
      int u = at.u + du, v = at.v + dv;
      if (!img.in_bounds(u, v) || !img.valid(u, v)) continue;
      Vec6 phi;
      model_basis(du, dv, phi);
      double z = img.depth(u, v);
      for (int i = 0; i < kModelTerms; ++i) {
        atb[i] += phi[i] * z;
        for (int j = i; j < kModelTerms; ++j) ata[i][j] += phi[i] * phi[j];
      }
      ++points;
    }
  }
  for (int i = 0; i < kModelTerms; ++i)
    for (int j = 0; j < i; ++j) ata[i][j] = ata[j][i];

  if (points < kModelTerms) {
    if (ok) { *ok = false; return {}; }
    throw Error(ErrorCode::UnderDetermined, "quadric fit needs >= 6 valid pixels");
  }

  Vec6 eigenvalues;
  Mat6 vectors;
  jacobi_eigen(ata, eigenvalues, vectors);
  double lmax = 0, lmin = std::numeric_limits<double>::infinity();
  for (double l : eigenvalues) {
    lmax = std::max(lmax, std::abs(l));
    lmin = std::min(lmin, std::abs(l));
  }
  if (!(lmin > 0) || lmax / lmin > 1e12) {
    if (ok) { *ok = false; return {}; }
    throw Error(ErrorCode::IllConditioned, "rank-deficient quadric normal system");
  }

  // x = V diag(1/lambda) V^T (A^T b)
  Vec6 proj{};
  for (int i = 0; i < kModelTerms; ++i) {
    for (int k = 0; k < kModelTerms; ++k) proj[i] += vectors[k][i] * atb[k];
    proj[i] /= eigenvalues[i];
  }
  Vec6 x{};
  for (int i = 0; i < kModelTerms; ++i)
    for (int k = 0; k < kModelTerms; ++k) x[i] += vectors[i][k] * proj[k];

  if (ok) *ok = true;
  return {x[0], x[1], x[2], x[3], x[4], x[5]};
}

CurvatureField field_impl(const RangeImage& img, int radius, bool parallel) {
  if (radius < 1) throw Error(ErrorCode::InvalidParams, "curvature radius must be >= 1");
  CurvatureField field(img.height(), img.width());
#pragma omp parallel for schedule(static) if (parallel)
  for (int u = radius; u < img.height() - radius; ++u) {
    for (int v = radius; v < img.width() - radius; ++v) {
      if (!img.valid(u, v)) continue;
      bool ok = false;
      QuadricCoeffs q = fit_quadric_impl(img, {u, v}, radius, &ok);
      if (!ok) continue;
      double H, K;
      curvature_from_coeffs(q, H, K);
      if (!std::isfinite(H) || !std::isfinite(K)) continue;
      auto idx = field.index(u, v);
      field.mean[idx] = H;
      field.gauss[idx] = K;
      field.coeffs[idx] = q;
      field.valid[idx] = 1;
    }
  }
  return field;
}

}  // namespace

const char* to_string(SurfaceClass c) {
  switch (c) {
    case SurfaceClass::EllipticalConvex: return "elliptical_convex";
    case SurfaceClass::CylindricalConvex: return "cylindrical_convex";
    case SurfaceClass::HyperbolicConvex: return "hyperbolic_convex";
    case SurfaceClass::Impossible: return "impossible";
    case SurfaceClass::Planar: return "planar";
    case SurfaceClass::HyperbolicSymmetric: return "hyperbolic_symmetric";
    case SurfaceClass::EllipticalConcave: return "elliptical_concave";
    case SurfaceClass::CylindricalConcave: return "cylindrical_concave";
    case SurfaceClass::HyperbolicConcave: return "hyperbolic_concave";
  }
  return "planar";
}

QuadricCoeffs fit_quadric(const RangeImage& img, PixelCoord at, int radius) {
  if (radius < 1) throw Error(ErrorCode::InvalidParams, "fit radius must be >= 1");
  if (!img.in_bounds(at)) throw Error(ErrorCode::InvalidParams, "fit center out of bounds");
  return fit_quadric_impl(img, at, radius, nullptr);
}

void curvature_from_coeffs(const QuadricCoeffs& q, double& H, double& K) {
  double g = 1.0 + q.b * q.b + q.c * q.c;
  H = ((1.0 + q.c * q.c) * 2.0 * q.e - 2.0 * q.b * q.c * q.d +
       (1.0 + q.b * q.b) * 2.0 * q.f) /
      (2.0 * std::pow(g, 1.5));
  K = (4.0 * q.e * q.f - q.d * q.d) / (g * g);
}

CurvatureField curvature_field(const RangeImage& img, int radius) {
  return field_impl(img, radius, true);
}

SurfaceClass hk_classify(double H, double K, double eps_h, double eps_k) {
  int sh = std::abs(H) <= eps_h ? 0 : (H < 0 ? -1 : 1);
  int sk = std::abs(K) <= eps_k ? 0 : (K < 0 ? -1 : 1);
  if (sh < 0) {
    if (sk > 0) return SurfaceClass::EllipticalConvex;
    if (sk == 0) return SurfaceClass::CylindricalConvex;
    return SurfaceClass::HyperbolicConvex;
  }
  if (sh == 0) {
    if (sk > 0) return SurfaceClass::Impossible;
    if (sk == 0) return SurfaceClass::Planar;
    return SurfaceClass::HyperbolicSymmetric;
  }
  if (sk > 0) return SurfaceClass::EllipticalConcave;
  if (sk == 0) return SurfaceClass::CylindricalConcave;
  return SurfaceClass::HyperbolicConcave;
}

namespace serial {
CurvatureField curvature_field(const RangeImage& img, int radius) {
  return field_impl(img, radius, false);
}
}  // namespace serial

}  // namespace rangepose
