#include <doctest.h>

#include <cmath>

#include "rangepose/detail/rng.hpp"
#include "rangepose/preprocess.hpp"
#include "rangepose/synth.hpp"

using namespace rangepose;

namespace {

RangeImage full_grid(int h, int w, double value) {
  RangeImage img(h, w);
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) img.set(u, v, value);
  return img;
}

RangeImage plane_grid(int h, int w, double a, double bu, double bv) {
  RangeImage img(h, w);
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) img.set(u, v, a + bu * u + bv * v);
  return img;
}

}  // namespace

TEST_CASE("ellipse_crop drops corners and keeps the center") {
  // Scale 1.7 puts the moment ellipse inside the rectangle.
  auto img = full_grid(41, 41, 3.0);
  auto cropped = ellipse_crop(img, 1.7);
  CHECK(cropped.valid(20, 20));
  CHECK_FALSE(cropped.valid(0, 0));
  CHECK_FALSE(cropped.valid(40, 40));
  CHECK(cropped.valid_count() < img.valid_count());
}

TEST_CASE("ellipse_crop moments match a brute-force summation oracle") {
  // Oracle: recompute centroid/covariance directly and verify the kept set
  // is exactly the pixels inside the oracle's ellipse.
  detail::HashRng rng(4);
  RangeImage img(31, 37);
  for (int u = 0; u < 31; ++u)
    for (int v = 0; v < 37; ++v)
      if (rng.uniform01() < 0.6) img.set(u, v, rng.uniform(0, 10));
  const double scale = 1.9;
  auto cropped = ellipse_crop(img, scale);

  double su = 0, sv = 0;
  int n = 0;
  for (int u = 0; u < 31; ++u)
    for (int v = 0; v < 37; ++v)
      if (img.valid(u, v)) { su += u; sv += v; ++n; }
  double mu = su / n, mv = sv / n;
  double cuu = 0, cvv = 0, cuv = 0;
  for (int u = 0; u < 31; ++u)
    for (int v = 0; v < 37; ++v)
      if (img.valid(u, v)) {
        cuu += (u - mu) * (u - mu);
        cvv += (v - mv) * (v - mv);
        cuv += (u - mu) * (v - mv);
      }
  cuu /= n; cvv /= n; cuv /= n;
  // Mahalanobis form of the same ellipse: d^T C^{-1} d <= scale^2.
  double det = cuu * cvv - cuv * cuv;
  REQUIRE(det > 0);
  int mismatches = 0;
  for (int u = 0; u < 31; ++u)
    for (int v = 0; v < 37; ++v) {
      if (!img.valid(u, v)) continue;
      double du = u - mu, dv = v - mv;
      double md = (cvv * du * du - 2 * cuv * du * dv + cuu * dv * dv) / det;
      bool inside = md <= scale * scale + 1e-9;
      if (inside != cropped.valid(u, v)) ++mismatches;
    }
  CHECK(mismatches == 0);
}

TEST_CASE("ellipse_crop precondition") {
  RangeImage img(10, 10);
  img.set(1, 1, 1);
  img.set(2, 5, 2);
  img.set(7, 3, 3);
  CHECK_THROWS_AS(ellipse_crop(img), Error);
}

TEST_CASE("gaussian_smooth fixed points") {
  auto constant = full_grid(9, 9, 42.0);
  auto flat = gaussian_smooth(constant);
  CHECK(flat.valid_count() == constant.valid_count());
  for (int u = 0; u < 9; ++u)
    for (int v = 0; v < 9; ++v)
      CHECK(flat.depth(u, v) == doctest::Approx(42.0).epsilon(1e-12));

  RangeImage lone(7, 7);
  lone.set(3, 3, 5.5);
  auto smoothed = gaussian_smooth(lone);
  CHECK(smoothed.depth(3, 3) == doctest::Approx(5.5));
  CHECK(smoothed.valid_count() == 1);
}

TEST_CASE("gaussian_smooth matches a brute-force masked convolution oracle") {
  detail::HashRng rng(11);
  RangeImage img(25, 25);
  for (int u = 0; u < 25; ++u)
    for (int v = 0; v < 25; ++v)
      if (rng.uniform01() < 0.85) img.set(u, v, rng.normal());

  const double sigma = 1.3;
  const int radius = 3;
  auto fast = gaussian_smooth(img, sigma, radius);

  for (int u = 0; u < 25; ++u) {
    for (int v = 0; v < 25; ++v) {
      CHECK(fast.valid(u, v) == img.valid(u, v));
      if (!img.valid(u, v)) continue;
      double acc = 0, wsum = 0;
      for (int du = -radius; du <= radius; ++du)
        for (int dv = -radius; dv <= radius; ++dv) {
          int uu = u + du, vv = v + dv;
          if (uu < 0 || uu >= 25 || vv < 0 || vv >= 25 || !img.valid(uu, vv)) continue;
          double w = std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));
          acc += w * img.depth(uu, vv);
          wsum += w;
        }
      CHECK(fast.depth(u, v) == doctest::Approx(acc / wsum).epsilon(1e-12));
    }
  }
}

TEST_CASE("despike repairs a single gross outlier on a plane") {
  auto img = plane_grid(21, 21, 10.0, 0.5, -0.25);
  double plane_value = img.depth(9, 12);
  img.set(9, 12, plane_value + 100.0);

  DespikeParams params;
  params.seed = 3;
  auto result = ransac_despike(img, params);
  CHECK(result.flagged_count() == 1);
  CHECK(result.flagged(9, 12));
  CHECK(std::abs(result.image.depth(9, 12) - plane_value) <= params.inlier_tol);
}

TEST_CASE("despike leaves a clean plane alone") {
  auto img = plane_grid(21, 21, 5.0, -0.2, 0.3);
  auto result = ransac_despike(img, {.seed = 8});
  CHECK(result.flagged_count() == 0);
  CHECK(result.image == img);
}

TEST_CASE("despike is deterministic and matches its serial reference") {
  SynthFaceParams p;
  p.noise_sigma = 0.5;
  p.spike_rate = 0.01;
  p.seed = 21;
  auto img = generate(p).image;

  DespikeParams params;
  params.seed = 77;
  auto a = ransac_despike(img, params);
  auto b = ransac_despike(img, params);
  auto c = serial::ransac_despike(img, params);
  CHECK(a.image == b.image);
  CHECK(a.outlier == b.outlier);
  CHECK(a.image == c.image);
  CHECK(a.outlier == c.outlier);
}

TEST_CASE("despike recall and false positives against the injection record") {
  SynthFaceParams p;
  p.noise_sigma = 0.5;
  p.spike_rate = 0.01;
  p.spike_amp = 25.0;
  p.seed = 5;
  auto face = generate(p);
  REQUIRE(face.spikes.size() > 10);

  DespikeParams params;
  params.seed = 13;
  auto result = ransac_despike(face.image, params);

  std::size_t hit = 0;
  for (const auto& spike : face.spikes)
    if (result.flagged(spike.at.u, spike.at.v)) ++hit;
  double recall = static_cast<double>(hit) / face.spikes.size();
  CHECK(recall >= 0.95);

  std::size_t false_pos = result.flagged_count() - hit;
  std::size_t clean = face.image.valid_count() - face.spikes.size();
  CHECK(static_cast<double>(false_pos) / clean <= 0.01);
}

TEST_CASE("operations never validate an invalid pixel and are idempotent on fixed points") {
  auto img = plane_grid(31, 31, 20.0, 0.1, 0.2);
  img.invalidate(4, 7);
  img.invalidate(15, 15);

  auto cropped = ellipse_crop(img, 1.8);
  auto cropped2 = ellipse_crop(cropped, 1.8);
  for (int u = 0; u < 31; ++u)
    for (int v = 0; v < 31; ++v)
      if (!img.valid(u, v)) {
        CHECK_FALSE(cropped.valid(u, v));
      }
  // Cropping an already-cropped image shrinks it slightly less each round;
  // the fixed-point claim is checked as: mask of round 2 within round 1.
  for (int u = 0; u < 31; ++u)
    for (int v = 0; v < 31; ++v)
      if (cropped2.valid(u, v)) CHECK(cropped.valid(u, v));

  auto smoothed = gaussian_smooth(img);
  for (int u = 0; u < 31; ++u)
    for (int v = 0; v < 31; ++v) CHECK(smoothed.valid(u, v) == img.valid(u, v));

  auto despiked = ransac_despike(img, {.seed = 1});
  CHECK(despiked.image == img);
}
