// Timing comparison of the OpenMP kernels against their serial references.
// Also cross-checks that both paths produce identical results.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rangepose/curvature.hpp"
#include "rangepose/preprocess.hpp"
#include "rangepose/synth.hpp"

namespace rp = rangepose;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warmup
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

rp::RangeImage big_face(int grid) {
  rp::SynthFaceParams p;
  double f = grid / 101.0;
  p.grid = grid;
  p.face_rx *= f;
  p.face_ry *= f;
  p.nose_sigma_x *= f;
  p.nose_sigma_y *= f;
  p.apex_y *= f;
  p.socket_sigma *= f;
  p.socket_x *= f;
  p.socket_y *= f;
  p.rim_sigma *= f;
  p.rim_offset *= f;
  p.noise_sigma = 0.5;
  p.spike_rate = 0.01;
  p.seed = 7;
  p.supersample = 2;
  return rp::generate(p).image;
}

}  // namespace

int main(int argc, char** argv) {
  int grid = argc > 1 ? std::atoi(argv[1]) : 301;
  int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  rp::RangeImage img = big_face(grid);

#ifdef _OPENMP
  std::printf("grid %dx%d, %d reps, omp_max_threads=%d\n", grid, grid, reps,
              omp_get_max_threads());
#else
  std::printf("grid %dx%d, %d reps, OpenMP disabled\n", grid, grid, reps);
#endif
  std::printf("%-18s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

  auto report = [&](const char* name, double serial, double parallel, bool identical) {
    std::printf("%-18s %12.2f %12.2f %7.2fx%s\n", name, serial, parallel,
                serial / parallel, identical ? "" : "  RESULTS DIFFER");
  };

  {
    auto a = rp::serial::gaussian_smooth(img);
    auto b = rp::gaussian_smooth(img);
    report("gaussian_smooth",
           time_ms([&] { rp::serial::gaussian_smooth(img); }, reps),
           time_ms([&] { rp::gaussian_smooth(img); }, reps), a == b);
  }
  {
    rp::DespikeParams params;
    auto a = rp::serial::ransac_despike(img, params);
    auto b = rp::ransac_despike(img, params);
    report("ransac_despike",
           time_ms([&] { rp::serial::ransac_despike(img, params); }, reps),
           time_ms([&] { rp::ransac_despike(img, params); }, reps),
           a.image == b.image && a.outlier == b.outlier);
  }
  {
    auto a = rp::serial::curvature_field(img);
    auto b = rp::curvature_field(img);
    bool identical = a.valid == b.valid && a.mean == b.mean && a.gauss == b.gauss;
    report("curvature_field",
           time_ms([&] { rp::serial::curvature_field(img); }, reps),
           time_ms([&] { rp::curvature_field(img); }, reps), identical);
  }
  return 0;
}
