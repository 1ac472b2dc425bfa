#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rangepose/core.hpp"
#include "rangepose/imageio.hpp"

namespace rangepose {

/// Parametric face model on a square grid. The unrotated surface is an
/// ellipsoidal dome carrying a nose bump (the global depth maximum), two
/// concave eye sockets, and raised inner socket rims. World axes: x runs
/// along image rows (the eye axis), y along columns, z toward the sensor.
/// Rotations are applied yaw (Ry), then pitch (Rx), then roll (Rz), about
/// the surface centroid; positive pitch tips the nose toward increasing y.
struct SynthFaceParams {
  int grid = 101;

  // dome
  double face_amp = 30.0;
  double face_rx = 42.0;
  double face_ry = 46.0;

  // nose bump; apex_y is the nose position along the cross-eye axis
  double nose_amp = 40.0;
  double nose_sigma_x = 6.5;
  double nose_sigma_y = 7.5;
  double apex_y = -8.0;

  // sockets at (+-socket_x, socket_y) with inner rims toward the midline
  double socket_amp = 16.0;
  double socket_sigma = 5.5;
  double socket_x = 18.0;
  double socket_y = 12.0;
  double rim_amp = 1.0;
  double rim_sigma = 3.0;
  double rim_offset = 6.0;

  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;

  double noise_sigma = 0.0;
  double spike_rate = 0.0;
  double spike_amp = 25.0;
  std::uint64_t seed = 0;

  int supersample = 3;  // sub-pixel sampling factor for the z-buffer
};

struct SpikeInjection {
  PixelCoord at;
  double delta = 0;
};

struct SynthGroundTruth {
  PixelCoord apex;                   // z-buffer projection of the apex vertex
  std::array<PixelCoord, 2> sockets; // projections of the socket centers
  PoseClass label = PoseClass::Frontal;
};

struct SynthResult {
  RangeImage image;
  SynthGroundTruth truth;
  std::vector<SpikeInjection> spikes;
};

/// Deterministic for a fixed parameter set: identical params give
/// bit-identical images, ground truth, and injection records.
SynthResult generate(const SynthFaceParams& params);

/// Pose label implied by an angle triple: one nonzero angle names its axis,
/// nonzero yaw and pitch make a composite with the pitch's sign.
PoseClass label_from_angles(double yaw_deg, double pitch_deg, double roll_deg);

struct CorpusOptions {
  std::vector<PoseLabel> schedule;  // probe poses per subject
  int subjects = 10;
  double noise_sigma = 0.0;
  double spike_rate = 0.0;
  double spike_amp = 25.0;
  std::uint64_t seed = 0;
};

/// Standard evaluation schedule: +-5/+-18/+-40 on each single axis, extra
/// yaw steps +10/+20/+30, and the two composites (yaw +42 then pitch +-10).
std::vector<PoseLabel> default_schedule();

struct CorpusTruthEntry {
  std::string path;
  std::string subject;
  SynthGroundTruth truth;
};

struct CorpusResult {
  CorpusManifest manifest;
  std::vector<CorpusTruthEntry> truth;
};

/// Writes one RGZ file per probe/reference, a `manifest.txt`, and a
/// `truth.json` sidecar into `out_dir`. Subjects differ by seeded parameter
/// jitter; the same seed reproduces the corpus byte for byte.
CorpusResult make_corpus(const CorpusOptions& options, const std::string& out_dir);

/// In-memory variant used by tests and the evaluation harness.
struct CorpusImage {
  CorpusManifest::Entry entry;
  SynthResult data;
};
std::vector<CorpusImage> make_corpus_in_memory(const CorpusOptions& options);

}  // namespace rangepose
