#include "rangepose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>

#include <json.hpp>

#include "rangepose/detail/rng.hpp"

namespace rangepose {
namespace {

using detail::HashRng;
using detail::splitmix64;

constexpr double kDepthOffset = 100.0;

double gauss2(double dx, double dy, double sx, double sy) {
  return std::exp(-(dx * dx / (2.0 * sx * sx) + dy * dy / (2.0 * sy * sy)));
}

std::optional<double> surface_height(const SynthFaceParams& p, double x, double y) {
  double q = (x / p.face_rx) * (x / p.face_rx) + (y / p.face_ry) * (y / p.face_ry);
  if (q >= 1.0) return std::nullopt;
  // Paraboloid profile: finite slope at the rim, so rotated renders have no
  // vertical silhouette walls that would fit as spurious high-curvature pixels.
  double z = p.face_amp * (1.0 - q);
  z += p.nose_amp * gauss2(x, y - p.apex_y, p.nose_sigma_x, p.nose_sigma_y);
  // Pairs are combined before accumulating into z so mirrored x values give
  // bit-identical heights regardless of which socket comes first.
  z -= p.socket_amp *
       (gauss2(x - p.socket_x, y - p.socket_y, p.socket_sigma, p.socket_sigma) +
        gauss2(x + p.socket_x, y - p.socket_y, p.socket_sigma, p.socket_sigma));
  z += p.rim_amp *
       (gauss2(x - (p.socket_x - p.rim_offset), y - p.socket_y, p.rim_sigma, p.rim_sigma) +
        gauss2(x + (p.socket_x - p.rim_offset), y - p.socket_y, p.rim_sigma, p.rim_sigma));
  return z;
}

struct Rotation {
  double m[3][3];

  static Rotation yaw_pitch_roll(double yaw_deg, double pitch_deg, double roll_deg) {
    auto rad = [](double d) { return d * std::numbers::pi / 180.0; };
    double cy = std::cos(rad(yaw_deg)), sy = std::sin(rad(yaw_deg));
    double cp = std::cos(rad(pitch_deg)), sp = std::sin(rad(pitch_deg));
    double cr = std::cos(rad(roll_deg)), sr = std::sin(rad(roll_deg));
    // Ry: x' = x*cy + z*sy, z' = -x*sy + z*cy  (yaw about the vertical axis)
    double ry[3][3] = {{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}};
    // Rx: y' = y*cp + z*sp, z' = -y*sp + z*cp (positive pitch tips nose to +y)
    double rx[3][3] = {{1, 0, 0}, {0, cp, sp}, {0, -sp, cp}};
    // Rz: in-plane roll
    double rz[3][3] = {{cr, -sr, 0}, {sr, cr, 0}, {0, 0, 1}};
    auto mul = [](const double a[3][3], const double b[3][3], double out[3][3]) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          out[i][j] = 0;
          for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
        }
    };
    double tmp[3][3];
    Rotation r;
    // Intrinsic composition: yaw first, then pitch about the face's own
    // horizontal axis (R = Ry*Rx). A composite pose therefore elevates the
    // nose without tilting the eye line in the image plane.
    mul(ry, rx, tmp);
    mul(rz, tmp, r.m);
    return r;
  }

  void apply(double& x, double& y, double& z) const {
    double nx = m[0][0] * x + m[0][1] * y + m[0][2] * z;
    double ny = m[1][0] * x + m[1][1] * y + m[1][2] * z;
    double nz = m[2][0] * x + m[2][1] * y + m[2][2] * z;
    x = nx; y = ny; z = nz;
  }
};

void validate(const SynthFaceParams& p) {
  if (p.grid < 9) throw Error(ErrorCode::InvalidParams, "grid too small");
  if (std::abs(p.yaw_deg) > 60 || std::abs(p.pitch_deg) > 60 || std::abs(p.roll_deg) > 60)
    throw Error(ErrorCode::InvalidParams, "rotation outside the +-60 degree generator envelope");
  if (p.noise_sigma < 0 || p.spike_rate < 0 || p.spike_rate > 1)
    throw Error(ErrorCode::InvalidParams, "bad noise parameters");
  if (p.supersample < 1) throw Error(ErrorCode::InvalidParams, "supersample must be >= 1");
}

}  // namespace

PoseClass label_from_angles(double yaw_deg, double pitch_deg, double roll_deg) {
  bool y = yaw_deg != 0, x = pitch_deg != 0, z = roll_deg != 0;
  if (y && x) return pitch_deg > 0 ? PoseClass::PositiveYX : PoseClass::NegativeYX;
  if (y) return PoseClass::RotatedY;
  if (x) return PoseClass::RotatedX;
  if (z) return PoseClass::RotatedZ;
  return PoseClass::Frontal;
}

SynthResult generate(const SynthFaceParams& p) {
  validate(p);
  const double center = (p.grid - 1) / 2.0;
  const int samples = (p.grid - 1) * p.supersample + 1;
  const double step = 1.0 / p.supersample;
  // Offsets from the sample midpoint so mirrored samples are exact
  // negations of each other; keeps the frontal face bit-symmetric.
  const int half = (samples - 1) / 2;
  auto coord = [&](int i) { return (i - half) * step; };

  // Centroid of the unrotated surface and the apex vertex (sample argmax).
  double sx = 0, sy = 0, sz = 0;
  std::size_t n = 0;
  double apex_x = 0, apex_y = 0, apex_z = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    double x = coord(i);
    for (int j = 0; j < samples; ++j) {
      double y = coord(j);
      auto z = surface_height(p, x, y);
      if (!z) continue;
      sx += x; sy += y; sz += *z;
      ++n;
      if (*z > apex_z) { apex_x = x; apex_y = y; apex_z = *z; }
    }
  }
  if (n == 0) throw Error(ErrorCode::InvalidParams, "face model has no surface");
  const double cx = sx / n, cy = sy / n, cz = sz / n;

  Rotation rot = Rotation::yaw_pitch_roll(p.yaw_deg, p.pitch_deg, p.roll_deg);
  const bool rotated = p.yaw_deg != 0 || p.pitch_deg != 0 || p.roll_deg != 0;
  auto project = [&](double x, double y, double z, double& pu, double& pv, double& pz) {
    // The identity path avoids the centroid round trip, which would break
    // exact bilateral symmetry of the frontal render.
    if (rotated) {
      x -= cx; y -= cy; z -= cz;
      rot.apply(x, y, z);
      x += cx; y += cy; z += cz;
    }
    pu = x + center;
    pv = y + center;
    pz = z + kDepthOffset;
  };

  RangeImage img(p.grid, p.grid);
  std::vector<double> zbuf(static_cast<std::size_t>(p.grid) * p.grid,
                           -std::numeric_limits<double>::infinity());
  for (int i = 0; i < samples; ++i) {
    double x = coord(i);
    for (int j = 0; j < samples; ++j) {
      double y = coord(j);
      auto z = surface_height(p, x, y);
      if (!z) continue;
      double pu, pv, pz;
      project(x, y, *z, pu, pv, pz);
      int u = static_cast<int>(std::lround(pu));
      int v = static_cast<int>(std::lround(pv));
      if (u < 0 || u >= p.grid || v < 0 || v >= p.grid) continue;
      auto& cell = zbuf[static_cast<std::size_t>(u) * p.grid + v];
      cell = std::max(cell, pz);  // nearest-to-sensor wins
    }
  }
  for (int u = 0; u < p.grid; ++u)
    for (int v = 0; v < p.grid; ++v) {
      double z = zbuf[static_cast<std::size_t>(u) * p.grid + v];
      if (std::isfinite(z)) img.set(u, v, z);
    }

  SynthResult result{std::move(img), {}, {}};
  auto project_vertex = [&](double x, double y) {
    double z = surface_height(p, x, y).value_or(0.0);
    double pu, pv, pz;
    project(x, y, z, pu, pv, pz);
    return PixelCoord{static_cast<int>(std::lround(pu)), static_cast<int>(std::lround(pv))};
  };
  result.truth.apex = project_vertex(apex_x, apex_y);
  result.truth.sockets = {project_vertex(p.socket_x, p.socket_y),
                          project_vertex(-p.socket_x, p.socket_y)};
  result.truth.label = label_from_angles(p.yaw_deg, p.pitch_deg, p.roll_deg);

  if (p.noise_sigma > 0) {
    for (int u = 0; u < p.grid; ++u) {
      for (int v = 0; v < p.grid; ++v) {
        if (!result.image.valid(u, v)) continue;
        HashRng rng(splitmix64(p.seed) ^ splitmix64(0x6e6f697365ULL) ^
                    (static_cast<std::uint64_t>(u) << 32 | static_cast<std::uint32_t>(v)));
        result.image.set(u, v, result.image.depth(u, v) + p.noise_sigma * rng.normal());
      }
    }
  }
  if (p.spike_rate > 0) {
    for (int u = 0; u < p.grid; ++u) {
      for (int v = 0; v < p.grid; ++v) {
        if (!result.image.valid(u, v)) continue;
        HashRng rng(splitmix64(p.seed) ^ splitmix64(0x7370696b65ULL) ^
                    (static_cast<std::uint64_t>(u) << 32 | static_cast<std::uint32_t>(v)));
        if (rng.uniform01() > p.spike_rate) continue;
        double delta = (rng.uniform01() < 0.5 ? 1.0 : -1.0) * p.spike_amp;
        double base = result.image.depth(u, v);
        double spiked = base + delta;
        result.image.set(u, v, spiked);
        // Record the realized delta so subtracting it restores `base` exactly.
        result.spikes.push_back({{u, v}, spiked - base});
      }
    }
  }
  return result;
}

std::vector<PoseLabel> default_schedule() {
  std::vector<PoseLabel> schedule;
  for (double a : {5.0, -5.0, 18.0, -18.0, 40.0, -40.0}) {
    schedule.push_back({PoseLabel::Kind::X, a, 0});
    schedule.push_back({PoseLabel::Kind::Y, a, 0});
    schedule.push_back({PoseLabel::Kind::Z, a, 0});
  }
  for (double a : {10.0, 20.0, 30.0})
    schedule.push_back({PoseLabel::Kind::Y, a, 0});
  schedule.push_back({PoseLabel::Kind::YX, 42.0, 10.0});
  schedule.push_back({PoseLabel::Kind::YX, 42.0, -10.0});
  return schedule;
}

namespace {

SynthFaceParams subject_params(const CorpusOptions& options, int subject) {
  HashRng rng(options.seed ^ splitmix64(0x73756263ULL + subject));
  SynthFaceParams p;
  p.nose_amp *= rng.uniform(0.95, 1.05);
  p.apex_y += rng.uniform(-1.0, 1.0);
  p.nose_sigma_x *= rng.uniform(0.95, 1.05);
  p.socket_amp *= rng.uniform(0.9, 1.1);
  p.socket_x += rng.uniform(-1.0, 1.0);
  p.socket_y += rng.uniform(-1.0, 1.0);
  p.face_amp *= rng.uniform(0.97, 1.03);
  p.noise_sigma = options.noise_sigma;
  p.spike_rate = options.spike_rate;
  p.spike_amp = options.spike_amp;
  return p;
}

void apply_pose(SynthFaceParams& p, const PoseLabel& label) {
  switch (label.kind) {
    case PoseLabel::Kind::Frontal: break;
    case PoseLabel::Kind::X: p.pitch_deg = label.angle; break;
    case PoseLabel::Kind::Y: p.yaw_deg = label.angle; break;
    case PoseLabel::Kind::Z: p.roll_deg = label.angle; break;
    case PoseLabel::Kind::YX:
      p.yaw_deg = label.angle;
      p.pitch_deg = label.pitch;
      break;
  }
}

std::string file_stem(const std::string& subject, const PoseLabel& label,
                      CorpusManifest::Role role) {
  std::string pose = label.to_label();
  std::replace(pose.begin(), pose.end(), ':', '_');
  std::replace(pose.begin(), pose.end(), '/', '_');
  std::replace(pose.begin(), pose.end(), '+', 'p');
  std::replace(pose.begin(), pose.end(), '-', 'm');
  std::string tag = role == CorpusManifest::Role::FrontalRef ? "ref"
                    : role == CorpusManifest::Role::YRef     ? "yref"
                                                             : "probe";
  return subject + "_" + tag + "_" + pose + ".rgz";
}

}  // namespace

std::vector<CorpusImage> make_corpus_in_memory(const CorpusOptions& options) {
  if (options.subjects < 1) throw Error(ErrorCode::InvalidParams, "need at least one subject");
  std::vector<CorpusImage> corpus;
  for (int s = 0; s < options.subjects; ++s) {
    std::string subject = "s" + std::to_string(s);
    SynthFaceParams base = subject_params(options, s);

    std::set<double> composite_yaws;
    for (const auto& label : options.schedule)
      if (label.kind == PoseLabel::Kind::YX) composite_yaws.insert(label.angle);

    int file_index = 0;
    auto emit = [&](const PoseLabel& label, CorpusManifest::Role role) {
      SynthFaceParams p = base;
      apply_pose(p, label);
      p.seed = splitmix64(options.seed) ^ splitmix64((static_cast<std::uint64_t>(s) << 16) + file_index);
      ++file_index;
      if (role != CorpusManifest::Role::Probe) {
        // References are captured clean; only probes carry noise and spikes.
        p.noise_sigma = 0;
        p.spike_rate = 0;
      }
      CorpusManifest::Entry entry{file_stem(subject, label, role), subject, role, label};
      corpus.push_back({entry, generate(p)});
    };

    emit({PoseLabel::Kind::Frontal, 0, 0}, CorpusManifest::Role::FrontalRef);
    for (double yaw : composite_yaws)
      emit({PoseLabel::Kind::Y, yaw, 0}, CorpusManifest::Role::YRef);
    for (const auto& label : options.schedule)
      emit(label, CorpusManifest::Role::Probe);
  }
  return corpus;
}

CorpusResult make_corpus(const CorpusOptions& options, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create '" + out_dir + "'");

  auto corpus = make_corpus_in_memory(options);
  CorpusResult result;
  nlohmann::json truth_doc = nlohmann::json::array();
  for (const auto& item : corpus) {
    save_grid_file(item.data.image, (fs::path(out_dir) / item.entry.path).string());
    result.manifest.entries.push_back(item.entry);
    result.truth.push_back({item.entry.path, item.entry.subject, item.data.truth});
    truth_doc.push_back({
        {"path", item.entry.path},
        {"subject", item.entry.subject},
        {"label", to_string(item.data.truth.label)},
        {"apex", {item.data.truth.apex.u, item.data.truth.apex.v}},
        {"sockets",
         {{item.data.truth.sockets[0].u, item.data.truth.sockets[0].v},
          {item.data.truth.sockets[1].u, item.data.truth.sockets[1].v}}},
    });
  }

  std::ofstream manifest_out(fs::path(out_dir) / "manifest.txt");
  manifest_out << save_manifest(result.manifest);
  std::ofstream truth_out(fs::path(out_dir) / "truth.json");
  truth_out << truth_doc.dump(2) << "\n";
  if (!manifest_out || !truth_out)
    throw Error(ErrorCode::IoFailure, "failed writing corpus metadata");
  return result;
}

}  // namespace rangepose
