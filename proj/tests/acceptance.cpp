// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "rangepose/pipeline.hpp"
#include "rangepose/synth.hpp"

namespace rp = rangepose;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
rp::RangeImage grid_from(int size, F&& f) {
  rp::RangeImage img(size, size);
  double c = (size - 1) / 2.0;
  for (int u = 0; u < size; ++u)
    for (int v = 0; v < size; ++v) {
      double z = f(u - c, v - c);
      if (std::isfinite(z)) img.set(u, v, z);
    }
  return img;
}

rp::GridLoader corpus_loader(const std::vector<rp::CorpusImage>& corpus) {
  auto by_path = std::make_shared<std::map<std::string, rp::RangeImage>>();
  for (const auto& item : corpus) by_path->emplace(item.entry.path, item.data.image);
  return [by_path](const std::string& path) { return by_path->at(path); };
}

rp::CorpusManifest manifest_of(const std::vector<rp::CorpusImage>& corpus) {
  rp::CorpusManifest manifest;
  for (const auto& item : corpus) manifest.entries.push_back(item.entry);
  return manifest;
}

bool within(rp::PixelCoord a, rp::PixelCoord b, int tol) {
  return std::abs(a.u - b.u) <= tol && std::abs(a.v - b.v) <= tol;
}

// --- criterion 1: curvature oracle (sphere, plane, saddle) -----------------

bool criterion_curvature_oracle() {
  auto start = Clock::now();
  bool ok = true;

  for (double R : {30.0, 50.0, 80.0}) {
    auto img = grid_from(101, [R](double x, double y) {
      double q = R * R - x * x - y * y;
      return q > 0 ? std::sqrt(q) : std::nan("");
    });
    auto field = rp::curvature_field(img);
    std::vector<double> rel_err;
    double c = 50.0;
    for (int u = 0; u < 101; ++u)
      for (int v = 0; v < 101; ++v) {
        if (!field.is_valid(u, v)) continue;
        double r2 = (u - c) * (u - c) + (v - c) * (v - c);
        if (r2 / (R * R - r2) >= 1.0) continue;  // gradient magnitude >= 1
        rel_err.push_back(std::abs(field.K(u, v) - 1.0 / (R * R)) * R * R);
      }
    std::nth_element(rel_err.begin(), rel_err.begin() + rel_err.size() / 2, rel_err.end());
    double median = rel_err[rel_err.size() / 2];
    std::printf("    sphere R=%.0f: median |K - 1/R^2| / (1/R^2) = %.4f (n=%zu)\n", R,
                median, rel_err.size());
    ok = ok && median <= 0.10;
  }

  auto plane = grid_from(81, [](double x, double y) { return 2.0 + 0.1 * x - 0.3 * y; });
  auto plane_field = rp::curvature_field(plane);
  double max_h = 0, max_k = 0;
  for (int u = 0; u < 81; ++u)
    for (int v = 0; v < 81; ++v)
      if (plane_field.is_valid(u, v)) {
        max_h = std::max(max_h, std::abs(plane_field.H(u, v)));
        max_k = std::max(max_k, std::abs(plane_field.K(u, v)));
      }
  std::printf("    plane: max|H| = %.2e, max|K| = %.2e\n", max_h, max_k);
  ok = ok && max_h < 1e-9 && max_k < 1e-9;

  auto saddle = grid_from(41, [](double x, double y) { return x * y / 10.0; });
  auto saddle_field = rp::curvature_field(saddle);
  double k_center = saddle_field.K(20, 20), h_center = saddle_field.H(20, 20);
  std::printf("    saddle center: K = %.8f, H = %.2e\n", k_center, h_center);
  ok = ok && std::abs(k_center - (-0.01)) <= 1e-6 && std::abs(h_center) <= 1e-6;

  double elapsed = seconds_since(start);
  std::printf("    runtime %.2f s (budget 5 s)\n", elapsed);
  return ok && elapsed < 5.0;
}

// --- criterion 2: derivative check on a smooth wave ------------------------

bool criterion_derivative_check() {
  auto img = grid_from(61, [](double x, double y) {
    return std::sin(x / 10.0) * std::cos(y / 10.0);
  });
  auto field = rp::curvature_field(img, 1);
  double c = 30.0, max_err = 0;
  for (int u = 1; u < 60; ++u)
    for (int v = 1; v < 60; ++v) {
      if (!field.is_valid(u, v)) return false;
      double x = u - c, y = v - c;
      double fx = std::cos(x / 10.0) * std::cos(y / 10.0) / 10.0;
      double fy = -std::sin(x / 10.0) * std::sin(y / 10.0) / 10.0;
      double fxy = -std::cos(x / 10.0) * std::sin(y / 10.0) / 100.0;
      double fxx = -std::sin(x / 10.0) * std::cos(y / 10.0) / 100.0;
      double fyy = fxx;
      const auto& q = field.coeffs[field.index(u, v)];
      max_err = std::max({max_err, std::abs(q.b - fx), std::abs(q.c - fy),
                          std::abs(q.d - fxy), std::abs(2 * q.e - fxx),
                          std::abs(2 * q.f - fyy)});
    }
  std::printf("    max abs error of (b, c, d, 2e, 2f) vs analytic partials = %.2e\n",
              max_err);
  return max_err <= 1e-3;
}

// --- criterion 3: HK classification --------------------------------------

bool criterion_hk_classification() {
  using SC = rp::SurfaceClass;
  bool ok = true;
  const std::tuple<double, double, SC> cells[] = {
      {-0.02, 4e-4, SC::EllipticalConvex},  {-0.02, 0.0, SC::CylindricalConvex},
      {-0.02, -4e-4, SC::HyperbolicConvex}, {0.0, 0.5, SC::Impossible},
      {0.0, 0.0, SC::Planar},               {0.0, -0.5, SC::HyperbolicSymmetric},
      {0.02, 4e-4, SC::EllipticalConcave},  {0.02, 0.0, SC::CylindricalConcave},
      {0.02, -4e-4, SC::HyperbolicConcave},
      // dead-zone boundaries
      {1e-6, 1e-6, SC::Planar},             {-1e-6, -1e-6, SC::Planar},
  };
  for (const auto& [h, k, expected] : cells)
    ok = ok && rp::hk_classify(h, k) == expected;
  std::printf("    all 9 table cells plus boundaries: %s\n", ok ? "match" : "MISMATCH");

  auto fraction = [](const rp::CurvatureField& field, auto&& keep, auto&& classed) {
    int total = 0, hit = 0;
    for (int u = 0; u < field.height; ++u)
      for (int v = 0; v < field.width; ++v) {
        if (!field.is_valid(u, v) || !keep(u, v)) continue;
        ++total;
        if (classed(rp::hk_classify(field.H(u, v), field.K(u, v)))) ++hit;
      }
    return total ? static_cast<double>(hit) / total : 0.0;
  };

  double R = 50.0, c = 50.0;
  auto sphere = grid_from(101, [R](double x, double y) {
    double q = R * R - x * x - y * y;
    return q > 0 ? std::sqrt(q) : std::nan("");
  });
  double sphere_frac = fraction(
      rp::curvature_field(sphere),
      [&](int u, int v) {
        double r2 = (u - c) * (u - c) + (v - c) * (v - c);
        return r2 / (R * R - r2) < 1.0;
      },
      [](SC s) { return s == SC::EllipticalConvex; });

  auto plane = grid_from(81, [](double x, double y) { return 1.0 + 0.2 * x - 0.1 * y; });
  double plane_frac = fraction(rp::curvature_field(plane),
                               [](int, int) { return true; },
                               [](SC s) { return s == SC::Planar; });

  auto saddle = grid_from(81, [](double x, double y) { return x * y / 10.0; });
  double saddle_frac =
      fraction(rp::curvature_field(saddle), [](int, int) { return true; },
               [](SC s) {
                 return s == SC::HyperbolicConvex || s == SC::HyperbolicConcave ||
                        s == SC::HyperbolicSymmetric;
               });

  std::printf("    sphere interior elliptical-convex: %.1f%%, plane planar: %.1f%%, "
              "saddle hyperbolic: %.1f%%\n",
              100 * sphere_frac, 100 * plane_frac, 100 * saddle_frac);
  return ok && sphere_frac >= 0.99 && plane_frac >= 0.99 && saddle_frac >= 0.99;
}

// --- criterion 4: nose tip over the single-axis schedule -------------------

bool criterion_nose_tip() {
  rp::CorpusOptions options;
  options.schedule.push_back({rp::PoseLabel::Kind::Frontal, 0, 0});
  for (double a : {5.0, -5.0, 18.0, -18.0, 40.0, -40.0}) {
    options.schedule.push_back({rp::PoseLabel::Kind::X, a, 0});
    options.schedule.push_back({rp::PoseLabel::Kind::Y, a, 0});
    options.schedule.push_back({rp::PoseLabel::Kind::Z, a, 0});
  }
  options.subjects = 10;
  options.noise_sigma = 0.5;
  options.seed = 1001;
  auto corpus = rp::make_corpus_in_memory(options);

  rp::PipelineConfig config;
  config.stages = {"crop", "smooth"};  // noise only, no spikes
  int total = 0, hit = 0;
  for (const auto& item : corpus) {
    if (item.entry.role != rp::CorpusManifest::Role::Probe) continue;
    ++total;
    try {
      auto prepared = rp::run_preprocess(item.data.image, config);
      auto tip = rp::find_nose_tip(prepared);
      if (within(tip.at, item.data.truth.apex, 3)) ++hit;
    } catch (const rp::Error&) {
    }
  }
  double rate = static_cast<double>(hit) / total;
  std::printf("    tip within 3 px of projected apex: %d/%d (%.1f%%)\n", hit, total,
              100 * rate);
  return rate >= 0.95;
}

// --- criterion 5: eye corners on clean frontal faces -----------------------

bool criterion_eye_corners() {
  rp::CorpusOptions options;
  options.schedule = {{rp::PoseLabel::Kind::Frontal, 0, 0}};
  options.subjects = 50;
  options.seed = 2002;
  auto corpus = rp::make_corpus_in_memory(options);

  rp::PipelineConfig config;
  config.stages = {"crop", "smooth"};
  int total = 0, hit = 0;
  for (const auto& item : corpus) {
    if (item.entry.role != rp::CorpusManifest::Role::Probe) continue;
    ++total;
    try {
      auto lms = rp::run_pipeline(item.data.image, config);
      const auto& gt = item.data.truth.sockets;
      bool match01 = within(lms.corners[0].at, gt[0], 3) && within(lms.corners[1].at, gt[1], 3);
      bool match10 = within(lms.corners[0].at, gt[1], 3) && within(lms.corners[1].at, gt[0], 3);
      if (match01 || match10) ++hit;
    } catch (const rp::Error&) {
    }
  }
  double rate = static_cast<double>(hit) / total;
  std::printf("    both corners within 3 px of sockets: %d/%d (%.1f%%)\n", hit, total,
              100 * rate);
  return rate >= 0.95;
}

// --- criterion 6: pose classification accuracy -----------------------------

bool criterion_pose_classification() {
  auto run = [](double noise, double spike_rate, std::uint64_t seed, double& accuracy,
                double& elapsed) {
    rp::CorpusOptions options;
    options.schedule = rp::default_schedule();
    options.subjects = 20;
    options.noise_sigma = noise;
    options.spike_rate = spike_rate;
    options.seed = seed;
    auto corpus = rp::make_corpus_in_memory(options);

    rp::PipelineConfig config;  // despiking on by default
    auto start = Clock::now();
    auto report = rp::evaluate(manifest_of(corpus), corpus_loader(corpus), config);
    elapsed = seconds_since(start);
    accuracy = report.images ? static_cast<double>(report.correct) / report.images : 0.0;
  };

  double clean_acc, clean_time, noisy_acc, noisy_time;
  run(0.0, 0.0, 3003, clean_acc, clean_time);
  run(0.5, 0.01, 3003, noisy_acc, noisy_time);
  std::printf("    noise-free accuracy %.1f%% in %.1f s; noisy accuracy %.1f%% in %.1f s\n",
              100 * clean_acc, clean_time, 100 * noisy_acc, noisy_time);
  return clean_acc >= 0.90 && noisy_acc >= 0.70 && clean_time < 60.0 && noisy_time < 60.0;
}

// --- criterion 7: despiking recall / false positives -----------------------

bool criterion_despiking() {
  std::size_t spikes = 0, hits = 0, false_pos = 0, clean = 0;
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    rp::SynthFaceParams p;
    p.noise_sigma = 0.5;
    p.spike_rate = 0.01;
    p.spike_amp = 25.0;
    p.seed = seed;
    auto face = rp::generate(p);

    rp::DespikeParams params;
    params.seed = seed + 100;
    auto result = rp::ransac_despike(face.image, params);
    std::size_t hit = 0;
    for (const auto& s : face.spikes)
      if (result.flagged(s.at.u, s.at.v)) ++hit;
    spikes += face.spikes.size();
    hits += hit;
    false_pos += result.flagged_count() - hit;
    clean += face.image.valid_count() - face.spikes.size();
  }
  double recall = static_cast<double>(hits) / spikes;
  double fpr = static_cast<double>(false_pos) / clean;
  std::printf("    recall %.1f%% (>= 95%%), false-positive rate %.3f%% (<= 1%%)\n",
              100 * recall, 100 * fpr);
  return recall >= 0.95 && fpr <= 0.01;
}

// --- criterion 8: determinism across worker counts -------------------------

bool criterion_determinism() {
  rp::CorpusOptions options;
  options.schedule = {{rp::PoseLabel::Kind::Y, 18, 0},
                      {rp::PoseLabel::Kind::X, -18, 0},
                      {rp::PoseLabel::Kind::YX, 42, 10}};
  options.subjects = 3;
  options.noise_sigma = 0.5;
  options.spike_rate = 0.01;
  options.seed = 4004;
  auto corpus = rp::make_corpus_in_memory(options);
  auto manifest = manifest_of(corpus);
  auto loader = corpus_loader(corpus);

  rp::PipelineConfig one;
  one.threads = 1;
  rp::PipelineConfig many;
  many.threads = 4;
  auto a = rp::emit_report(rp::evaluate(manifest, loader, one), rp::ReportFormat::Json);
  auto b = rp::emit_report(rp::evaluate(manifest, loader, many), rp::ReportFormat::Json);
  auto c = rp::emit_report(rp::evaluate(manifest, loader, many), rp::ReportFormat::Json);
  std::printf("    1-thread vs 4-thread vs repeat: %s\n",
              (a == b && b == c) ? "byte-identical" : "DIFFER");
  return a == b && b == c;
}

// --- criterion 9: reference eye-corner tables ------------------------------

bool criterion_reference_tables() {
  struct Table {
    const char* name;
    std::tuple<int, int, double> first, second;
    bool is_z;
  };
  const Table tables[] = {
      {"frontal", {29, 51, 0.000410}, {49, 50, 0.000225}, false},
      {"Y", {20, 53, 0.000998}, {8, 53, 0.000336}, false},
      {"X", {29, 50, 0.092934}, {51, 51, 0.00113}, false},
      {"Z", {37, 51, 0.000357}, {18, 43, 0.000184}, true},
      {"YX", {39, 65, 0.002931}, {19, 65, 0.001577}, false},
  };

  bool ok = true;
  for (const auto& table : tables) {
    rp::CurvatureField field(101, 101);
    for (int u = 0; u < 101; ++u)
      for (int v = 0; v < 101; ++v) {
        auto idx = field.index(u, v);
        field.valid[idx] = 1;
        field.mean[idx] = 0.01;
        field.gauss[idx] = 1e-6;
      }
    for (const auto& [u, v, k] : {table.first, table.second})
      field.gauss[field.index(u, v)] = k;

    auto corners = rp::detect_eye_corners(field);
    bool order_ok =
        corners[0].at == rp::PixelCoord{std::get<0>(table.first), std::get<1>(table.first)} &&
        corners[1].at == rp::PixelCoord{std::get<0>(table.second), std::get<1>(table.second)};

    int diff = std::abs(rp::cross_eye_coord(corners[0].at, {}) -
                        rp::cross_eye_coord(corners[1].at, {}));
    bool z_fires = diff > 2;
    std::printf("    table %s: descending-K order %s, Z rule %s (diff %d)\n", table.name,
                order_ok ? "ok" : "WRONG", z_fires == table.is_z ? "ok" : "WRONG", diff);
    ok = ok && order_ok && z_fires == table.is_z;
  }
  return ok;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool (*fn)();
  };
  const Criterion criteria[] = {
      {"1. curvature oracle (sphere/plane/saddle)", criterion_curvature_oracle},
      {"2. derivative check on sin*cos wave", criterion_derivative_check},
      {"3. HK classification table and surfaces", criterion_hk_classification},
      {"4. nose tip on single-axis corpus", criterion_nose_tip},
      {"5. eye corners on frontal faces", criterion_eye_corners},
      {"6. pose classification accuracy", criterion_pose_classification},
      {"7. despiking recall / false positives", criterion_despiking},
      {"8. determinism across worker counts", criterion_determinism},
      {"9. reference eye-corner tables", criterion_reference_tables},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    std::printf("--- %s\n", criterion.name);
    bool ok = false;
    try {
      ok = criterion.fn();
    } catch (const std::exception& e) {
      std::printf("    exception: %s\n", e.what());
    }
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", criterion.name);
    if (!ok) ++failures;
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
