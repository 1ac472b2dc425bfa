#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "rangepose/core.hpp"
#include "rangepose/curvature.hpp"
#include "rangepose/imageio.hpp"
#include "rangepose/landmarks.hpp"
#include "rangepose/pose.hpp"
#include "rangepose/preprocess.hpp"

namespace rangepose {

struct PipelineConfig {
  std::vector<std::string> stages = {"crop", "despike", "smooth"};
  double crop_scale = 2.5;
  DespikeParams despike;
  // Heavier than the gaussian_smooth op default: at face scale the wider
  // kernel suppresses self-occlusion steps that otherwise masquerade as
  // high-curvature landmarks under large rotations.
  double smooth_sigma = 2.0;
  int smooth_radius = 4;
  int curvature_radius = 2;
  double k_thresh = 1e-4;
  int min_sep = 8;
  PoseThresholds thresholds;
  AxisConvention convention;
  int threads = 0;  // 0 = library default

  std::string to_json() const;
  static PipelineConfig from_json(const std::string& bytes);
};

/// Module error re-raised with the failing pipeline stage in the message.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& cause)
      : Error(cause.code(), "stage " + stage + ": " + cause.what()), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Preprocessing stages in configured order, then nose tip and eye corners.
LandmarkSet run_pipeline(const RangeImage& img, const PipelineConfig& config);

/// Preprocessing only; the `preprocess` CLI subcommand surface.
RangeImage run_preprocess(const RangeImage& img, const PipelineConfig& config);

struct ReportRow {
  std::string axis;    // frontal | x | y | z | yx
  std::string angles;  // e.g. "+18" or "+42/+10"
  int images = 0;
  int correct = 0;
};

constexpr int kPoseClassCount = 6;

struct EvaluationReport {
  std::vector<ReportRow> rows;
  int images = 0;
  int correct = 0;
  // confusion[expected][predicted], indexed by PoseClass order
  std::array<std::array<int, kPoseClassCount>, kPoseClassCount> confusion{};
  std::vector<std::string> file_errors;
};

using GridLoader = std::function<RangeImage(const std::string& path)>;

/// Runs the pipeline and classifier for every probe against its subject's
/// references. A y_ref is paired with a probe only when their nominal yaws
/// match. Per-file failures count as misclassifications and are noted in
/// file_errors; the batch never aborts. Deterministic for a fixed config,
/// independent of thread count.
EvaluationReport evaluate(const CorpusManifest& manifest, const GridLoader& loader,
                          const PipelineConfig& config);

/// Convenience wrapper resolving manifest paths under `base_dir`.
EvaluationReport evaluate_files(const CorpusManifest& manifest, const std::string& base_dir,
                                const PipelineConfig& config);

enum class ReportFormat { Text, Csv, Json };

std::string emit_report(const EvaluationReport& report, ReportFormat format);
EvaluationReport parse_report_json(const std::string& bytes);

}  // namespace rangepose
