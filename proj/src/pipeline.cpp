#include "rangepose/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

namespace rangepose {
namespace {

using nlohmann::json;

int class_index(PoseClass c) { return static_cast<int>(c); }

PoseClass class_from_index(int i) { return static_cast<PoseClass>(i); }

const char* axis_name(PoseLabel::Kind k) {
  switch (k) {
    case PoseLabel::Kind::Frontal: return "frontal";
    case PoseLabel::Kind::X: return "x";
    case PoseLabel::Kind::Y: return "y";
    case PoseLabel::Kind::Z: return "z";
    case PoseLabel::Kind::YX: return "yx";
  }
  return "frontal";
}

std::string angle_text(const PoseLabel& label) {
  std::string text = label.to_label();
  auto colon = text.find(':');
  return colon == std::string::npos ? std::string("0") : text.substr(colon + 1);
}

std::optional<double> nominal_yaw(const PoseLabel& label) {
  if (label.kind == PoseLabel::Kind::Y || label.kind == PoseLabel::Kind::YX)
    return label.angle;
  return std::nullopt;
}

}  // namespace

std::string PipelineConfig::to_json() const {
  json doc;
  doc["pipeline"]["stages"] = stages;
  doc["pipeline"]["threads"] = threads;
  doc["preprocess"]["crop_scale"] = crop_scale;
  doc["preprocess"]["despike"]["window"] = despike.window;
  doc["preprocess"]["despike"]["stride"] = despike.stride;
  doc["preprocess"]["despike"]["iters"] = despike.iters;
  doc["preprocess"]["despike"]["inlier_tol"] = despike.inlier_tol;
  doc["preprocess"]["despike"]["seed"] = despike.seed;
  doc["preprocess"]["smooth_sigma"] = smooth_sigma;
  doc["preprocess"]["smooth_radius"] = smooth_radius;
  doc["curvature"]["radius"] = curvature_radius;
  doc["landmarks"]["k_thresh"] = k_thresh;
  doc["landmarks"]["min_sep"] = min_sep;
  doc["pose"]["e"] = thresholds.eye_line_tol;
  doc["pose"]["m"] = thresholds.elevation_tol;
  doc["core"]["eye_axis"] =
      convention.eye_axis == AxisConvention::EyeAxis::Rows ? "rows" : "cols";
  return doc.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("config: ") + e.what());
  }
  PipelineConfig c;
  auto get = [&](const char* section, const char* key, auto fallback) {
    using T = decltype(fallback);
    if (doc.contains(section) && doc[section].contains(key))
      return doc[section][key].template get<T>();
    return fallback;
  };
  c.stages = get("pipeline", "stages", c.stages);
  c.threads = get("pipeline", "threads", c.threads);
  c.crop_scale = get("preprocess", "crop_scale", c.crop_scale);
  if (doc.contains("preprocess") && doc["preprocess"].contains("despike")) {
    const auto& d = doc["preprocess"]["despike"];
    c.despike.window = d.value("window", c.despike.window);
    c.despike.stride = d.value("stride", c.despike.stride);
    c.despike.iters = d.value("iters", c.despike.iters);
    c.despike.inlier_tol = d.value("inlier_tol", c.despike.inlier_tol);
    c.despike.seed = d.value("seed", c.despike.seed);
  }
  c.smooth_sigma = get("preprocess", "smooth_sigma", c.smooth_sigma);
  c.smooth_radius = get("preprocess", "smooth_radius", c.smooth_radius);
  c.curvature_radius = get("curvature", "radius", c.curvature_radius);
  c.k_thresh = get("landmarks", "k_thresh", c.k_thresh);
  c.min_sep = get("landmarks", "min_sep", c.min_sep);
  c.thresholds.eye_line_tol = get("pose", "e", c.thresholds.eye_line_tol);
  c.thresholds.elevation_tol = get("pose", "m", c.thresholds.elevation_tol);
  std::string axis = get("core", "eye_axis", std::string("rows"));
  if (axis == "rows") c.convention.eye_axis = AxisConvention::EyeAxis::Rows;
  else if (axis == "cols") c.convention.eye_axis = AxisConvention::EyeAxis::Cols;
  else throw Error(ErrorCode::MalformedHeader, "config: eye_axis must be rows or cols");
  return c;
}

RangeImage run_preprocess(const RangeImage& img, const PipelineConfig& config) {
  RangeImage current = img;
  for (const auto& stage : config.stages) {
    try {
      if (stage == "crop") {
        current = ellipse_crop(current, config.crop_scale);
      } else if (stage == "despike") {
        current = ransac_despike(current, config.despike).image;
      } else if (stage == "smooth") {
        current = gaussian_smooth(current, config.smooth_sigma, config.smooth_radius);
      } else {
        throw Error(ErrorCode::InvalidParams, "unknown stage '" + stage + "'");
      }
    } catch (const Error& e) {
      throw StageError(stage, e);
    }
  }
  return current;
}

LandmarkSet run_pipeline(const RangeImage& img, const PipelineConfig& config) {
  RangeImage prepared = run_preprocess(img, config);
  LandmarkSet out;
  try {
    out.nose = find_nose_tip(prepared);
  } catch (const Error& e) {
    throw StageError("nose", e);
  }
  try {
    CurvatureField field = curvature_field(prepared, config.curvature_radius);
    out.corners = detect_eye_corners(field, config.k_thresh, config.min_sep);
  } catch (const Error& e) {
    throw StageError("corners", e);
  }
  return out;
}

EvaluationReport evaluate(const CorpusManifest& manifest, const GridLoader& loader,
                          const PipelineConfig& config) {
#ifdef _OPENMP
  if (config.threads > 0) omp_set_num_threads(config.threads);
#endif

  struct SubjectRefs {
    const CorpusManifest::Entry* frontal = nullptr;
    std::vector<const CorpusManifest::Entry*> y_refs;
  };
  std::map<std::string, SubjectRefs> subjects;
  std::vector<const CorpusManifest::Entry*> probes;
  for (const auto& e : manifest.entries) {
    switch (e.role) {
      case CorpusManifest::Role::FrontalRef: subjects[e.subject].frontal = &e; break;
      case CorpusManifest::Role::YRef: subjects[e.subject].y_refs.push_back(&e); break;
      case CorpusManifest::Role::Probe: probes.push_back(&e); break;
    }
  }

  // Reference landmarks once per subject; a failed reference fails all of the
  // subject's probes, with the note attached per probe.
  std::map<std::string, std::map<std::string, LandmarkSet>> ref_landmarks;
  std::map<std::string, std::map<std::string, std::string>> ref_errors;
  for (const auto& [subject, refs] : subjects) {
    ref_landmarks[subject];
    ref_errors[subject];
    std::vector<const CorpusManifest::Entry*> ref_list;
    if (refs.frontal) ref_list.push_back(refs.frontal);
    for (const auto* y : refs.y_refs) ref_list.push_back(y);
    for (const auto* entry : ref_list) {
      try {
        ref_landmarks[subject][entry->path] = run_pipeline(loader(entry->path), config);
      } catch (const Error& e) {
        ref_errors[subject][entry->path] = e.what();
      }
    }
  }

  struct ProbeOutcome {
    bool ok = false;
    PoseClass predicted = PoseClass::Frontal;
    std::string error;
  };
  std::vector<ProbeOutcome> outcomes(probes.size());

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(probes.size()); ++i) {
    const auto& probe = *probes[i];
    auto& out = outcomes[i];
    try {
      const auto& refs = subjects.at(probe.subject);
      if (!refs.frontal)
        throw Error(ErrorCode::MissingFrontalRef, "no frontal_ref for " + probe.subject);
      const auto& subject_lms = ref_landmarks.at(probe.subject);
      auto frontal_it = subject_lms.find(refs.frontal->path);
      if (frontal_it == subject_lms.end()) {
        const auto& errs = ref_errors.at(probe.subject);
        auto err_it = errs.find(refs.frontal->path);
        throw Error(ErrorCode::MissingFrontalRef,
                    "reference failed: " +
                        (err_it == errs.end() ? std::string("unknown") : err_it->second));
      }

      std::optional<LandmarkSet> y_ref;
      if (auto yaw = nominal_yaw(probe.pose)) {
        for (const auto* candidate : refs.y_refs) {
          if (candidate->pose.angle != *yaw) continue;
          auto it = subject_lms.find(candidate->path);
          if (it != subject_lms.end()) y_ref = it->second;
          break;
        }
      }

      LandmarkSet lms = run_pipeline(loader(probe.path), config);
      out.predicted =
          classify_pose(frontal_it->second, lms, y_ref, config.convention, config.thresholds);
      out.ok = true;
    } catch (const Error& e) {
      out.error = e.what();
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  }

  // Tally in manifest order so the report is identical for any worker count.
  EvaluationReport report;
  std::map<std::pair<std::string, std::string>, std::size_t> row_index;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& probe = *probes[i];
    const auto& outcome = outcomes[i];
    PoseClass expected = probe.pose.expected_class();

    auto key = std::make_pair(std::string(axis_name(probe.pose.kind)), angle_text(probe.pose));
    auto it = row_index.find(key);
    if (it == row_index.end()) {
      it = row_index.emplace(key, report.rows.size()).first;
      report.rows.push_back({key.first, key.second, 0, 0});
    }
    auto& row = report.rows[it->second];
    ++row.images;
    ++report.images;
    bool correct = outcome.ok && outcome.predicted == expected;
    if (correct) {
      ++row.correct;
      ++report.correct;
    }
    if (outcome.ok) {
      ++report.confusion[class_index(expected)][class_index(outcome.predicted)];
    } else {
      report.file_errors.push_back(probe.path + ": " + outcome.error);
    }
  }
  return report;
}

EvaluationReport evaluate_files(const CorpusManifest& manifest, const std::string& base_dir,
                                const PipelineConfig& config) {
  return evaluate(
      manifest,
      [&](const std::string& path) {
        return load_grid_file((std::filesystem::path(base_dir) / path).string());
      },
      config);
}

std::string emit_report(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: {
      std::string out = "axis,angle,images,correct\n";
      for (const auto& row : report.rows)
        out += row.axis + "," + row.angles + "," + std::to_string(row.images) + "," +
               std::to_string(row.correct) + "\n";
      return out;
    }
    case ReportFormat::Json: {
      json doc;
      doc["rows"] = json::array();
      for (const auto& row : report.rows)
        doc["rows"].push_back({{"axis", row.axis},
                               {"angle", row.angles},
                               {"images", row.images},
                               {"correct", row.correct}});
      doc["images"] = report.images;
      doc["correct"] = report.correct;
      doc["confusion"] = json::array();
      for (const auto& line : report.confusion) doc["confusion"].push_back(line);
      doc["errors"] = report.file_errors;
      return doc.dump(2) + "\n";
    }
    case ReportFormat::Text: {
      std::ostringstream out;
      out << "axis      angle      images  correct\n";
      for (const auto& row : report.rows) {
        out << row.axis;
        out << std::string(10 - std::min<std::size_t>(9, row.axis.size()), ' ');
        out << row.angles;
        out << std::string(11 - std::min<std::size_t>(10, row.angles.size()), ' ');
        out << row.images << "       " << row.correct << "\n";
      }
      out << "total: " << report.correct << "/" << report.images;
      if (report.images > 0)
        out << " (" << 100.0 * report.correct / report.images << "%)";
      out << "\n";
      out << "confusion (rows expected, cols predicted;"
          << " order FRONTAL X Y Z YX+ YX-):\n";
      for (int i = 0; i < kPoseClassCount; ++i) {
        out << "  " << to_string(class_from_index(i)) << ":";
        for (int j = 0; j < kPoseClassCount; ++j) out << " " << report.confusion[i][j];
        out << "\n";
      }
      for (const auto& err : report.file_errors) out << "error: " << err << "\n";
      return out.str();
    }
  }
  return {};
}

EvaluationReport parse_report_json(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("report: ") + e.what());
  }
  EvaluationReport report;
  for (const auto& row : doc.at("rows"))
    report.rows.push_back({row.at("axis").get<std::string>(),
                           row.at("angle").get<std::string>(),
                           row.at("images").get<int>(), row.at("correct").get<int>()});
  report.images = doc.at("images").get<int>();
  report.correct = doc.at("correct").get<int>();
  for (int i = 0; i < kPoseClassCount; ++i)
    for (int j = 0; j < kPoseClassCount; ++j)
      report.confusion[i][j] = doc.at("confusion")[i][j].get<int>();
  for (const auto& err : doc.at("errors"))
    report.file_errors.push_back(err.get<std::string>());
  return report;
}

}  // namespace rangepose
