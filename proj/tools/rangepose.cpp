#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rangepose/pipeline.hpp"
#include "rangepose/synth.hpp"

namespace rp = rangepose;

namespace {

rp::PipelineConfig load_config(const std::string& path, std::uint64_t seed_override,
                               bool has_seed) {
  rp::PipelineConfig config;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw rp::Error(rp::ErrorCode::IoFailure, "cannot open config '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    config = rp::PipelineConfig::from_json(bytes);
  }
  if (has_seed) config.despike.seed = seed_override;
  return config;
}

void write_or_print(const std::string& bytes, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << bytes;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  out << bytes;
  if (!out) throw rp::Error(rp::ErrorCode::IoFailure, "write failed for '" + out_path + "'");
}

rp::ReportFormat parse_format(const std::string& name) {
  if (name == "text") return rp::ReportFormat::Text;
  if (name == "csv") return rp::ReportFormat::Csv;
  if (name == "json") return rp::ReportFormat::Json;
  throw rp::Error(rp::ErrorCode::InvalidParams, "format must be text, csv, or json");
}

const char* class_token(rp::SurfaceClass c) {
  switch (c) {
    case rp::SurfaceClass::EllipticalConvex: return "EV";
    case rp::SurfaceClass::CylindricalConvex: return "CV";
    case rp::SurfaceClass::HyperbolicConvex: return "HV";
    case rp::SurfaceClass::Impossible: return "IM";
    case rp::SurfaceClass::Planar: return "PL";
    case rp::SurfaceClass::HyperbolicSymmetric: return "HS";
    case rp::SurfaceClass::EllipticalConcave: return "EC";
    case rp::SurfaceClass::CylindricalConcave: return "CC";
    case rp::SurfaceClass::HyperbolicConcave: return "HC";
  }
  return "PL";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-image facial landmark and pose-axis toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, format_name = "text";
  std::uint64_t seed = 0;
  bool has_seed = false;
  app.add_option("--config", config_path, "pipeline config JSON")->capture_default_str();
  app.add_option("--seed", seed, "seed override")->each([&](const std::string&) { has_seed = true; });
  app.add_option("--format", format_name, "text|csv|json")->capture_default_str();
  app.add_option("--out", out_path, "output path ('-' for stdout)");
  app.fallthrough();  // let global flags appear after the subcommand name

  auto* synth = app.add_subcommand("synth", "generate a synthetic labelled corpus");
  int subjects = 10;
  double noise_sigma = 0, spike_rate = 0, spike_amp = 25;
  std::string single_path;
  double yaw = 0, pitch = 0, roll = 0;
  synth->add_option("--subjects", subjects)->capture_default_str();
  synth->add_option("--noise-sigma", noise_sigma)->capture_default_str();
  synth->add_option("--spike-rate", spike_rate)->capture_default_str();
  synth->add_option("--spike-amp", spike_amp)->capture_default_str();
  synth->add_option("--single", single_path, "write one image instead of a corpus");
  synth->add_option("--yaw", yaw, "degrees, single-image mode")->capture_default_str();
  synth->add_option("--pitch", pitch, "degrees, single-image mode")->capture_default_str();
  synth->add_option("--roll", roll, "degrees, single-image mode")->capture_default_str();

  auto* preprocess = app.add_subcommand("preprocess", "crop, despike, and smooth a grid");
  std::string in_path;
  preprocess->add_option("--in", in_path, "input grid")->required();

  auto* curvature = app.add_subcommand("curvature", "per-pixel H/K and HK class grids");
  std::string h_path, k_path, class_path;
  curvature->add_option("--in", in_path, "input grid")->required();
  curvature->add_option("--out-h", h_path, "mean-curvature RGZ output");
  curvature->add_option("--out-k", k_path, "Gaussian-curvature RGZ output");
  curvature->add_option("--out-class", class_path, "class-label text grid output");
  bool raw = false;
  curvature->add_flag("--raw", raw, "skip preprocessing stages");

  auto* landmarks = app.add_subcommand("landmarks", "nose tip and inner eye corners");
  landmarks->add_option("--in", in_path, "input grid")->required();
  bool as_json = false;
  landmarks->add_flag("--json", as_json, "structured output");

  auto* pose = app.add_subcommand("pose", "classify the rotation axis of a probe");
  std::string frontal_path, probe_path, yref_path;
  pose->add_option("--frontal", frontal_path, "frontal reference grid")->required();
  pose->add_option("--probe", probe_path, "probe grid")->required();
  pose->add_option("--y-ref", yref_path, "pure-yaw reference grid");

  auto* eval = app.add_subcommand("eval", "batch evaluation over a corpus manifest");
  std::string manifest_path, base_dir;
  eval->add_option("--manifest", manifest_path, "corpus manifest")->required();
  eval->add_option("--dir", base_dir, "base directory for manifest paths");

  CLI11_PARSE(app, argc, argv);

  try {
    rp::PipelineConfig config = load_config(config_path, seed, has_seed);

    if (*synth) {
      if (!single_path.empty()) {
        rp::SynthFaceParams params;
        params.yaw_deg = yaw;
        params.pitch_deg = pitch;
        params.roll_deg = roll;
        params.noise_sigma = noise_sigma;
        params.spike_rate = spike_rate;
        params.spike_amp = spike_amp;
        params.seed = seed;
        auto result = rp::generate(params);
        rp::save_grid_file(result.image, single_path);
        std::cout << "apex " << result.truth.apex.u << " " << result.truth.apex.v
                  << "\nlabel " << rp::to_string(result.truth.label) << "\n";
      } else {
        if (out_path.empty())
          throw rp::Error(rp::ErrorCode::InvalidParams, "synth needs --out DIR or --single FILE");
        rp::CorpusOptions options;
        options.schedule = rp::default_schedule();
        options.subjects = subjects;
        options.noise_sigma = noise_sigma;
        options.spike_rate = spike_rate;
        options.spike_amp = spike_amp;
        options.seed = seed;
        auto corpus = rp::make_corpus(options, out_path);
        std::cout << "wrote " << corpus.manifest.entries.size() << " grids to " << out_path
                  << "\n";
      }
    } else if (*preprocess) {
      auto img = rp::load_grid_file(in_path);
      write_or_print(rp::save_grid(rp::run_preprocess(img, config)), out_path);
    } else if (*curvature) {
      auto img = rp::load_grid_file(in_path);
      if (!raw) img = rp::run_preprocess(img, config);
      auto field = rp::curvature_field(img, config.curvature_radius);
      auto grid_of = [&](const std::vector<double>& values) {
        rp::RangeImage out(field.height, field.width);
        for (int u = 0; u < field.height; ++u)
          for (int v = 0; v < field.width; ++v)
            if (field.is_valid(u, v)) out.set(u, v, values[field.index(u, v)]);
        return out;
      };
      if (!h_path.empty()) rp::save_grid_file(grid_of(field.mean), h_path);
      if (!k_path.empty()) rp::save_grid_file(grid_of(field.gauss), k_path);
      if (!class_path.empty()) {
        std::string text;
        for (int u = 0; u < field.height; ++u) {
          for (int v = 0; v < field.width; ++v) {
            if (v) text += ' ';
            text += field.is_valid(u, v)
                        ? class_token(rp::hk_classify(field.H(u, v), field.K(u, v)))
                        : "--";
          }
          text += '\n';
        }
        write_or_print(text, class_path);
      }
    } else if (*landmarks) {
      auto lms = rp::run_pipeline(rp::load_grid_file(in_path), config);
      if (as_json) {
        nlohmann::json doc{
            {"nose",
             {{"u", lms.nose.at.u}, {"v", lms.nose.at.v}, {"depth", lms.nose.depth}}},
            {"corners", nlohmann::json::array()}};
        for (const auto& c : lms.corners)
          doc["corners"].push_back({{"u", c.at.u}, {"v", c.at.v}, {"K", c.gauss}});
        write_or_print(doc.dump(2) + "\n", out_path);
      } else {
        std::ostringstream text;
        text << "nose " << lms.nose.at.u << " " << lms.nose.at.v << " " << lms.nose.depth
             << "\n";
        for (const auto& c : lms.corners)
          text << "corner " << c.at.u << " " << c.at.v << " " << c.gauss << "\n";
        write_or_print(text.str(), out_path);
      }
    } else if (*pose) {
      auto frontal = rp::run_pipeline(rp::load_grid_file(frontal_path), config);
      auto probe = rp::run_pipeline(rp::load_grid_file(probe_path), config);
      std::optional<rp::LandmarkSet> y_ref;
      if (!yref_path.empty())
        y_ref = rp::run_pipeline(rp::load_grid_file(yref_path), config);
      std::cout << rp::to_string(
                       rp::classify_pose(frontal, probe, y_ref, config.convention,
                                         config.thresholds))
                << "\n";
    } else if (*eval) {
      auto manifest = rp::load_manifest_file(manifest_path);
      std::string dir = base_dir.empty()
                            ? std::filesystem::path(manifest_path).parent_path().string()
                            : base_dir;
      auto report = rp::evaluate_files(manifest, dir, config);
      write_or_print(rp::emit_report(report, parse_format(format_name)), out_path);
      for (const auto& err : report.file_errors) std::cerr << "error: " << err << "\n";
      return report.file_errors.empty() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
