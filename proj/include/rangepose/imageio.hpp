#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rangepose/core.hpp"

namespace rangepose {

/// Nominal rotation of a capture, parsed from a manifest pose label.
/// Composite YX means yaw applied first, then pitch.
struct PoseLabel {
  enum class Kind { Frontal, X, Y, Z, YX };
  Kind kind = Kind::Frontal;
  double angle = 0.0;  // degrees about the single axis, or yaw for YX
  double pitch = 0.0;  // degrees, YX only

  PoseClass expected_class() const;
  std::string to_label() const;
  static PoseLabel parse(std::string_view label);
};

struct CorpusManifest {
  enum class Role { FrontalRef, YRef, Probe };
  struct Entry {
    std::string path;
    std::string subject;
    Role role = Role::Probe;
    PoseLabel pose;
  };
  std::vector<Entry> entries;
};

// RGZ-ASCII: header "rangegrid 1", then "H W", then H rows of W
// whitespace-separated decimal values, "nan" marking invalid cells.
// Binary 16-bit PGM (P5, maxval 65535, big-endian, sample 0 = invalid)
// is accepted by the loader as well.
RangeImage load_grid(std::istream& in);
RangeImage load_grid_from_string(const std::string& bytes);
RangeImage load_grid_file(const std::string& path);

std::string save_grid(const RangeImage& img);
void save_grid_file(const RangeImage& img, const std::string& path);

// Manifest: one entry per line, `<path> <subject> <role> <pose-label>`,
// role in {frontal_ref, y_ref, probe}, pose-label like
// frontal | x:+18 | y:-40 | z:+18 | yx:+42/+10. '#' starts a comment.
CorpusManifest load_manifest(std::istream& in);
CorpusManifest load_manifest_from_string(const std::string& bytes);
CorpusManifest load_manifest_file(const std::string& path);
std::string save_manifest(const CorpusManifest& manifest);

/// Shortest decimal string that parses back to exactly `value`; always
/// carries a '.' or exponent so grids stay visually real-valued.
std::string format_depth(double value);

}  // namespace rangepose
