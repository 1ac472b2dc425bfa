#include "rangepose/imageio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rangepose {
namespace {

bool next_token(std::istream& in, std::string& tok) { return static_cast<bool>(in >> tok); }

double parse_depth_token(const std::string& tok) {
  if (tok == "nan" || tok == "NaN" || tok == "NAN")
    return std::nan("");
  const char* begin = tok.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end != begin + tok.size())
    throw Error(ErrorCode::MalformedHeader, "bad depth token '" + tok + "'");
  if (!std::isfinite(value))
    throw Error(ErrorCode::NonFiniteValue, "non-finite depth token '" + tok + "'");
  return value;
}

RangeImage load_rgz(std::istream& in) {
  std::string tok;
  if (!next_token(in, tok) || tok != "rangegrid")
    throw Error(ErrorCode::MalformedHeader, "missing 'rangegrid' magic");
  if (!next_token(in, tok) || tok != "1")
    throw Error(ErrorCode::MalformedHeader, "unsupported rangegrid version");
  long h = 0, w = 0;
  if (!(in >> h >> w))
    throw Error(ErrorCode::MalformedHeader, "missing grid dimensions");
  if (h < 1 || w < 1)
    throw Error(ErrorCode::DimensionMismatch, "non-positive grid dimensions");

  RangeImage img(static_cast<int>(h), static_cast<int>(w));
  for (int u = 0; u < img.height(); ++u) {
    for (int v = 0; v < img.width(); ++v) {
      if (!next_token(in, tok))
        throw Error(ErrorCode::DimensionMismatch, "grid ended before H*W values");
      double z = parse_depth_token(tok);
      if (!std::isnan(z)) img.set(u, v, z);
    }
  }
  if (next_token(in, tok))
    throw Error(ErrorCode::DimensionMismatch, "trailing data after H*W values");
  return img;
}

int pgm_next_int(std::istream& in) {
  // Skips whitespace and '#' comments per the PGM grammar.
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
    } else if (!std::isspace(c)) {
      break;
    }
  }
  if (c == EOF) throw Error(ErrorCode::MalformedHeader, "truncated PGM header");
  long value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw Error(ErrorCode::MalformedHeader, "expected integer in PGM header");
  if (c != EOF) in.unget();
  return static_cast<int>(value);
}

RangeImage load_pgm(std::istream& in) {
  char p = 0, five = 0;
  in.get(p);
  in.get(five);
  if (p != 'P' || five != '5')
    throw Error(ErrorCode::MalformedHeader, "not a P5 PGM stream");
  int w = pgm_next_int(in);
  int h = pgm_next_int(in);
  int maxval = pgm_next_int(in);
  if (maxval != 65535)
    throw Error(ErrorCode::MalformedHeader, "PGM maxval must be 65535");
  if (h < 1 || w < 1)
    throw Error(ErrorCode::DimensionMismatch, "non-positive PGM dimensions");
  in.get();  // single whitespace separating header from samples

  RangeImage img(h, w);
  std::vector<unsigned char> raw(static_cast<std::size_t>(h) * w * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw Error(ErrorCode::DimensionMismatch, "truncated PGM sample data");
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      std::size_t i = (static_cast<std::size_t>(u) * w + v) * 2;
      unsigned sample = (static_cast<unsigned>(raw[i]) << 8) | raw[i + 1];
      if (sample != 0) img.set(u, v, static_cast<double>(sample));
    }
  }
  return img;
}

CorpusManifest::Role parse_role(const std::string& s) {
  if (s == "frontal_ref") return CorpusManifest::Role::FrontalRef;
  if (s == "y_ref") return CorpusManifest::Role::YRef;
  if (s == "probe") return CorpusManifest::Role::Probe;
  throw Error(ErrorCode::ManifestInvalid, "unknown role '" + s + "'");
}

const char* role_name(CorpusManifest::Role r) {
  switch (r) {
    case CorpusManifest::Role::FrontalRef: return "frontal_ref";
    case CorpusManifest::Role::YRef: return "y_ref";
    case CorpusManifest::Role::Probe: return "probe";
  }
  return "probe";
}

std::string format_angle(double a) {
  std::string s = (a >= 0 ? "+" : "") + format_depth(a);
  // Angles in labels drop a redundant ".0" so `y:+42` reads like the schedules.
  if (s.size() > 2 && s.ends_with(".0")) s.resize(s.size() - 2);
  return s;
}

double parse_angle(std::string_view s, std::string_view whole) {
  const std::string copy(s);
  char* end = nullptr;
  double value = std::strtod(copy.c_str(), &end);
  if (end != copy.c_str() + copy.size() || !std::isfinite(value))
    throw Error(ErrorCode::UnknownPoseLabel, "bad angle in pose label '" + std::string(whole) + "'");
  return value;
}

}  // namespace

PoseClass PoseLabel::expected_class() const {
  switch (kind) {
    case Kind::Frontal: return PoseClass::Frontal;
    case Kind::X: return PoseClass::RotatedX;
    case Kind::Y: return PoseClass::RotatedY;
    case Kind::Z: return PoseClass::RotatedZ;
    case Kind::YX:
      return pitch >= 0 ? PoseClass::PositiveYX : PoseClass::NegativeYX;
  }
  return PoseClass::Frontal;
}

std::string PoseLabel::to_label() const {
  switch (kind) {
    case Kind::Frontal: return "frontal";
    case Kind::X: return "x:" + format_angle(angle);
    case Kind::Y: return "y:" + format_angle(angle);
    case Kind::Z: return "z:" + format_angle(angle);
    case Kind::YX: return "yx:" + format_angle(angle) + "/" + format_angle(pitch);
  }
  return "frontal";
}

PoseLabel PoseLabel::parse(std::string_view label) {
  PoseLabel out;
  if (label == "frontal") return out;
  auto colon = label.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::UnknownPoseLabel, "pose label '" + std::string(label) + "'");
  std::string_view axis = label.substr(0, colon);
  std::string_view rest = label.substr(colon + 1);
  if (axis == "x") { out.kind = Kind::X; out.angle = parse_angle(rest, label); }
  else if (axis == "y") { out.kind = Kind::Y; out.angle = parse_angle(rest, label); }
  else if (axis == "z") { out.kind = Kind::Z; out.angle = parse_angle(rest, label); }
  else if (axis == "yx") {
    auto slash = rest.find('/');
    if (slash == std::string_view::npos)
      throw Error(ErrorCode::UnknownPoseLabel, "composite label '" + std::string(label) + "' needs yaw/pitch");
    out.kind = Kind::YX;
    out.angle = parse_angle(rest.substr(0, slash), label);
    out.pitch = parse_angle(rest.substr(slash + 1), label);
  } else {
    throw Error(ErrorCode::UnknownPoseLabel, "pose label '" + std::string(label) + "'");
  }
  return out;
}

RangeImage load_grid(std::istream& in) {
  int first = in.peek();
  if (first == 'P') return load_pgm(in);
  return load_rgz(in);
}

RangeImage load_grid_from_string(const std::string& bytes) {
  std::istringstream in(bytes);
  return load_grid(in);
}

RangeImage load_grid_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "'");
  return load_grid(in);
}

std::string format_depth(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eE") == std::string::npos && s != "nan") s += ".0";
  return s;
}

std::string save_grid(const RangeImage& img) {
  std::string out = "rangegrid 1\n";
  out += std::to_string(img.height()) + " " + std::to_string(img.width()) + "\n";
  for (int u = 0; u < img.height(); ++u) {
    for (int v = 0; v < img.width(); ++v) {
      if (v) out += ' ';
      out += img.valid(u, v) ? format_depth(img.depth(u, v)) : "nan";
    }
    out += '\n';
  }
  return out;
}

void save_grid_file(const RangeImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  out << save_grid(img);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for '" + path + "'");
}

CorpusManifest load_manifest(std::istream& in) {
  CorpusManifest manifest;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string path, subject, role, label;
    if (!(fields >> path)) continue;  // blank line
    if (!(fields >> subject >> role >> label))
      throw Error(ErrorCode::ManifestInvalid, "manifest line needs 4 fields: '" + line + "'");
    std::string extra;
    if (fields >> extra)
      throw Error(ErrorCode::ManifestInvalid, "trailing field in manifest line: '" + line + "'");
    manifest.entries.push_back({path, subject, parse_role(role), PoseLabel::parse(label)});
  }

  // Invariants: a subject with probes has exactly one frontal_ref, and a
  // subject with a composite probe must carry a y_ref.
  std::map<std::string, int> frontal_count;
  std::set<std::string> has_probe, has_yx_probe, has_y_ref;
  for (const auto& e : manifest.entries) {
    switch (e.role) {
      case CorpusManifest::Role::FrontalRef: ++frontal_count[e.subject]; break;
      case CorpusManifest::Role::YRef: has_y_ref.insert(e.subject); break;
      case CorpusManifest::Role::Probe:
        has_probe.insert(e.subject);
        if (e.pose.kind == PoseLabel::Kind::YX) has_yx_probe.insert(e.subject);
        break;
    }
  }
  for (const auto& s : has_probe) {
    auto it = frontal_count.find(s);
    if (it == frontal_count.end() || it->second == 0)
      throw Error(ErrorCode::MissingFrontalRef, "subject '" + s + "' has probes but no frontal_ref");
    if (it->second > 1)
      throw Error(ErrorCode::ManifestInvalid, "subject '" + s + "' has multiple frontal_refs");
  }
  for (const auto& s : has_yx_probe) {
    if (!has_y_ref.count(s))
      throw Error(ErrorCode::MissingYRef, "subject '" + s + "' has a YX probe but no y_ref");
  }
  return manifest;
}

CorpusManifest load_manifest_from_string(const std::string& bytes) {
  std::istringstream in(bytes);
  return load_manifest(in);
}

CorpusManifest load_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "'");
  return load_manifest(in);
}

std::string save_manifest(const CorpusManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += e.path + " " + e.subject + " " + role_name(e.role) + " " + e.pose.to_label() + "\n";
  }
  return out;
}

}  // namespace rangepose
