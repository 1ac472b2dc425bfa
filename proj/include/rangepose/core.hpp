#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rangepose {

enum class ErrorCode {
  MalformedHeader,
  DimensionMismatch,
  NonFiniteValue,
  MissingFrontalRef,
  MissingYRef,
  UnknownPoseLabel,
  ManifestInvalid,
  TooFewValidPixels,
  UnderDetermined,
  IllConditioned,
  NoInteriorPixels,
  NoCandidates,
  OneCandidateOnly,
  InvalidParams,
  IoFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct PixelCoord {
  int u = 0;  // row
  int v = 0;  // column
  auto operator<=>(const PixelCoord&) const = default;
};

/// Validity-masked depth grid. Larger depth value means closer to the sensor,
/// so the nose tip of a face is the grid maximum.
class RangeImage {
 public:
  RangeImage(int height, int width)
      : height_(height), width_(width),
        depth_(static_cast<std::size_t>(height) * width, 0.0),
        valid_(static_cast<std::size_t>(height) * width, 0) {
    if (height < 1 || width < 1)
      throw Error(ErrorCode::InvalidParams, "image dimensions must be positive");
  }

  int height() const { return height_; }
  int width() const { return width_; }

  bool in_bounds(int u, int v) const {
    return u >= 0 && u < height_ && v >= 0 && v < width_;
  }
  bool in_bounds(PixelCoord p) const { return in_bounds(p.u, p.v); }

  double depth(int u, int v) const { return depth_[index(u, v)]; }
  double depth(PixelCoord p) const { return depth(p.u, p.v); }
  bool valid(int u, int v) const { return valid_[index(u, v)] != 0; }
  bool valid(PixelCoord p) const { return valid(p.u, p.v); }

  void set(int u, int v, double z) {
    if (!std::isfinite(z))
      throw Error(ErrorCode::NonFiniteValue, "depth must be finite");
    depth_[index(u, v)] = z;
    valid_[index(u, v)] = 1;
  }

  void invalidate(int u, int v) {
    depth_[index(u, v)] = 0.0;
    valid_[index(u, v)] = 0;
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto f : valid_) n += f;
    return n;
  }

  bool operator==(const RangeImage& o) const {
    if (height_ != o.height_ || width_ != o.width_) return false;
    for (std::size_t i = 0; i < valid_.size(); ++i) {
      if (valid_[i] != o.valid_[i]) return false;
      if (valid_[i] && depth_[i] != o.depth_[i]) return false;
    }
    return true;
  }

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(u) * width_ + v;
  }

  int height_;
  int width_;
  std::vector<double> depth_;
  std::vector<std::uint8_t> valid_;
};

/// Image axis along which the two eyes are separated in an upright capture.
/// With eye_axis = Rows the eye corners of a non-rolled face share (nearly)
/// one column, and that column index is the cross-eye coordinate.
struct AxisConvention {
  enum class EyeAxis { Rows, Cols };
  EyeAxis eye_axis = EyeAxis::Rows;
};

/// Coordinate that is (nearly) equal for both eyes when the face has no roll.
inline int cross_eye_coord(PixelCoord p, const AxisConvention& conv) {
  return conv.eye_axis == AxisConvention::EyeAxis::Rows ? p.v : p.u;
}

/// Coordinate along the eye axis (the one the eyes are separated along).
inline int eye_axis_coord(PixelCoord p, const AxisConvention& conv) {
  return conv.eye_axis == AxisConvention::EyeAxis::Rows ? p.u : p.v;
}

enum class PoseClass {
  Frontal,
  RotatedX,
  RotatedY,
  RotatedZ,
  PositiveYX,
  NegativeYX,
};

std::string to_string(PoseClass c);
PoseClass pose_class_from_string(std::string_view s);

}  // namespace rangepose
