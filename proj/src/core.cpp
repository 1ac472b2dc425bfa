#include "rangepose/core.hpp"

namespace rangepose {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::MissingFrontalRef: return "MissingFrontalRef";
    case ErrorCode::MissingYRef: return "MissingYRef";
    case ErrorCode::UnknownPoseLabel: return "UnknownPoseLabel";
    case ErrorCode::ManifestInvalid: return "ManifestInvalid";
    case ErrorCode::TooFewValidPixels: return "TooFewValidPixels";
    case ErrorCode::UnderDetermined: return "UnderDetermined";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NoInteriorPixels: return "NoInteriorPixels";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::OneCandidateOnly: return "OneCandidateOnly";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "UnknownError";
}

std::string to_string(PoseClass c) {
  switch (c) {
    case PoseClass::Frontal: return "FRONTAL";
    case PoseClass::RotatedX: return "X";
    case PoseClass::RotatedY: return "Y";
    case PoseClass::RotatedZ: return "Z";
    case PoseClass::PositiveYX: return "YX+";
    case PoseClass::NegativeYX: return "YX-";
  }
  return "FRONTAL";
}

PoseClass pose_class_from_string(std::string_view s) {
  if (s == "FRONTAL") return PoseClass::Frontal;
  if (s == "X") return PoseClass::RotatedX;
  if (s == "Y") return PoseClass::RotatedY;
  if (s == "Z") return PoseClass::RotatedZ;
  if (s == "YX+") return PoseClass::PositiveYX;
  if (s == "YX-") return PoseClass::NegativeYX;
  throw Error(ErrorCode::UnknownPoseLabel, "unknown pose class '" + std::string(s) + "'");
}

}  // namespace rangepose
