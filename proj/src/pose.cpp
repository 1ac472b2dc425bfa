#include "rangepose/pose.hpp"

#include <cmath>

namespace rangepose {

PoseClass classify_pose(const LandmarkSet& frontal, const LandmarkSet& probe,
                        const std::optional<LandmarkSet>& y_ref,
                        const AxisConvention& conv, const PoseThresholds& th) {
  int c1 = cross_eye_coord(probe.corners[0].at, conv);
  int c2 = cross_eye_coord(probe.corners[1].at, conv);
  if (std::abs(c1 - c2) > th.eye_line_tol) return PoseClass::RotatedZ;

  int yaw_delta = std::abs(eye_axis_coord(frontal.nose.at, conv) -
                           eye_axis_coord(probe.nose.at, conv));
  int pitch_delta = std::abs(cross_eye_coord(frontal.nose.at, conv) -
                             cross_eye_coord(probe.nose.at, conv));

  if (yaw_delta >= pitch_delta && yaw_delta > th.eye_line_tol) {
    if (y_ref) {
      PoseClass composite = multipose_detect(*y_ref, probe, conv, th);
      if (composite != PoseClass::RotatedY) return composite;
    }
    return PoseClass::RotatedY;
  }
  if (pitch_delta > yaw_delta && pitch_delta > th.eye_line_tol)
    return PoseClass::RotatedX;
  return PoseClass::Frontal;
}

PoseClass multipose_detect(const LandmarkSet& y_ref, const LandmarkSet& probe,
                           const AxisConvention& conv, const PoseThresholds& th) {
  int d = cross_eye_coord(probe.nose.at, conv) - cross_eye_coord(y_ref.nose.at, conv);
  if (d > th.elevation_tol) return PoseClass::PositiveYX;
  if (d < -th.elevation_tol) return PoseClass::NegativeYX;
  return PoseClass::RotatedY;
}

}  // namespace rangepose
