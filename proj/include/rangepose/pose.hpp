#pragma once

#include <optional>

#include "rangepose/core.hpp"
#include "rangepose/landmarks.hpp"

namespace rangepose {

struct PoseThresholds {
  int eye_line_tol = 2;   // e: roll tolerance on the corners' cross-eye coords
  int elevation_tol = 3;  // m: composite-pose nose elevation threshold
};

/// Axis-of-rotation classifier. Rule order: roll (Z) from the probe's eye
/// corners, then yaw vs pitch from the nose displacement against the frontal
/// reference; a yaw candidate with a y_ref delegates to multipose_detect.
/// Total: returns Frontal when no rule fires.
PoseClass classify_pose(const LandmarkSet& frontal, const LandmarkSet& probe,
                        const std::optional<LandmarkSet>& y_ref,
                        const AxisConvention& conv = {},
                        const PoseThresholds& th = {});

/// Composite detector: compares the probe's cross-eye nose coordinate against
/// a pure-yaw reference at the same nominal yaw. Displacement above the
/// elevation threshold names the pitch sign; inside the dead zone the pose
/// stays a pure yaw.
PoseClass multipose_detect(const LandmarkSet& y_ref, const LandmarkSet& probe,
                           const AxisConvention& conv = {},
                           const PoseThresholds& th = {});

}  // namespace rangepose
