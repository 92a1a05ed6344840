#pragma once

#include <map>
#include <optional>
#include <vector>

#include "proxpose/annotations.hpp"
#include "proxpose/camera.hpp"
#include "proxpose/layout.hpp"
#include "proxpose/raster.hpp"

namespace proxpose {

// Metric neighborhood radii per keypoint group plus the minimum fraction of
// valid depth pixels a window must contain.
struct NeighborhoodSpec {
    std::map<Group, double> radius_by_group = {
        {Group::body, 0.020},
        {Group::hand, 0.003},
        {Group::face, 0.003},
    };
    double min_valid_fraction = 0.1;
    // Rectangle window by default; the disc option restricts the window to
    // pixels within the elliptical metric radius.
    bool disc_window = false;

    double radius_for(Group g) const;
};

enum class LiftStatus {
    ok,
    skipped,            // confidence below threshold
    out_of_frame,       // keypoint outside the depth raster after rounding
    no_depth,           // no valid seed depth in the 3x3 window
    insufficient_depth, // too few valid pixels in the neighborhood
};

const char* to_string(LiftStatus s);

struct LiftResult {
    LiftStatus status = LiftStatus::skipped;
    Point3 point;        // valid only when status == ok
    int window_pixels = 0;
    int valid_pixels = 0;

    bool ok() const { return status == LiftStatus::ok; }
};

// Lifts one keypoint: seeds the depth from the nearest valid pixel in a 3x3
// window, sizes the neighborhood from the group's metric radius at that
// depth (half-widths rounded, minimum 1 px), back-projects every valid pixel
// in the window and takes the componentwise median.
LiftResult lift_keypoint(const DepthFrame& depth, const Keypoint& kp, Group group,
                         const NeighborhoodSpec& spec, const CameraIntrinsics& intr);

// Applies lift_keypoint to every keypoint with confidence >= conf_threshold;
// the rest are marked skipped. Result is indexed like the keypoint array.
std::vector<LiftResult> lift_person(const DepthFrame& depth, const DetectionRecord& det,
                                    const KeypointLayout& layout, const NeighborhoodSpec& spec,
                                    const CameraIntrinsics& intr, double conf_threshold);

} // namespace proxpose
