#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "proxpose/camera.hpp"
#include "proxpose/errors.hpp"
#include "proxpose/rigid.hpp"

namespace proxpose {

// Time-ordered 3D keypoint observations with confidences.
struct Trajectory {
    struct Frame {
        double t = 0.0; // seconds
        std::map<int, std::pair<Point3, double>> keypoints;
    };
    std::vector<Frame> frames;

    void validate() const; // non-decreasing timestamps, consistent frames
};

// Optical marker positions over time.
struct MocapTrack {
    struct Frame {
        double t = 0.0;
        std::map<std::string, Point3> markers;
    };
    std::vector<Frame> frames;

    void validate() const;
};

// keypoint index -> the two markers flanking it.
struct MarkerPairing {
    std::map<int, std::pair<std::string, std::string>> pairs;

    void validate() const; // distinct marker ids per keypoint
};

struct DistanceBins {
    std::vector<double> thresholds = {0.025, 0.05, 0.1}; // meters, increasing

    void validate() const;
};

// Trajectory file: JSON lines, one frame per line
//   {"t": <seconds>, "keypoints": {"<index>": [x, y, z, conf]}}
Trajectory parse_trajectory(const std::string& text, const std::string& frame = "camera");
std::string write_trajectory(const Trajectory& traj);
Trajectory load_trajectory(const std::string& path, const std::string& frame = "camera");

// MoCap file: CSV with header "t,marker_id,x,y,z" (meters); consecutive rows
// sharing a timestamp form one frame.
MocapTrack parse_mocap_csv(const std::string& text, const std::string& frame = "mocap");
MocapTrack load_mocap_csv(const std::string& path, const std::string& frame = "mocap");

// Pairing config: {"<keypoint index>": ["marker_a", "marker_b"], ...}
MarkerPairing parse_marker_pairing(const std::string& document);
MarkerPairing load_marker_pairing(const std::string& path);

Trajectory transform_trajectory(const Trajectory& traj, const RigidTransform& T);

// Componentwise median position per keypoint over the frames where its
// confidence reaches the threshold; never-qualifying keypoints are omitted.
std::map<int, Point3> median_center(const Trajectory& traj, double conf_threshold);

struct RelativeRow {
    long long frames_total = 0;
    long long qualifying = 0;
    double detection_fraction = 0.0;
    std::vector<double> within; // one fraction per distance bin
};

// Stability around the per-keypoint centers: for every keypoint, the
// fraction of qualifying frames within each bin of its center.
std::map<int, RelativeRow> relative_stats(const Trajectory& traj,
                                          const std::map<int, Point3>& centers,
                                          const DistanceBins& bins, double conf_threshold);

// Ground-truth keypoint trajectory from marker midpoints (confidence 1);
// frames missing either marker omit the keypoint. Throws ConfigError when
// the pairing references a marker id absent from the whole track.
Trajectory marker_ground_truth(const MocapTrack& mocap, const MarkerPairing& pairing);

struct TimeAssociation {
    std::vector<std::pair<size_t, size_t>> pairs; // (frame index in a, in b)
    long long dropped_a = 0;
    long long dropped_b = 0;
};

// One-to-one nearest-timestamp pairing, greedy by |dt| ascending (ties by
// frame indices), pairs beyond the tolerance dropped.
TimeAssociation associate_by_time(const Trajectory& a, const Trajectory& b,
                                  double tolerance_s);

struct AbsoluteRow {
    int keypoint = 0;
    double conf_threshold = 0.0;
    long long count = 0;            // qualifying detections with GT present
    std::optional<double> median_m; // median distance to ground truth
    std::vector<double> within;     // fraction within each bin
};

// Distance of detected keypoints to their ground-truth correspondences over
// the associated frames, per keypoint and per confidence threshold. Both
// trajectories must already be in the same coordinate frame. An empty
// keypoint selection means "every keypoint seen in the ground truth".
std::vector<AbsoluteRow> absolute_stats(const Trajectory& detected, const Trajectory& gt,
                                        const TimeAssociation& assoc, const DistanceBins& bins,
                                        const std::vector<double>& conf_thresholds,
                                        const std::set<int>& keypoint_selection = {});

} // namespace proxpose
