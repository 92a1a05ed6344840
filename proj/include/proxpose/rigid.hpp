#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "proxpose/camera.hpp"
#include "proxpose/errors.hpp"

namespace proxpose {

// Rotation + translation mapping points from the source frame into the
// target frame: q = R p + t.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    std::string source = "camera";
    std::string target = "camera";

    RigidTransform inverse() const;
    // Throws ConfigError unless the rotation is orthonormal (1e-9) with
    // determinant +1.
    void validate() const;
};

struct CorrespondenceSet {
    std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> pairs; // (source, target)
};

Point3 apply_rigid(const Point3& p, const RigidTransform& T); // throws FrameError

// Least-squares rigid fit (Arun's SVD method with the reflection correction):
// minimizes sum ||R p_i + t - q_i||^2. Requires >= 3 non-collinear pairs.
// Throws EmptyResultError (< 3 pairs) or ConfigError (degenerate geometry).
RigidTransform estimate_rigid(const CorrespondenceSet& corr,
                              const std::string& source = "camera",
                              const std::string& target = "mocap");

// Replaces the translation with an externally measured anchor position,
// keeping the rotation. The anchor must be expressed in the target frame.
RigidTransform fix_translation(const RigidTransform& T, const Point3& anchor);

// sqrt(mean ||R p_i + t - q_i||^2). Throws EmptyResultError on an empty set.
double residual_rms(const CorrespondenceSet& corr, const RigidTransform& T);

// Text correspondence file: one "sx sy sz tx ty tz" per line, '#' comments.
CorrespondenceSet parse_correspondences(const std::string& text);
CorrespondenceSet load_correspondences(const std::string& path);

// Transform config: {"source","target","rotation":[9 row-major]} or
// {"quaternion":[w,x,y,z]}, plus "translation":[3].
RigidTransform parse_transform(const std::string& document);
std::string write_transform(const RigidTransform& T);
RigidTransform load_transform(const std::string& path);
void save_transform(const RigidTransform& T, const std::string& path);

} // namespace proxpose
