#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "proxpose/annotations.hpp"
#include "proxpose/camera.hpp"
#include "proxpose/raster.hpp"

namespace proxpose {

// Scene primitives with closed-form ray intersections.
struct PlanePrimitive {
    double z = 1.0; // fronto-parallel plane at constant depth, meters
};
struct SpherePrimitive {
    Point3 center;
    double radius = 0.1;
};
struct CapsulePrimitive {
    Point3 p0, p1;
    double radius = 0.05;
};
using Primitive = std::variant<PlanePrimitive, SpherePrimitive, CapsulePrimitive>;

struct NoiseSpec {
    double pixel_sigma = 0.0;
    double depth_sigma_mm = 0.0;
    double confidence_lo = 1.0; // confidences drawn uniformly from [lo, hi]
    double confidence_hi = 1.0;
};

// A synthetic scene with analytically known geometry: the independent
// reference for the lifting pipeline. Deterministic for a given seed.
struct SceneSpec {
    CameraIntrinsics intrinsics;
    int width = 640;
    int height = 480;
    std::vector<Primitive> primitives;
    std::map<int, Point3> keypoints3d; // camera frame
    NoiseSpec noise;
    std::uint64_t seed = 1;

    void validate() const;
};

SceneSpec parse_scene(const std::string& document);
std::string write_scene(const SceneSpec& spec);
SceneSpec load_scene(const std::string& path);

// Smallest positive ray parameter s (depth, since rays are normalized to
// unit z) where the pinhole ray through continuous pixel (u, v) hits the
// primitive; negative when there is no hit.
double ray_hit_depth(const Primitive& prim, double u, double v,
                     const CameraIntrinsics& intr);

// Per pixel: depth of the nearest primitive along the ray through integer
// pixel coordinates, in millimeters rounded half away from zero; background
// and out-of-range depths are the invalid value 0. Depth noise (when
// configured) is seeded from spec.seed and applied in row-major order.
DepthFrame render_depth(const SceneSpec& spec);

// Exact projections of the scene keypoints (confidence 1).
// Throws ConfigError when a keypoint is behind the camera.
std::map<int, Keypoint> project_keypoints(const SceneSpec& spec);

// Pixel-space Gaussian noise + uniform confidences per the noise spec;
// record score is the mean sampled confidence. Deterministic per seed.
DetectionRecord perturb_detections(const SceneSpec& spec,
                                   const std::map<int, Keypoint>& keypoints2d,
                                   int layout_total);

} // namespace proxpose
