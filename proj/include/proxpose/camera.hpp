#pragma once

#include <string>

#include "proxpose/errors.hpp"

namespace proxpose {

// Pinhole parameters: focal lengths and principal point in pixels.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0))
            throw ConfigError("intrinsics: focal lengths must be positive");
    }
};

// Intrinsics plus the raster size they were calibrated for.
struct IntrinsicsConfig {
    CameraIntrinsics k;
    int width = 0;
    int height = 0;
};

IntrinsicsConfig parse_intrinsics(const std::string& document);
std::string write_intrinsics(const IntrinsicsConfig& cfg);
IntrinsicsConfig load_intrinsics(const std::string& path);

// 3D point in a named coordinate frame (meters).
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    std::string frame = "camera";

    bool operator==(const Point3&) const = default;
};

double distance(const Point3& a, const Point3& b); // throws FrameError on mismatch

enum class Axis { x, y };

// Ray through pixel (u, v) at depth k meters: x = k(u-cx)/fx, y = k(v-cy)/fy,
// z = k. Throws ConfigError when k <= 0.
Point3 backproject(double u, double v, double k, const CameraIntrinsics& intr);

// Inverse mapping: u = fx*x/z + cx, v = fy*y/z + cy. Throws ConfigError when
// the point is not in front of the camera (z <= 0).
void project(const Point3& p, const CameraIntrinsics& intr, double& u, double& v);

// Pixel extent of a metric distance r at depth k along one image axis:
// (f_axis / k) * r. Throws ConfigError when k <= 0 or r <= 0.
double pixel_radius(double r, double k, const CameraIntrinsics& intr, Axis axis);

} // namespace proxpose
