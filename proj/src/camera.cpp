#include "proxpose/camera.hpp"

#include <cmath>

#include <json.hpp>

#include "proxpose/annotations.hpp"

namespace proxpose {

double distance(const Point3& a, const Point3& b) {
    if (a.frame != b.frame)
        throw FrameError("distance between points in frames '" + a.frame + "' and '" +
                         b.frame + "'");
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Point3 backproject(double u, double v, double k, const CameraIntrinsics& intr) {
    intr.validate();
    if (!(k > 0.0)) throw ConfigError("backproject: depth must be positive");
    Point3 p;
    p.x = k * (u - intr.cx) / intr.fx;
    p.y = k * (v - intr.cy) / intr.fy;
    p.z = k;
    p.frame = "camera";
    return p;
}

void project(const Point3& p, const CameraIntrinsics& intr, double& u, double& v) {
    intr.validate();
    if (!(p.z > 0.0)) throw ConfigError("project: point is behind the camera");
    u = intr.fx * p.x / p.z + intr.cx;
    v = intr.fy * p.y / p.z + intr.cy;
}

double pixel_radius(double r, double k, const CameraIntrinsics& intr, Axis axis) {
    intr.validate();
    if (!(k > 0.0)) throw ConfigError("pixel_radius: depth must be positive");
    if (!(r > 0.0)) throw ConfigError("pixel_radius: radius must be positive");
    const double f = (axis == Axis::x) ? intr.fx : intr.fy;
    return f / k * r;
}

IntrinsicsConfig parse_intrinsics(const std::string& document) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("intrinsics: ") + e.what());
    }
    IntrinsicsConfig cfg;
    try {
        cfg.k.fx = j.at("fx").get<double>();
        cfg.k.fy = j.at("fy").get<double>();
        cfg.k.cx = j.at("cx").get<double>();
        cfg.k.cy = j.at("cy").get<double>();
        cfg.width = j.at("width").get<int>();
        cfg.height = j.at("height").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("intrinsics: ") + e.what());
    }
    cfg.k.validate();
    if (cfg.width < 1 || cfg.height < 1)
        throw ConfigError("intrinsics: non-positive raster size");
    return cfg;
}

std::string write_intrinsics(const IntrinsicsConfig& cfg) {
    nlohmann::json j;
    j["fx"] = cfg.k.fx;
    j["fy"] = cfg.k.fy;
    j["cx"] = cfg.k.cx;
    j["cy"] = cfg.k.cy;
    j["width"] = cfg.width;
    j["height"] = cfg.height;
    return j.dump();
}

IntrinsicsConfig load_intrinsics(const std::string& path) {
    return parse_intrinsics(read_file(path));
}

} // namespace proxpose
