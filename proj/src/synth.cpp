#include "proxpose/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "proxpose/rng.hpp"

namespace proxpose {

namespace {

double primitive_min_z(const Primitive& prim) {
    if (const auto* pl = std::get_if<PlanePrimitive>(&prim)) return pl->z;
    if (const auto* sp = std::get_if<SpherePrimitive>(&prim)) return sp->center.z - sp->radius;
    const auto& cap = std::get<CapsulePrimitive>(prim);
    return std::min(cap.p0.z, cap.p1.z) - cap.radius;
}

// Smallest positive root of a s^2 + b s + c = 0, or -1.
double smallest_positive_root(double a, double b, double c) {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0 || a == 0.0) return -1.0;
    const double sq = std::sqrt(disc);
    const double s0 = (-b - sq) / (2.0 * a);
    if (s0 > 0.0) return s0;
    const double s1 = (-b + sq) / (2.0 * a);
    return s1 > 0.0 ? s1 : -1.0;
}

} // namespace

void SceneSpec::validate() const {
    intrinsics.validate();
    if (width < 1 || height < 1) throw ConfigError("scene: non-positive raster size");
    for (const auto& prim : primitives)
        if (!(primitive_min_z(prim) > 0.0))
            throw ConfigError("scene: primitive not strictly in front of the camera");
    for (const auto& [idx, p] : keypoints3d) {
        if (idx < 0) throw ConfigError("scene: negative keypoint index");
        if (!(p.z > 0.0)) throw ConfigError("scene: keypoint behind the camera");
    }
    if (noise.pixel_sigma < 0.0 || noise.depth_sigma_mm < 0.0)
        throw ConfigError("scene: negative noise sigma");
    if (noise.confidence_lo > noise.confidence_hi || noise.confidence_lo < 0.0 ||
        noise.confidence_hi > 1.0)
        throw ConfigError("scene: confidence range must satisfy 0 <= lo <= hi <= 1");
}

double ray_hit_depth(const Primitive& prim, double u, double v,
                     const CameraIntrinsics& intr) {
    // Ray p(s) = s * dir with dir = ((u-cx)/fx, (v-cy)/fy, 1); s is depth.
    const double dx = (u - intr.cx) / intr.fx;
    const double dy = (v - intr.cy) / intr.fy;

    if (const auto* pl = std::get_if<PlanePrimitive>(&prim)) {
        return pl->z > 0.0 ? pl->z : -1.0;
    }
    if (const auto* sp = std::get_if<SpherePrimitive>(&prim)) {
        const double a = dx * dx + dy * dy + 1.0;
        const double b = -2.0 * (dx * sp->center.x + dy * sp->center.y + sp->center.z);
        const double c = sp->center.x * sp->center.x + sp->center.y * sp->center.y +
                         sp->center.z * sp->center.z - sp->radius * sp->radius;
        return smallest_positive_root(a, b, c);
    }

    const auto& cap = std::get<CapsulePrimitive>(prim);
    const double ax = cap.p1.x - cap.p0.x, ay = cap.p1.y - cap.p0.y, az = cap.p1.z - cap.p0.z;
    const double len2 = ax * ax + ay * ay + az * az;
    double best = -1.0;
    auto consider = [&best](double s) {
        if (s > 0.0 && (best < 0.0 || s < best)) best = s;
    };

    // Cap spheres at both segment ends.
    for (const Point3* e : {&cap.p0, &cap.p1}) {
        const double a = dx * dx + dy * dy + 1.0;
        const double b = -2.0 * (dx * e->x + dy * e->y + e->z);
        const double c = e->x * e->x + e->y * e->y + e->z * e->z - cap.radius * cap.radius;
        consider(smallest_positive_root(a, b, c));
    }
    // Infinite cylinder, accepted only where the hit projects inside the
    // segment. With m = d - (d.a)a/|a|^2 and w = -p0 + ((p0.a)/|a|^2) a the
    // perpendicular distance is |s*m - ...|; expand directly instead.
    if (len2 > 0.0) {
        const double da = (dx * ax + dy * ay + az) / len2;
        const double pa = (cap.p0.x * ax + cap.p0.y * ay + cap.p0.z * az) / len2;
        // Components of the ray and base point orthogonal to the axis.
        const double mx = dx - da * ax, my = dy - da * ay, mz = 1.0 - da * az;
        const double wx = -cap.p0.x + pa * ax, wy = -cap.p0.y + pa * ay,
                     wz = -cap.p0.z + pa * az;
        const double a = mx * mx + my * my + mz * mz;
        const double b = 2.0 * (mx * wx + my * wy + mz * wz);
        const double c = wx * wx + wy * wy + wz * wz - cap.radius * cap.radius;
        const double disc = b * b - 4.0 * a * c;
        if (a > 0.0 && disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (double s : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
                if (s <= 0.0) continue;
                const double t = s * da - pa; // axis parameter in [0,1] inside segment
                if (t >= 0.0 && t <= 1.0) consider(s);
            }
        }
    }
    return best;
}

DepthFrame render_depth(const SceneSpec& spec) {
    spec.validate();
    DepthFrame frame(spec.width, spec.height);
    // Separate stream from detection perturbation so the two outputs stay
    // independently reproducible.
    Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    const bool noisy = spec.noise.depth_sigma_mm > 0.0;
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            double nearest = -1.0;
            for (const auto& prim : spec.primitives) {
                const double s = ray_hit_depth(prim, x, y, spec.intrinsics);
                if (s > 0.0 && (nearest < 0.0 || s < nearest)) nearest = s;
            }
            double noise_mm = noisy ? rng.normal(0.0, spec.noise.depth_sigma_mm) : 0.0;
            if (nearest <= 0.0) continue; // background stays invalid
            const long long mm = std::llround(nearest * 1000.0 + noise_mm);
            if (mm < 1 || mm > 65535) continue; // out of sensor range -> invalid
            frame.at(x, y) = static_cast<std::uint16_t>(mm);
        }
    }
    return frame;
}

std::map<int, Keypoint> project_keypoints(const SceneSpec& spec) {
    std::map<int, Keypoint> out;
    for (const auto& [idx, p] : spec.keypoints3d) {
        Keypoint kp;
        project(p, spec.intrinsics, kp.u, kp.v);
        kp.c = 1.0;
        out[idx] = kp;
    }
    return out;
}

DetectionRecord perturb_detections(const SceneSpec& spec,
                                   const std::map<int, Keypoint>& keypoints2d,
                                   int layout_total) {
    DetectionRecord rec;
    rec.image_id = 0;
    rec.keypoints.assign(static_cast<size_t>(layout_total), Keypoint{});
    Rng rng(spec.seed);
    double conf_sum = 0.0;
    size_t conf_count = 0;
    for (const auto& [idx, kp] : keypoints2d) { // map order: ascending index
        if (idx >= layout_total)
            throw ConfigError("scene keypoint index " + std::to_string(idx) +
                              " outside layout of size " + std::to_string(layout_total));
        Keypoint out = kp;
        if (spec.noise.pixel_sigma > 0.0) {
            out.u += rng.normal(0.0, spec.noise.pixel_sigma);
            out.v += rng.normal(0.0, spec.noise.pixel_sigma);
        }
        out.c = spec.noise.confidence_lo == spec.noise.confidence_hi
                    ? spec.noise.confidence_lo
                    : rng.uniform(spec.noise.confidence_lo, spec.noise.confidence_hi);
        rec.keypoints[static_cast<size_t>(idx)] = out;
        conf_sum += out.c;
        ++conf_count;
    }
    rec.score = conf_count > 0 ? conf_sum / static_cast<double>(conf_count) : 1.0;
    return rec;
}

namespace {

Point3 point_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 3) throw ParseError("scene: point needs 3 values");
    return Point3{v[0], v[1], v[2], "camera"};
}

nlohmann::json point_to_json(const Point3& p) {
    return nlohmann::json::array({p.x, p.y, p.z});
}

} // namespace

SceneSpec parse_scene(const std::string& document) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("scene: ") + e.what());
    }
    SceneSpec spec;
    try {
        const auto& ji = j.at("intrinsics");
        spec.intrinsics.fx = ji.at("fx").get<double>();
        spec.intrinsics.fy = ji.at("fy").get<double>();
        spec.intrinsics.cx = ji.at("cx").get<double>();
        spec.intrinsics.cy = ji.at("cy").get<double>();
        spec.width = ji.at("width").get<int>();
        spec.height = ji.at("height").get<int>();
        const nlohmann::json prims = j.value("primitives", nlohmann::json::array());
        for (const auto& jp : prims) {
            const std::string type = jp.at("type").get<std::string>();
            if (type == "plane") {
                spec.primitives.push_back(PlanePrimitive{jp.at("z").get<double>()});
            } else if (type == "sphere") {
                spec.primitives.push_back(SpherePrimitive{point_from_json(jp.at("center")),
                                                          jp.at("radius").get<double>()});
            } else if (type == "capsule") {
                spec.primitives.push_back(CapsulePrimitive{point_from_json(jp.at("p0")),
                                                           point_from_json(jp.at("p1")),
                                                           jp.at("radius").get<double>()});
            } else {
                throw ParseError("scene: unknown primitive type '" + type + "'");
            }
        }
        const nlohmann::json kps = j.value("keypoints3d", nlohmann::json::object());
        for (const auto& [key, val] : kps.items())
            spec.keypoints3d[std::stoi(key)] = point_from_json(val);
        if (j.contains("noise")) {
            const auto& jn = j["noise"];
            spec.noise.pixel_sigma = jn.value("pixel_sigma", 0.0);
            spec.noise.depth_sigma_mm = jn.value("depth_sigma_mm", 0.0);
            if (jn.contains("confidence")) {
                const auto c = jn["confidence"].get<std::vector<double>>();
                if (c.size() != 2) throw ParseError("scene: 'confidence' needs [lo, hi]");
                spec.noise.confidence_lo = c[0];
                spec.noise.confidence_hi = c[1];
            }
        }
        spec.seed = j.value("seed", std::uint64_t{1});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scene: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw ParseError("scene: keypoint index is not an integer");
    }
    spec.validate();
    return spec;
}

std::string write_scene(const SceneSpec& spec) {
    nlohmann::json j;
    j["intrinsics"] = {{"fx", spec.intrinsics.fx}, {"fy", spec.intrinsics.fy},
                       {"cx", spec.intrinsics.cx}, {"cy", spec.intrinsics.cy},
                       {"width", spec.width},      {"height", spec.height}};
    nlohmann::json prims = nlohmann::json::array();
    for (const auto& prim : spec.primitives) {
        nlohmann::json jp;
        if (const auto* pl = std::get_if<PlanePrimitive>(&prim)) {
            jp = {{"type", "plane"}, {"z", pl->z}};
        } else if (const auto* sp = std::get_if<SpherePrimitive>(&prim)) {
            jp = {{"type", "sphere"}, {"center", point_to_json(sp->center)},
                  {"radius", sp->radius}};
        } else {
            const auto& cap = std::get<CapsulePrimitive>(prim);
            jp = {{"type", "capsule"}, {"p0", point_to_json(cap.p0)},
                  {"p1", point_to_json(cap.p1)}, {"radius", cap.radius}};
        }
        prims.push_back(std::move(jp));
    }
    j["primitives"] = std::move(prims);
    nlohmann::json kps = nlohmann::json::object();
    for (const auto& [idx, p] : spec.keypoints3d) kps[std::to_string(idx)] = point_to_json(p);
    j["keypoints3d"] = std::move(kps);
    j["noise"] = {{"pixel_sigma", spec.noise.pixel_sigma},
                  {"depth_sigma_mm", spec.noise.depth_sigma_mm},
                  {"confidence", {spec.noise.confidence_lo, spec.noise.confidence_hi}}};
    j["seed"] = spec.seed;
    return j.dump(2) + "\n";
}

SceneSpec load_scene(const std::string& path) { return parse_scene(read_file(path)); }

} // namespace proxpose
