#include "proxpose/lift.hpp"

#include <algorithm>
#include <cmath>

namespace proxpose {

double NeighborhoodSpec::radius_for(Group g) const {
    auto it = radius_by_group.find(g);
    if (it == radius_by_group.end() || !(it->second > 0.0))
        throw ConfigError(std::string("no neighborhood radius for group ") + to_string(g));
    return it->second;
}

const char* to_string(LiftStatus s) {
    switch (s) {
    case LiftStatus::ok: return "ok";
    case LiftStatus::skipped: return "skipped";
    case LiftStatus::out_of_frame: return "out_of_frame";
    case LiftStatus::no_depth: return "no_depth";
    case LiftStatus::insufficient_depth: return "insufficient_depth";
    }
    return "?";
}

namespace {

// Nearest valid pixel in the 3x3 window around (px, py); scan order is fixed
// (distance, then dy, then dx) so the seed is deterministic.
std::optional<double> seed_depth(const DepthFrame& depth, int px, int py) {
    static constexpr int order[9][2] = {
        {0, 0},  {-1, 0}, {0, -1}, {0, 1},  {1, 0},
        {-1, -1}, {-1, 1}, {1, -1}, {1, 1},
    };
    for (const auto& [dy, dx] : order) {
        const int x = px + dx, y = py + dy;
        if (!depth.in_bounds(x, y)) continue;
        const std::uint16_t mm = depth.at(x, y);
        if (mm > 0) return static_cast<double>(mm) / 1000.0;
    }
    return std::nullopt;
}

double component_median(std::vector<double>& values) {
    const size_t n = values.size();
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(values.begin(), mid);
    return 0.5 * (lo + hi);
}

} // namespace

LiftResult lift_keypoint(const DepthFrame& depth, const Keypoint& kp, Group group,
                         const NeighborhoodSpec& spec, const CameraIntrinsics& intr) {
    LiftResult res;
    const long px = std::lround(kp.u);
    const long py = std::lround(kp.v);
    if (px < 0 || px >= depth.width || py < 0 || py >= depth.height) {
        res.status = LiftStatus::out_of_frame;
        return res;
    }

    const auto seed = seed_depth(depth, static_cast<int>(px), static_cast<int>(py));
    if (!seed) {
        res.status = LiftStatus::no_depth;
        return res;
    }

    const double radius = spec.radius_for(group);
    const int hx = std::max(1L, std::lround(pixel_radius(radius, *seed, intr, Axis::x)));
    const int hy = std::max(1L, std::lround(pixel_radius(radius, *seed, intr, Axis::y)));
    const int x0 = std::max(0, static_cast<int>(px) - hx);
    const int x1 = std::min(depth.width - 1, static_cast<int>(px) + hx);
    const int y0 = std::max(0, static_cast<int>(py) - hy);
    const int y1 = std::min(depth.height - 1, static_cast<int>(py) + hy);

    std::vector<double> xs, ys, zs;
    int window_pixels = 0;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (spec.disc_window) {
                const double ex = (x - static_cast<double>(px)) / hx;
                const double ey = (y - static_cast<double>(py)) / hy;
                if (ex * ex + ey * ey > 1.0) continue;
            }
            ++window_pixels;
            const std::uint16_t mm = depth.at(x, y);
            if (mm == 0) continue;
            const Point3 p = backproject(x, y, static_cast<double>(mm) / 1000.0, intr);
            xs.push_back(p.x);
            ys.push_back(p.y);
            zs.push_back(p.z);
        }
    }
    res.window_pixels = window_pixels;
    res.valid_pixels = static_cast<int>(zs.size());
    if (zs.empty() ||
        static_cast<double>(zs.size()) < spec.min_valid_fraction * window_pixels) {
        res.status = LiftStatus::insufficient_depth;
        return res;
    }

    res.point = Point3{component_median(xs), component_median(ys), component_median(zs),
                       "camera"};
    res.status = LiftStatus::ok;
    return res;
}

std::vector<LiftResult> lift_person(const DepthFrame& depth, const DetectionRecord& det,
                                    const KeypointLayout& layout, const NeighborhoodSpec& spec,
                                    const CameraIntrinsics& intr, double conf_threshold) {
    if (det.keypoints.size() != static_cast<size_t>(layout.total))
        throw LayoutError("detection keypoint count does not match layout '" + layout.name +
                          "'");
    // Group of each index, resolved once.
    std::vector<Group> group_of(static_cast<size_t>(layout.total), Group::body);
    for (const auto& [g, ranges] : layout.group_ranges)
        for (const auto& r : ranges)
            for (int i = r.begin; i < r.end; ++i) group_of[static_cast<size_t>(i)] = g;

    std::vector<LiftResult> out(det.keypoints.size());
    for (size_t i = 0; i < det.keypoints.size(); ++i) {
        const Keypoint& kp = det.keypoints[i];
        if (kp.c < conf_threshold) {
            out[i].status = LiftStatus::skipped;
            continue;
        }
        out[i] = lift_keypoint(depth, kp, group_of[i], spec, intr);
    }
    return out;
}

} // namespace proxpose
