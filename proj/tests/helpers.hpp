#pragma once

// Shared fixtures and independent oracle routines for the test suites. The
// oracles deliberately re-derive results with plain loops so they stay
// decoupled from the library implementation they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "proxpose/annotations.hpp"
#include "proxpose/crop.hpp"
#include "proxpose/layout.hpp"
#include "proxpose/oks.hpp"
#include "proxpose/raster.hpp"
#include "proxpose/rng.hpp"

namespace testutil {

using namespace proxpose;

inline PersonAnnotation make_annotation(std::int64_t id, std::int64_t image_id, Bbox bbox,
                                        std::vector<Keypoint> kps,
                                        std::optional<double> area = std::nullopt) {
    PersonAnnotation ann;
    ann.id = id;
    ann.image_id = image_id;
    ann.bbox = bbox;
    ann.keypoints = std::move(kps);
    ann.area = area;
    return ann;
}

inline std::vector<Keypoint> zero_keypoints(const KeypointLayout& layout) {
    return std::vector<Keypoint>(static_cast<size_t>(layout.total));
}

// Flat-color source whose rasters match the recorded dimensions.
class SyntheticSource final : public RasterSource {
public:
    ImageRgb8 load(const ImageRecord& rec) const override {
        ImageRgb8 img(rec.width, rec.height);
        for (size_t i = 0; i < img.pixels.size(); ++i)
            img.pixels[i] = static_cast<std::uint8_t>((rec.id * 37 + i) % 251);
        return img;
    }
};

// Source that refuses ids from a deny list, for unreadable-image paths.
class FailingSource final : public RasterSource {
public:
    explicit FailingSource(std::vector<std::int64_t> deny) : deny_(std::move(deny)) {}
    ImageRgb8 load(const ImageRecord& rec) const override {
        if (std::find(deny_.begin(), deny_.end(), rec.id) != deny_.end())
            throw IoError("denied");
        return SyntheticSource{}.load(rec);
    }

private:
    std::vector<std::int64_t> deny_;
};

// Term-by-term keypoint similarity, written independently of the library.
inline std::optional<double> brute_oks(const std::vector<Keypoint>& det,
                                       const PersonAnnotation& gt, const OksParams& params,
                                       const std::vector<int>& indices) {
    double area = gt.bbox.w * gt.bbox.h;
    if (params.scale_rule == OksParams::ScaleRule::sqrt_annotated_area && gt.area &&
        *gt.area > 0.0)
        area = *gt.area;
    const double s = std::sqrt(area);
    double num = 0.0;
    int den = 0;
    for (int i : indices) {
        if (!(gt.keypoints[size_t(i)].c > 0.0)) continue;
        const double du = det[size_t(i)].u - gt.keypoints[size_t(i)].u;
        const double dv = det[size_t(i)].v - gt.keypoints[size_t(i)].v;
        const double k = params.kappas[size_t(i)];
        num += std::exp(-(du * du + dv * dv) / (2.0 * s * s * k * k));
        den += 1;
    }
    if (den == 0) return std::nullopt;
    return num / den;
}

// Assignment semantics spelled out longhand: walk detections by descending
// score (stable), give each the best remaining labeled ground truth, keep
// the pair only when it reaches the threshold.
struct OracleMatch {
    std::vector<std::array<int, 2>> pairs; // (det, gt)
    std::vector<int> fps;
    std::vector<int> fns;
};

inline OracleMatch oracle_match(const std::vector<DetectionRecord>& dets,
                                const std::vector<PersonAnnotation>& gts,
                                const OksParams& params, const std::vector<int>& indices,
                                double threshold) {
    OracleMatch out;
    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dets[size_t(a)].score > dets[size_t(b)].score; });
    std::vector<bool> taken(gts.size(), false);
    std::vector<bool> labeled(gts.size(), false);
    for (size_t g = 0; g < gts.size(); ++g)
        for (int i : indices)
            if (gts[g].keypoints[size_t(i)].c > 0.0) { labeled[g] = true; break; }

    for (int d : order) {
        int best = -1;
        double best_val = -1.0;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (taken[g] || !labeled[g]) continue;
            auto val = brute_oks(dets[size_t(d)].keypoints, gts[g], params, indices);
            if (val && *val > best_val) {
                best_val = *val;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0 && best_val >= threshold) {
            taken[size_t(best)] = true;
            out.pairs.push_back({d, best});
        } else {
            out.fps.push_back(d);
        }
    }
    for (size_t g = 0; g < gts.size(); ++g)
        if (labeled[g] && !taken[g]) out.fns.push_back(static_cast<int>(g));
    std::sort(out.pairs.begin(), out.pairs.end());
    std::sort(out.fps.begin(), out.fps.end());
    return out;
}

// Independent restatement of the visibility rule table.
inline std::string oracle_category(const PersonAnnotation& ann, const KeypointLayout& layout) {
    if (!layout.has_joint("l_shoulder")) return "other";
    auto on = [&](const char* name) {
        return ann.keypoints[size_t(layout.joint(name))].c > 0.0;
    };
    bool head = false;
    for (int h : layout.head_indices)
        if (ann.keypoints[size_t(h)].c > 0.0) head = true;
    bool legs = false;
    for (const char* n : {"l_hip", "r_hip", "l_knee", "r_knee", "l_ankle", "r_ankle"})
        if (on(n)) legs = true;
    const bool lf = on("l_shoulder") && on("l_elbow") && on("l_wrist");
    const bool rf = on("r_shoulder") && on("r_elbow") && on("r_wrist");
    const bool la = on("l_shoulder") || on("l_elbow") || on("l_wrist");
    const bool ra = on("r_shoulder") || on("r_elbow") || on("r_wrist");

    if (head && lf && rf) return "whole-upper-body";
    if (head && !la && !ra && !legs) return "only-head";
    if (legs && !head && !la && !ra) return "only-legs";
    if (!head && !legs && la && !ra) return "only-left-arm";
    if (!head && !legs && ra && !la) return "only-right-arm";
    if (!head && !legs && lf && rf) return "only-both-arms";
    if (!head && !legs && on("l_elbow") && on("l_wrist") && on("r_elbow") && on("r_wrist") &&
        !on("l_shoulder") && !on("r_shoulder"))
        return "arms-without-shoulders";
    if (head && rf && !la) return "no-left-arm";
    if (head && lf && !ra) return "no-right-arm";
    if (!head && lf && rf) return "no-head";
    return "other";
}

} // namespace testutil
