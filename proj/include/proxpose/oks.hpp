#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proxpose/annotations.hpp"
#include "proxpose/layout.hpp"

namespace proxpose {

// Per-keypoint falloff constants and the object-scale rule for the keypoint
// similarity metric. Defaults ship the COCO-challenge body constants; every
// other index (feet, extra head joints, hand, face) gets a single
// configurable constant — a convention, not ground truth.
struct OksParams {
    std::vector<double> kappas;           // one per layout index, > 0
    enum class ScaleRule { sqrt_bbox_area, sqrt_annotated_area };
    ScaleRule scale_rule = ScaleRule::sqrt_annotated_area;
    std::vector<double> thresholds;       // strictly increasing, in (0, 1]

    static std::vector<double> coco_interval(); // {0.50, 0.55, ..., 0.95}
    static OksParams defaults(const KeypointLayout& layout,
                              double extended_kappa = 0.07);
    void validate(const KeypointLayout& layout) const;

    double scale_for(const PersonAnnotation& gt) const;
};

OksParams parse_oks_params(const std::string& document, const KeypointLayout& layout);
std::string write_oks_params(const OksParams& params);
OksParams load_oks_params(const std::string& path, const KeypointLayout& layout);

// Keypoint similarity over the given indices:
//   sum_i exp(-d_i^2 / (2 s^2 k_i^2)) [v_i > 0] / sum_i [v_i > 0]
// with d_i the pixel distance and s the object scale. Returns nullopt when
// no ground-truth keypoint in the index set is labeled (undefined value;
// such ground truth drops out of the recall denominator).
std::optional<double> oks(const std::vector<Keypoint>& det, const PersonAnnotation& gt,
                          const OksParams& params, const std::vector<int>& indices);

struct MatchResult {
    struct Pair {
        int detection = 0;
        int gt = 0;
        double oks = 0.0;
    };
    std::vector<Pair> pairs;              // true positives
    std::vector<int> unmatched_detections; // false positives
    std::vector<int> unmatched_gts;        // false negatives
    std::vector<int> ignored_gts;          // no labeled keypoint in the group

    int tp() const { return static_cast<int>(pairs.size()); }
    int fp() const { return static_cast<int>(unmatched_detections.size()); }
    int fn() const { return static_cast<int>(unmatched_gts.size()); }
};

// Greedy matching for one image: detections in descending score order (file
// order on ties) each take the remaining ground truth with the highest
// similarity (lower index on ties); a pair is kept iff its value reaches the
// threshold, otherwise the detection stays unmatched and the ground truth
// remains available.
MatchResult match_image(const std::vector<DetectionRecord>& dets,
                        const std::vector<PersonAnnotation>& gts, const OksParams& params,
                        const std::vector<int>& indices, double threshold);

// Visible-body-part category of a ground-truth annotation, from a fixed rule
// table over head / arm / leg index sets. Layouts without the semantic body
// joints map everything to "other".
std::string categorize_visibility(const PersonAnnotation& ann, const KeypointLayout& layout);

// The category labels in rule-table order (ending with "other").
const std::vector<std::string>& visibility_categories();

struct ThresholdCounts {
    double threshold = 0.0;
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;

    double precision() const { return tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0; }
    double recall() const { return tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0; }
};

struct GroupResult {
    std::string group;
    std::vector<ThresholdCounts> per_threshold;
    double ap = 0.0; // mean precision over the threshold set
    double ar = 0.0; // mean recall over the threshold set
    std::optional<double> p50, r50, p75, r75;
    std::optional<double> interpolated_ap; // COCO-style 101-point AP, on request
    long long num_images = 0;
    long long num_gt = 0;      // annotations with >= 1 labeled keypoint in the group
    long long num_detections = 0;
    bool no_detections = false;
    bool empty_gt = false;
    std::map<std::string, GroupResult> categories; // per visibility category
};

struct EvalOptions {
    bool by_category = false;
    bool interpolated_ap = false;
    unsigned jobs = 1;
};

// Precision/recall over every image of the dataset for one keypoint group
// (or a named sub-range such as left_hand). Aggregation is a sum of
// per-image counts, so the result is independent of worker count.
GroupResult evaluate(const Dataset& dataset, const std::vector<DetectionRecord>& dets,
                     const OksParams& params, const std::string& group,
                     const EvalOptions& opts = {});

} // namespace proxpose
