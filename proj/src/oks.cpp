#include "proxpose/oks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "proxpose/parallel.hpp"

namespace proxpose {

namespace {

// COCO-challenge per-keypoint constants (2 * sigma) for the 17 standard
// body joints, indexed nose..r_ankle.
constexpr double kCocoBodyKappas[17] = {
    0.052, 0.050, 0.050, 0.070, 0.070, 0.158, 0.158, 0.144, 0.144,
    0.124, 0.124, 0.214, 0.214, 0.174, 0.174, 0.178, 0.178,
};

} // namespace

std::vector<double> OksParams::coco_interval() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
    return t;
}

OksParams OksParams::defaults(const KeypointLayout& layout, double extended_kappa) {
    OksParams p;
    p.kappas.assign(static_cast<size_t>(layout.total), extended_kappa);
    if (layout.has_joint("nose")) {
        // The 17 standard joints share indices across the shipped layouts.
        for (int i = 0; i < 17 && i < layout.total; ++i)
            p.kappas[static_cast<size_t>(i)] = kCocoBodyKappas[i];
    }
    p.thresholds = coco_interval();
    return p;
}

void OksParams::validate(const KeypointLayout& layout) const {
    if (kappas.size() != static_cast<size_t>(layout.total))
        throw ConfigError("oks params: kappas length " + std::to_string(kappas.size()) +
                          " does not match layout '" + layout.name + "'");
    for (double k : kappas)
        if (!(k > 0.0)) throw ConfigError("oks params: kappas must be positive");
    if (thresholds.empty()) throw ConfigError("oks params: empty threshold set");
    for (size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0) || !(thresholds[i] <= 1.0))
            throw ConfigError("oks params: thresholds must lie in (0, 1]");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
            throw ConfigError("oks params: thresholds must be strictly increasing");
    }
}

double OksParams::scale_for(const PersonAnnotation& gt) const {
    double area = gt.bbox.w * gt.bbox.h;
    if (scale_rule == ScaleRule::sqrt_annotated_area && gt.area && *gt.area > 0.0)
        area = *gt.area;
    if (!(area > 0.0)) throw ConfigError("oks: ground truth has non-positive area");
    return std::sqrt(area);
}

OksParams parse_oks_params(const std::string& document, const KeypointLayout& layout) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("oks params: ") + e.what());
    }
    OksParams p = OksParams::defaults(layout);
    try {
        if (j.contains("extended_kappa"))
            p = OksParams::defaults(layout, j["extended_kappa"].get<double>());
        if (j.contains("kappas")) p.kappas = j["kappas"].get<std::vector<double>>();
        if (j.contains("scale_rule")) {
            const std::string rule = j["scale_rule"].get<std::string>();
            if (rule == "sqrt_bbox_area")
                p.scale_rule = OksParams::ScaleRule::sqrt_bbox_area;
            else if (rule == "sqrt_annotated_area")
                p.scale_rule = OksParams::ScaleRule::sqrt_annotated_area;
            else
                throw ConfigError("oks params: unknown scale_rule '" + rule + "'");
        }
        if (j.contains("thresholds")) p.thresholds = j["thresholds"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("oks params: ") + e.what());
    }
    p.validate(layout);
    return p;
}

std::string write_oks_params(const OksParams& params) {
    nlohmann::json j;
    j["kappas"] = params.kappas;
    j["scale_rule"] = params.scale_rule == OksParams::ScaleRule::sqrt_bbox_area
                          ? "sqrt_bbox_area"
                          : "sqrt_annotated_area";
    j["thresholds"] = params.thresholds;
    return j.dump(2) + "\n";
}

OksParams load_oks_params(const std::string& path, const KeypointLayout& layout) {
    return parse_oks_params(read_file(path), layout);
}

std::optional<double> oks(const std::vector<Keypoint>& det, const PersonAnnotation& gt,
                          const OksParams& params, const std::vector<int>& indices) {
    if (det.size() != gt.keypoints.size() || det.size() != params.kappas.size())
        throw LayoutError("oks: keypoint array sizes disagree");
    const double s = params.scale_for(gt);
    double sum = 0.0;
    long long count = 0;
    for (int i : indices) {
        const Keypoint& g = gt.keypoints[static_cast<size_t>(i)];
        if (!g.present()) continue;
        const Keypoint& d = det[static_cast<size_t>(i)];
        const double du = d.u - g.u;
        const double dv = d.v - g.v;
        const double k = params.kappas[static_cast<size_t>(i)];
        sum += std::exp(-(du * du + dv * dv) / (2.0 * s * s * k * k));
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

MatchResult match_image(const std::vector<DetectionRecord>& dets,
                        const std::vector<PersonAnnotation>& gts, const OksParams& params,
                        const std::vector<int>& indices, double threshold) {
    MatchResult res;

    std::vector<int> det_order(dets.size());
    std::iota(det_order.begin(), det_order.end(), 0);
    std::stable_sort(det_order.begin(), det_order.end(), [&](int a, int b) {
        return dets[static_cast<size_t>(a)].score > dets[static_cast<size_t>(b)].score;
    });

    std::vector<char> gt_taken(gts.size(), 0);
    std::vector<char> gt_defined(gts.size(), 0);
    // OKS of every (det, gt) combination; nullopt rows are unlabeled GTs.
    std::vector<std::vector<std::optional<double>>> table(dets.size());
    for (size_t d = 0; d < dets.size(); ++d) {
        table[d].resize(gts.size());
        for (size_t g = 0; g < gts.size(); ++g)
            table[d][g] = oks(dets[d].keypoints, gts[g], params, indices);
    }
    for (size_t g = 0; g < gts.size(); ++g) {
        bool defined = false;
        for (int i : indices)
            if (gts[g].keypoints[static_cast<size_t>(i)].present()) { defined = true; break; }
        gt_defined[g] = defined ? 1 : 0;
        if (!defined) res.ignored_gts.push_back(static_cast<int>(g));
    }

    for (int d : det_order) {
        int best_gt = -1;
        double best = -1.0;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (gt_taken[g] || !gt_defined[g]) continue;
            const auto& val = table[static_cast<size_t>(d)][g];
            if (val && *val > best) {
                best = *val;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0 && best >= threshold) {
            gt_taken[static_cast<size_t>(best_gt)] = 1;
            res.pairs.push_back({d, best_gt, best});
        } else {
            res.unmatched_detections.push_back(d);
        }
    }
    std::sort(res.pairs.begin(), res.pairs.end(),
              [](const auto& a, const auto& b) { return a.detection < b.detection; });
    std::sort(res.unmatched_detections.begin(), res.unmatched_detections.end());
    for (size_t g = 0; g < gts.size(); ++g)
        if (gt_defined[g] && !gt_taken[g]) res.unmatched_gts.push_back(static_cast<int>(g));
    return res;
}

const std::vector<std::string>& visibility_categories() {
    static const std::vector<std::string> cats = {
        "whole-upper-body", "only-head",      "only-legs",
        "only-left-arm",    "only-right-arm", "only-both-arms",
        "arms-without-shoulders", "no-left-arm", "no-right-arm",
        "no-head",          "other",
    };
    return cats;
}

std::string categorize_visibility(const PersonAnnotation& ann, const KeypointLayout& layout) {
    const char* needed[] = {"l_shoulder", "r_shoulder", "l_elbow", "r_elbow",
                            "l_wrist",    "r_wrist",    "l_hip",   "r_hip",
                            "l_knee",     "r_knee",     "l_ankle", "r_ankle"};
    for (const char* j : needed)
        if (!layout.has_joint(j)) return "other";
    if (ann.keypoints.size() != static_cast<size_t>(layout.total)) return "other";

    auto vis = [&](int idx) { return ann.keypoints[static_cast<size_t>(idx)].present(); };
    bool head = false;
    for (int h : layout.head_indices)
        if (vis(h)) { head = true; break; }

    const bool ls = vis(layout.joint("l_shoulder")), rs = vis(layout.joint("r_shoulder"));
    const bool le = vis(layout.joint("l_elbow")), re = vis(layout.joint("r_elbow"));
    const bool lw = vis(layout.joint("l_wrist")), rw = vis(layout.joint("r_wrist"));
    bool legs = false;
    for (const char* j : {"l_hip", "r_hip", "l_knee", "r_knee", "l_ankle", "r_ankle"})
        if (vis(layout.joint(j))) { legs = true; break; }

    const bool left_full = ls && le && lw;
    const bool right_full = rs && re && rw;
    const bool any_left = ls || le || lw;
    const bool any_right = rs || re || rw;

    // Rule table, first match wins.
    if (head && left_full && right_full) return "whole-upper-body";
    if (head && !any_left && !any_right && !legs) return "only-head";
    if (legs && !head && !any_left && !any_right) return "only-legs";
    if (!head && !legs && any_left && !any_right) return "only-left-arm";
    if (!head && !legs && any_right && !any_left) return "only-right-arm";
    if (!head && !legs && left_full && right_full) return "only-both-arms";
    if (!head && !legs && le && lw && re && rw && !ls && !rs)
        return "arms-without-shoulders";
    if (head && right_full && !any_left) return "no-left-arm";
    if (head && left_full && !any_right) return "no-right-arm";
    if (!head && left_full && right_full) return "no-head";
    return "other";
}

namespace {

struct ImageBucket {
    std::vector<PersonAnnotation> gts;
    std::vector<DetectionRecord> dets;
    std::string category; // of the single GT person; "other" when ambiguous
};

GroupResult aggregate(const std::string& group, const OksParams& params,
                      const std::vector<std::vector<ThresholdCounts>>& per_image,
                      long long num_images, long long num_gt, long long num_det) {
    GroupResult r;
    r.group = group;
    r.num_images = num_images;
    r.num_gt = num_gt;
    r.num_detections = num_det;
    r.per_threshold.resize(params.thresholds.size());
    for (size_t t = 0; t < params.thresholds.size(); ++t) {
        r.per_threshold[t].threshold = params.thresholds[t];
        for (const auto& counts : per_image) {
            r.per_threshold[t].tp += counts[t].tp;
            r.per_threshold[t].fp += counts[t].fp;
            r.per_threshold[t].fn += counts[t].fn;
        }
    }
    r.no_detections = num_det == 0;
    r.empty_gt = num_gt == 0;
    double psum = 0.0, rsum = 0.0;
    for (const auto& tc : r.per_threshold) {
        psum += tc.precision();
        rsum += tc.recall();
        if (tc.threshold == 0.5) { r.p50 = tc.precision(); r.r50 = tc.recall(); }
        if (tc.threshold == 0.75) { r.p75 = tc.precision(); r.r75 = tc.recall(); }
    }
    r.ap = psum / static_cast<double>(r.per_threshold.size());
    r.ar = rsum / static_cast<double>(r.per_threshold.size());
    return r;
}

// COCO-style alternative: detections ranked by score across the whole set,
// precision envelope sampled at 101 recall points, averaged over thresholds.
double interpolated_average_precision(const std::vector<ImageBucket>& buckets,
                                      const OksParams& params,
                                      const std::vector<int>& indices) {
    struct Ranked {
        double score;
        size_t bucket;
        int det;
        bool operator<(const Ranked& o) const { return score > o.score; }
    };
    std::vector<Ranked> ranked;
    long long total_gt = 0;
    for (size_t b = 0; b < buckets.size(); ++b) {
        for (size_t d = 0; d < buckets[b].dets.size(); ++d)
            ranked.push_back({buckets[b].dets[d].score, b, static_cast<int>(d)});
        for (const auto& gt : buckets[b].gts)
            for (int i : indices)
                if (gt.keypoints[static_cast<size_t>(i)].present()) { ++total_gt; break; }
    }
    if (ranked.empty() || total_gt == 0) return 0.0;
    std::stable_sort(ranked.begin(), ranked.end());

    double ap_sum = 0.0;
    for (double tau : params.thresholds) {
        // TP flags per (bucket, det) at this threshold.
        std::vector<std::vector<char>> is_tp(buckets.size());
        for (size_t b = 0; b < buckets.size(); ++b) {
            is_tp[b].assign(buckets[b].dets.size(), 0);
            const MatchResult m =
                match_image(buckets[b].dets, buckets[b].gts, params, indices, tau);
            for (const auto& pr : m.pairs) is_tp[b][static_cast<size_t>(pr.detection)] = 1;
        }
        std::vector<double> precision(ranked.size()), recall(ranked.size());
        long long tp = 0;
        for (size_t i = 0; i < ranked.size(); ++i) {
            tp += is_tp[ranked[i].bucket][static_cast<size_t>(ranked[i].det)];
            precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
            recall[i] = static_cast<double>(tp) / static_cast<double>(total_gt);
        }
        for (size_t i = precision.size(); i-- > 1;)
            precision[i - 1] = std::max(precision[i - 1], precision[i]);
        double ap = 0.0;
        for (int ri = 0; ri <= 100; ++ri) {
            const double want = ri / 100.0;
            auto it = std::lower_bound(recall.begin(), recall.end(), want);
            if (it != recall.end())
                ap += precision[static_cast<size_t>(it - recall.begin())];
        }
        ap_sum += ap / 101.0;
    }
    return ap_sum / static_cast<double>(params.thresholds.size());
}

} // namespace

GroupResult evaluate(const Dataset& dataset, const std::vector<DetectionRecord>& dets,
                     const OksParams& params, const std::string& group,
                     const EvalOptions& opts) {
    if (!dataset.layout) throw ConfigError("evaluate: dataset has no layout");
    params.validate(*dataset.layout);
    const std::vector<int> indices = dataset.layout->indices_for(group);

    std::vector<ImageBucket> buckets(dataset.images.size());
    std::unordered_map<std::int64_t, size_t> index_of;
    for (size_t i = 0; i < dataset.images.size(); ++i) index_of[dataset.images[i].id] = i;
    for (const auto& ann : dataset.annotations)
        buckets[index_of.at(ann.image_id)].gts.push_back(ann);
    for (const auto& det : dets) {
        auto it = index_of.find(det.image_id);
        if (it == index_of.end())
            throw ReferentialError("detection references unknown image id " +
                                   std::to_string(det.image_id));
        buckets[it->second].dets.push_back(det);
    }
    for (auto& b : buckets) {
        b.category = b.gts.size() == 1 ? categorize_visibility(b.gts[0], *dataset.layout)
                                       : "other";
    }

    // Per-image counts at every threshold; reduction below is a plain sum,
    // so the outcome does not depend on the worker count.
    std::vector<std::vector<ThresholdCounts>> per_image(buckets.size());
    parallel_for(buckets.size(), opts.jobs, [&](size_t b) {
        auto& counts = per_image[b];
        counts.resize(params.thresholds.size());
        for (size_t t = 0; t < params.thresholds.size(); ++t) {
            const MatchResult m = match_image(buckets[b].dets, buckets[b].gts, params,
                                              indices, params.thresholds[t]);
            counts[t].threshold = params.thresholds[t];
            counts[t].tp = m.tp();
            counts[t].fp = m.fp();
            counts[t].fn = m.fn();
        }
    });

    long long num_gt = 0;
    for (const auto& b : buckets)
        for (const auto& gt : b.gts)
            for (int i : indices)
                if (gt.keypoints[static_cast<size_t>(i)].present()) { ++num_gt; break; }

    GroupResult result = aggregate(group, params, per_image,
                                   static_cast<long long>(dataset.images.size()), num_gt,
                                   static_cast<long long>(dets.size()));
    if (opts.interpolated_ap)
        result.interpolated_ap = interpolated_average_precision(buckets, params, indices);

    if (opts.by_category) {
        for (const std::string& cat : visibility_categories()) {
            std::vector<std::vector<ThresholdCounts>> cat_counts;
            long long cat_gt = 0, cat_det = 0, cat_images = 0;
            for (size_t b = 0; b < buckets.size(); ++b) {
                if (buckets[b].category != cat || buckets[b].gts.empty()) continue;
                ++cat_images;
                cat_counts.push_back(per_image[b]);
                cat_det += static_cast<long long>(buckets[b].dets.size());
                for (const auto& gt : buckets[b].gts)
                    for (int i : indices)
                        if (gt.keypoints[static_cast<size_t>(i)].present()) { ++cat_gt; break; }
            }
            if (cat_images == 0) continue;
            result.categories[cat] =
                aggregate(group, params, cat_counts, cat_images, cat_gt, cat_det);
        }
    }
    return result;
}

} // namespace proxpose
