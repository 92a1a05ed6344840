#include "proxpose/crop.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>

#include <json.hpp>

#include "proxpose/parallel.hpp"

namespace proxpose {

namespace {

PixelRect bbox_rect(const Bbox& bbox, int padding, int img_w, int img_h) {
    PixelRect r;
    r.x0 = std::max(0, static_cast<int>(std::floor(bbox.x)) - padding);
    r.y0 = std::max(0, static_cast<int>(std::floor(bbox.y)) - padding);
    r.x1 = std::min(img_w, static_cast<int>(std::ceil(bbox.x + bbox.w)) + padding);
    r.y1 = std::min(img_h, static_cast<int>(std::ceil(bbox.y + bbox.h)) + padding);
    return r;
}

ImageRgb8 extract(const ImageRgb8& image, const PixelRect& r) {
    ImageRgb8 out(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y) {
        const std::uint8_t* src = image.at(r.x0, r.y0 + y);
        std::memcpy(out.at(0, y), src, static_cast<size_t>(r.width()) * 3);
    }
    return out;
}

PersonAnnotation remap_annotation(const PersonAnnotation& ann, const PixelRect& r) {
    PersonAnnotation out;
    out.id = ann.id;
    out.image_id = ann.image_id;
    out.bbox = {0.0, 0.0, static_cast<double>(r.width()), static_cast<double>(r.height())};
    out.area = static_cast<double>(r.width()) * r.height();
    out.keypoints.reserve(ann.keypoints.size());
    for (const Keypoint& kp : ann.keypoints) {
        if (!kp.present()) {
            out.keypoints.push_back(Keypoint{});
            continue;
        }
        const double u = kp.u - r.x0;
        const double v = kp.v - r.y0;
        if (u < 0.0 || u >= r.width() || v < 0.0 || v >= r.height()) {
            out.keypoints.push_back(Keypoint{});
        } else {
            out.keypoints.push_back(Keypoint{u, v, kp.c});
        }
    }
    return out;
}

} // namespace

CropOutput crop_person(const ImageRgb8& image, const PersonAnnotation& ann,
                       const CropConfig& cfg) {
    cfg.validate();
    const PixelRect r = bbox_rect(ann.bbox, cfg.padding, image.width, image.height);
    if (r.empty())
        throw EmptyResultError("crop of annotation " + std::to_string(ann.id) +
                               " does not intersect the image");
    return CropOutput{extract(image, r), remap_annotation(ann, r), r};
}

std::pair<double, double> find_body_center(const PersonAnnotation& ann,
                                           const KeypointLayout& layout) {
    const auto body = layout.group_indices(Group::body);
    double su = 0.0, sv = 0.0;
    int n = 0;
    for (int i : body) {
        if (std::find(layout.head_indices.begin(), layout.head_indices.end(), i) !=
            layout.head_indices.end())
            continue;
        const Keypoint& kp = ann.keypoints[static_cast<size_t>(i)];
        if (!kp.present()) continue;
        su += kp.u;
        sv += kp.v;
        ++n;
    }
    if (n == 0)
        throw EmptyResultError("annotation " + std::to_string(ann.id) +
                               " has no labeled non-head body keypoint");
    return {su / n, sv / n};
}

std::optional<CropOutput> make_headless(const ImageRgb8& image, const PersonAnnotation& ann,
                                        const KeypointLayout& layout, const CropConfig& cfg) {
    cfg.validate();
    double hu_min = 0.0, hu_max = 0.0, hv_min = 0.0, hv_max = 0.0;
    double hu_sum = 0.0, hv_sum = 0.0;
    int head_n = 0;
    for (int i : layout.head_indices) {
        const Keypoint& kp = ann.keypoints[static_cast<size_t>(i)];
        if (!kp.present()) continue;
        if (head_n == 0) {
            hu_min = hu_max = kp.u;
            hv_min = hv_max = kp.v;
        } else {
            hu_min = std::min(hu_min, kp.u);
            hu_max = std::max(hu_max, kp.u);
            hv_min = std::min(hv_min, kp.v);
            hv_max = std::max(hv_max, kp.v);
        }
        hu_sum += kp.u;
        hv_sum += kp.v;
        ++head_n;
    }
    if (head_n == 0) return std::nullopt;

    std::pair<double, double> center;
    try {
        center = find_body_center(ann, layout);
    } catch (const EmptyResultError&) {
        return std::nullopt; // no body to keep, Basic only
    }
    const double dx = center.first - hu_sum / head_n;
    const double dy = center.second - hv_sum / head_n;

    PixelRect r = bbox_rect(ann.bbox, cfg.padding, image.width, image.height);
    if (std::abs(dy) >= std::abs(dx)) {
        // Vertical cut (ties resolved to vertical: people are mostly upright).
        if (dy >= 0.0)
            r.y0 = std::max(r.y0, static_cast<int>(std::llround(hv_max + cfg.head_margin)));
        else
            r.y1 = std::min(r.y1, static_cast<int>(std::llround(hv_min - cfg.head_margin)));
    } else {
        if (dx >= 0.0)
            r.x0 = std::max(r.x0, static_cast<int>(std::llround(hu_max + cfg.head_margin)));
        else
            r.x1 = std::min(r.x1, static_cast<int>(std::llround(hu_min - cfg.head_margin)));
    }
    if (r.empty())
        throw EmptyResultError("headless crop of annotation " + std::to_string(ann.id) +
                               " is empty");

    PersonAnnotation cut = ann;
    for (int i : layout.head_indices) cut.keypoints[static_cast<size_t>(i)] = Keypoint{};
    return CropOutput{extract(image, r), remap_annotation(cut, r), r};
}

ImageRgb8 DirectoryRasterSource::load(const ImageRecord& rec) const {
    const auto path = std::filesystem::path(dir_) / rec.file_name;
    return load_image(path.string());
}

const char* to_string(Subset s) { return s == Subset::basic ? "basic" : "headless"; }

namespace {

struct PersonOutcome {
    std::optional<CropOutput> basic;
    std::optional<CropOutput> headless;
    bool basic_rejected_area = false;
    bool headless_rejected_area = false;
    bool headless_no_head = false;
    bool headless_degenerate = false;
    bool unreadable = false;
};

std::string crop_file_name(std::int64_t id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06lld.png", static_cast<long long>(id));
    return buf;
}

} // namespace

GeneratedSubsets generate_subsets(const Dataset& dataset, const RasterSource& source,
                                  const CropConfig& cfg, unsigned jobs, const CropSink& sink) {
    cfg.validate();
    if (!dataset.layout) throw ConfigError("generate_subsets: dataset has no layout");

    // Stable processing order: by source image id, then annotation id.
    std::vector<const PersonAnnotation*> persons;
    persons.reserve(dataset.annotations.size());
    for (const auto& ann : dataset.annotations) persons.push_back(&ann);
    std::sort(persons.begin(), persons.end(), [](const auto* a, const auto* b) {
        return std::tie(a->image_id, a->id) < std::tie(b->image_id, b->id);
    });

    std::vector<PersonOutcome> outcomes(persons.size());
    parallel_for(persons.size(), jobs, [&](size_t i) {
        const PersonAnnotation& ann = *persons[i];
        PersonOutcome& out = outcomes[i];
        ImageRgb8 image;
        try {
            image = source.load(dataset.image_by_id(ann.image_id));
        } catch (const IoError&) {
            out.unreadable = true;
            return;
        }
        try {
            CropOutput basic = crop_person(image, ann, cfg);
            const double area = double(basic.rect.width()) * basic.rect.height();
            if (area < cfg.min_area)
                out.basic_rejected_area = true;
            else
                out.basic = std::move(basic);
        } catch (const EmptyResultError&) {
            out.basic_rejected_area = true; // degenerate counts as rejected
        }
        try {
            auto headless = make_headless(image, ann, *dataset.layout, cfg);
            if (!headless) {
                out.headless_no_head = true;
            } else {
                const double area = double(headless->rect.width()) * headless->rect.height();
                if (area < cfg.min_area)
                    out.headless_rejected_area = true;
                else
                    out.headless = std::move(*headless);
            }
        } catch (const EmptyResultError&) {
            out.headless_degenerate = true;
        }
    });

    GeneratedSubsets result;
    result.basic.dataset.layout = dataset.layout;
    result.headless.dataset.layout = dataset.layout;
    result.report.persons_total = static_cast<long long>(persons.size());

    auto emit = [&](Subset subset, SubsetData& data, CropOutput&& crop,
                    const PersonAnnotation& src) {
        const std::int64_t fresh = static_cast<std::int64_t>(data.dataset.images.size()) + 1;
        ImageRecord rec;
        rec.id = fresh;
        rec.width = crop.image.width;
        rec.height = crop.image.height;
        rec.file_name = crop_file_name(fresh);
        crop.annotation.id = fresh;
        crop.annotation.image_id = fresh;
        data.dataset.images.push_back(rec);
        data.dataset.annotations.push_back(std::move(crop.annotation));
        data.provenance.push_back({fresh, src.image_id, src.id});
        if (sink) sink(subset, rec, crop.image);
    };

    for (size_t i = 0; i < persons.size(); ++i) {
        PersonOutcome& out = outcomes[i];
        if (out.unreadable) {
            ++result.report.unreadable_images;
            continue;
        }
        if (out.basic) {
            emit(Subset::basic, result.basic, std::move(*out.basic), *persons[i]);
            ++result.report.basic_accepted;
        } else if (out.basic_rejected_area) {
            ++result.report.basic_rejected_area;
        }
        if (out.headless) {
            emit(Subset::headless, result.headless, std::move(*out.headless), *persons[i]);
            ++result.report.headless_accepted;
        } else if (out.headless_rejected_area) {
            ++result.report.headless_rejected_area;
        } else if (out.headless_no_head) {
            ++result.report.headless_skipped_no_head;
        } else if (out.headless_degenerate) {
            ++result.report.headless_degenerate;
        }
    }
    return result;
}

std::string write_provenance(const SubsetData& subset) {
    nlohmann::json j;
    j["schema_version"] = 1;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : subset.provenance) {
        entries.push_back({{"image_id", e.image_id},
                           {"source_image_id", e.source_image_id},
                           {"source_annotation_id", e.source_annotation_id}});
    }
    j["entries"] = std::move(entries);
    return j.dump();
}

} // namespace proxpose
