#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxpose/layout.hpp"

namespace proxpose {

using json = nlohmann::json;

// One keypoint: pixel position + confidence. For ground truth c is the
// visibility flag {0 absent, 1 occluded, 2 visible}; for detections it is
// a confidence in [0, 1]. A keypoint counts as present when c > 0.
struct Keypoint {
    double u = 0.0;
    double v = 0.0;
    double c = 0.0;

    bool present() const { return c > 0.0; }
    bool operator==(const Keypoint&) const = default;
};

struct Bbox {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
    bool operator==(const Bbox&) const = default;
};

struct ImageRecord {
    std::int64_t id = 0;
    int width = 0;
    int height = 0;
    std::string file_name;
    json extra = json::object(); // unknown fields, preserved on round trip

    bool operator==(const ImageRecord& o) const {
        return id == o.id && width == o.width && height == o.height &&
               file_name == o.file_name && extra == o.extra;
    }
};

struct PersonAnnotation {
    std::int64_t id = 0;
    std::int64_t image_id = 0;
    Bbox bbox;
    std::vector<Keypoint> keypoints;
    std::optional<double> area; // pixels²; falls back to bbox area when absent
    json extra = json::object();

    int visible_count() const;
    bool operator==(const PersonAnnotation& o) const {
        return id == o.id && image_id == o.image_id && bbox == o.bbox &&
               keypoints == o.keypoints && area == o.area && extra == o.extra;
    }
};

struct Dataset {
    std::vector<ImageRecord> images;
    std::vector<PersonAnnotation> annotations;
    const KeypointLayout* layout = nullptr;
    json extra = json::object();

    const ImageRecord& image_by_id(std::int64_t id) const; // throws ReferentialError
};

struct DetectionRecord {
    std::int64_t image_id = 0;
    std::vector<Keypoint> keypoints;
    double score = 0.0; // overall person confidence in [0, 1]
    json extra = json::object();

    bool operator==(const DetectionRecord& o) const {
        return image_id == o.image_id && keypoints == o.keypoints &&
               score == o.score && extra == o.extra;
    }
};

// Parses a COCO-style keypoint annotation document (flat [u,v,vis] triplets).
// Validation enforces the layout size, referential integrity of image ids,
// positive bbox extents and the visibility convention; visible keypoints
// outside the image bounds are normalized to visibility 0.
// Throws ParseError / ReferentialError / LayoutError.
Dataset parse_dataset(const std::string& document, const KeypointLayout& layout);
Dataset load_dataset(const std::string& path, const KeypointLayout& layout);

// Serializes back to the same schema. parse(write(d)) is field-identical
// to d; coordinates use shortest round-trip decimal form.
std::string write_dataset(const Dataset& ds);
void save_dataset(const Dataset& ds, const std::string& path);

// COCO results format: array of {image_id, category_id, keypoints, score}.
std::vector<DetectionRecord> parse_detections(const std::string& document,
                                              const KeypointLayout& layout);
std::vector<DetectionRecord> load_detections(const std::string& path,
                                             const KeypointLayout& layout);
std::string write_detections(const std::vector<DetectionRecord>& dets);

// The keypoints of one group, layout order preserved.
// Throws ConfigError when the layout lacks the group.
std::vector<Keypoint> group_slice(const std::vector<Keypoint>& keypoints,
                                  const KeypointLayout& layout, Group group);

// File helpers shared across modules.
std::string read_file(const std::string& path);           // throws IoError
void write_file(const std::string& path, const std::string& bytes);

} // namespace proxpose
