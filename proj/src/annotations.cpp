#include "proxpose/annotations.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace proxpose {

namespace {

long long offset_of(const json::parse_error& e) {
    return e.byte > 0 ? static_cast<long long>(e.byte) : -1;
}

double require_number(const json& j, const char* what) {
    if (!j.is_number())
        throw ParseError(std::string(what) + " is not a number");
    return j.get<double>();
}

std::int64_t require_int(const json& j, const char* what) {
    if (!j.is_number_integer())
        throw ParseError(std::string(what) + " is not an integer");
    return j.get<std::int64_t>();
}

std::vector<Keypoint> parse_flat_keypoints(const json& arr, const KeypointLayout& layout,
                                           const std::string& where) {
    if (!arr.is_array())
        throw ParseError(where + ": 'keypoints' is not an array");
    if (arr.size() != static_cast<size_t>(3 * layout.total))
        throw LayoutError(where + ": keypoint array has " + std::to_string(arr.size()) +
                          " values, layout '" + layout.name + "' requires " +
                          std::to_string(3 * layout.total));
    std::vector<Keypoint> kps(static_cast<size_t>(layout.total));
    for (int i = 0; i < layout.total; ++i) {
        kps[i].u = require_number(arr[3 * i + 0], (where + ": keypoint u").c_str());
        kps[i].v = require_number(arr[3 * i + 1], (where + ": keypoint v").c_str());
        kps[i].c = require_number(arr[3 * i + 2], (where + ": keypoint value").c_str());
        if (!std::isfinite(kps[i].u) || !std::isfinite(kps[i].v) || !std::isfinite(kps[i].c))
            throw ParseError(where + ": non-finite keypoint value");
    }
    return kps;
}

json flat_keypoints(const std::vector<Keypoint>& kps) {
    json arr = json::array();
    for (const auto& k : kps) {
        arr.push_back(k.u);
        arr.push_back(k.v);
        arr.push_back(k.c);
    }
    return arr;
}

// Copies the fields of src not consumed by the parser.
json collect_extra(const json& src, std::initializer_list<const char*> known) {
    json extra = json::object();
    for (auto it = src.begin(); it != src.end(); ++it) {
        bool is_known = false;
        for (const char* k : known)
            if (it.key() == k) { is_known = true; break; }
        if (!is_known) extra[it.key()] = it.value();
    }
    return extra;
}

} // namespace

int PersonAnnotation::visible_count() const {
    int n = 0;
    for (const auto& k : keypoints)
        if (k.present()) ++n;
    return n;
}

const ImageRecord& Dataset::image_by_id(std::int64_t id) const {
    for (const auto& im : images)
        if (im.id == id) return im;
    throw ReferentialError("image id " + std::to_string(id) + " not in dataset");
}

Dataset parse_dataset(const std::string& document, const KeypointLayout& layout) {
    json root;
    try {
        root = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("annotation document: ") + e.what(), offset_of(e));
    }
    if (!root.is_object())
        throw ParseError("annotation document: top level is not an object");

    Dataset ds;
    ds.layout = &layout;
    ds.extra = collect_extra(root, {"images", "annotations"});

    try {
        std::unordered_map<std::int64_t, size_t> image_index;
        if (root.contains("images")) {
            const json& images = root["images"];
            if (!images.is_array()) throw ParseError("'images' is not an array");
            ds.images.reserve(images.size());
            for (const json& jim : images) {
                ImageRecord rec;
                rec.id = require_int(jim.at("id"), "image id");
                rec.width = static_cast<int>(require_int(jim.at("width"), "image width"));
                rec.height = static_cast<int>(require_int(jim.at("height"), "image height"));
                rec.file_name = jim.at("file_name").get<std::string>();
                if (rec.width < 1 || rec.height < 1)
                    throw ParseError("image " + std::to_string(rec.id) +
                                     ": non-positive dimensions");
                rec.extra = collect_extra(jim, {"id", "width", "height", "file_name"});
                if (image_index.count(rec.id))
                    throw ParseError("duplicate image id " + std::to_string(rec.id));
                image_index[rec.id] = ds.images.size();
                ds.images.push_back(std::move(rec));
            }
        }
        if (root.contains("annotations")) {
            const json& anns = root["annotations"];
            if (!anns.is_array()) throw ParseError("'annotations' is not an array");
            ds.annotations.reserve(anns.size());
            for (const json& ja : anns) {
                PersonAnnotation ann;
                ann.id = require_int(ja.at("id"), "annotation id");
                ann.image_id = require_int(ja.at("image_id"), "annotation image_id");
                const std::string where = "annotation " + std::to_string(ann.id);

                auto img_it = image_index.find(ann.image_id);
                if (img_it == image_index.end())
                    throw ReferentialError(where + ": dangling image_id " +
                                           std::to_string(ann.image_id));
                const ImageRecord& img = ds.images[img_it->second];

                const json& jb = ja.at("bbox");
                if (!jb.is_array() || jb.size() != 4)
                    throw ParseError(where + ": bbox is not a 4-array");
                ann.bbox = {require_number(jb[0], "bbox x"), require_number(jb[1], "bbox y"),
                            require_number(jb[2], "bbox w"), require_number(jb[3], "bbox h")};
                if (!(ann.bbox.w > 0.0) || !(ann.bbox.h > 0.0))
                    throw ParseError(where + ": bbox has non-positive extent");

                ann.keypoints = parse_flat_keypoints(ja.at("keypoints"), layout, where);
                for (auto& k : ann.keypoints) {
                    double flag = k.c;
                    if (flag != 0.0 && flag != 1.0 && flag != 2.0)
                        throw ParseError(where + ": visibility flag not in {0,1,2}");
                    // Normalization: a labeled keypoint outside the image is
                    // demoted to absent so the bounds invariant holds.
                    if (k.present() &&
                        (k.u < 0.0 || k.u >= img.width || k.v < 0.0 || k.v >= img.height)) {
                        k = Keypoint{};
                    }
                }
                if (ja.contains("area")) {
                    double a = require_number(ja["area"], "area");
                    if (a > 0.0) ann.area = a;
                }
                ann.extra = collect_extra(ja, {"id", "image_id", "bbox", "keypoints", "area"});
                ds.annotations.push_back(std::move(ann));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("annotation document: ") + e.what());
    }
    return ds;
}

std::string write_dataset(const Dataset& ds) {
    json root = ds.extra;
    json images = json::array();
    for (const auto& im : ds.images) {
        json j = im.extra;
        j["id"] = im.id;
        j["width"] = im.width;
        j["height"] = im.height;
        j["file_name"] = im.file_name;
        images.push_back(std::move(j));
    }
    json anns = json::array();
    for (const auto& a : ds.annotations) {
        json j = a.extra;
        j["id"] = a.id;
        j["image_id"] = a.image_id;
        j["bbox"] = {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h};
        j["keypoints"] = flat_keypoints(a.keypoints);
        if (a.area) j["area"] = *a.area;
        anns.push_back(std::move(j));
    }
    root["images"] = std::move(images);
    root["annotations"] = std::move(anns);
    return root.dump();
}

std::vector<DetectionRecord> parse_detections(const std::string& document,
                                              const KeypointLayout& layout) {
    json root;
    try {
        root = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("results document: ") + e.what(), offset_of(e));
    }
    if (!root.is_array())
        throw ParseError("results document: top level is not an array");

    std::vector<DetectionRecord> out;
    out.reserve(root.size());
    try {
        size_t n = 0;
        for (const json& jr : root) {
            DetectionRecord rec;
            rec.image_id = require_int(jr.at("image_id"), "result image_id");
            const std::string where = "result " + std::to_string(n++);
            rec.keypoints = parse_flat_keypoints(jr.at("keypoints"), layout, where);
            for (const auto& k : rec.keypoints)
                if (k.c < 0.0)
                    throw ParseError(where + ": negative keypoint confidence");
            rec.score = require_number(jr.at("score"), "result score");
            if (!(rec.score >= 0.0) || !(rec.score <= 1.0))
                throw ParseError(where + ": score outside [0,1]");
            rec.extra = collect_extra(jr, {"image_id", "keypoints", "score"});
            out.push_back(std::move(rec));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("results document: ") + e.what());
    }
    return out;
}

std::string write_detections(const std::vector<DetectionRecord>& dets) {
    json root = json::array();
    for (const auto& d : dets) {
        json j = d.extra;
        j["image_id"] = d.image_id;
        j["keypoints"] = flat_keypoints(d.keypoints);
        j["score"] = d.score;
        root.push_back(std::move(j));
    }
    return root.dump();
}

std::vector<Keypoint> group_slice(const std::vector<Keypoint>& keypoints,
                                  const KeypointLayout& layout, Group group) {
    if (keypoints.size() != static_cast<size_t>(layout.total))
        throw LayoutError("keypoint array size does not match layout '" + layout.name + "'");
    std::vector<Keypoint> out;
    for (int i : layout.group_indices(group)) out.push_back(keypoints[static_cast<size_t>(i)]);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure on '" + path + "'");
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure on '" + path + "'");
}

Dataset load_dataset(const std::string& path, const KeypointLayout& layout) {
    return parse_dataset(read_file(path), layout);
}

void save_dataset(const Dataset& ds, const std::string& path) {
    write_file(path, write_dataset(ds));
}

std::vector<DetectionRecord> load_detections(const std::string& path,
                                             const KeypointLayout& layout) {
    return parse_detections(read_file(path), layout);
}

} // namespace proxpose
