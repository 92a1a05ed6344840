#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proxpose/annotations.hpp"
#include "proxpose/layout.hpp"
#include "proxpose/raster.hpp"

namespace proxpose {

struct CropConfig {
    double min_area = 20000.0; // pixels²; crops below this are dropped
    double head_margin = 0.0;  // extra pixels clipped past the head extent
    int padding = 0;           // pixels added around the person bbox

    void validate() const {
        if (min_area < 0.0 || head_margin < 0.0 || padding < 0)
            throw ConfigError("crop config: negative parameter");
    }
};

// Integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool empty() const { return x1 <= x0 || y1 <= y0; }
};

struct CropOutput {
    ImageRgb8 image;
    PersonAnnotation annotation; // bbox spans the whole crop, keypoints remapped
    PixelRect rect;              // source-image region the crop was taken from
};

// Cuts the person bbox (expanded by padding, clipped to the image) out of
// the source raster and translates the keypoints; labeled keypoints falling
// outside the crop become (0,0,0). Throws EmptyResultError when the bbox
// does not intersect the image.
CropOutput crop_person(const ImageRgb8& image, const PersonAnnotation& ann,
                       const CropConfig& cfg);

// Mean position of the labeled non-head body keypoints.
// Throws EmptyResultError when no keypoint qualifies.
std::pair<double, double> find_body_center(const PersonAnnotation& ann,
                                           const KeypointLayout& layout);

// Person crop with the head side clipped off: the cut runs along the
// head-extent edge nearest the body (dominant axis of head-centroid ->
// body-center), offset by head_margin; head keypoints are zeroed. Returns
// nullopt when the person has no labeled head keypoints or no body center
// (emitted to Basic only). Throws EmptyResultError when the remaining crop
// is empty.
std::optional<CropOutput> make_headless(const ImageRgb8& image, const PersonAnnotation& ann,
                                        const KeypointLayout& layout, const CropConfig& cfg);

// Source of image pixels for a dataset; implementations must be safe for
// concurrent load() calls.
class RasterSource {
public:
    virtual ~RasterSource() = default;
    virtual ImageRgb8 load(const ImageRecord& rec) const = 0; // throws IoError
};

class DirectoryRasterSource final : public RasterSource {
public:
    explicit DirectoryRasterSource(std::string dir) : dir_(std::move(dir)) {}
    ImageRgb8 load(const ImageRecord& rec) const override;

private:
    std::string dir_;
};

enum class Subset { basic, headless };
const char* to_string(Subset s);

struct ProvenanceEntry {
    std::int64_t image_id = 0; // fresh id in the generated subset
    std::int64_t source_image_id = 0;
    std::int64_t source_annotation_id = 0;
};

struct SubsetData {
    Dataset dataset;
    std::vector<ProvenanceEntry> provenance;
};

struct CropReport {
    long long persons_total = 0;
    long long basic_accepted = 0;
    long long basic_rejected_area = 0;
    long long headless_accepted = 0;
    long long headless_rejected_area = 0;
    long long headless_skipped_no_head = 0;
    long long headless_degenerate = 0;
    long long unreadable_images = 0;
};

struct GeneratedSubsets {
    SubsetData basic;
    SubsetData headless;
    CropReport report;
};

// Receives each accepted crop in deterministic order (sorted by source
// image id, then annotation id), after ids are assigned.
using CropSink =
    std::function<void(Subset, const ImageRecord&, const ImageRgb8&)>;

// Runs crop_person and make_headless over every annotated person, drops
// crops below cfg.min_area, and assembles two self-contained datasets with
// fresh sequential ids and provenance back to the source. Unreadable images
// are skipped and counted. Output is identical for any worker count.
GeneratedSubsets generate_subsets(const Dataset& dataset, const RasterSource& source,
                                  const CropConfig& cfg, unsigned jobs = 1,
                                  const CropSink& sink = nullptr);

std::string write_provenance(const SubsetData& subset);

} // namespace proxpose
