#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

#include "smallobj/errors.hpp"
#include "smallobj/mask.hpp"

namespace smallobj {

class CocoError : public Error {
public:
    using Error::Error;
};

class MalformedJson : public CocoError {
public:
    using CocoError::CocoError;
};

class MissingField : public CocoError {
public:
    using CocoError::CocoError;
};

class DanglingReference : public CocoError {
public:
    using CocoError::CocoError;
};

struct ImageRecord {
    std::int64_t id = 0;
    int width = 0, height = 0;
    std::string file_name;
    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Box {
    double x = 0, y = 0, w = 0, h = 0;
    friend bool operator==(const Box&, const Box&) = default;
};

/// COCO RLE payload. `compressed` records whether the source used the char
/// counts string, so saving preserves the wire form.
struct RleSegmentation {
    RunLengthCounts counts;
    bool compressed = true;
    friend bool operator==(const RleSegmentation&, const RleSegmentation&) = default;
};

using Segmentation = std::variant<PolygonSet, RleSegmentation>;

struct AnnotationRecord {
    std::int64_t id = 0;
    std::int64_t image_id = 0;
    int category_id = 0;
    Box bbox;
    double area = 0;
    Segmentation segmentation = PolygonSet{};
    bool iscrowd = false;
    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

struct Category {
    int id = 0;
    std::string name;
    friend bool operator==(const Category&, const Category&) = default;
};

enum class SizeClass { small = 0, medium = 1, large = 2 };
enum class SizeBasis { mask_area, bbox_area };

inline constexpr double kSmallAreaMax = 32.0 * 32.0;
inline constexpr double kMediumAreaMax = 96.0 * 96.0;

inline const char* size_class_name(SizeClass c) {
    switch (c) {
        case SizeClass::small: return "small";
        case SizeClass::medium: return "medium";
        default: return "large";
    }
}

/// Class intervals are [0, 32^2), [32^2, 96^2), [96^2, inf) -- lower bound
/// inclusive, upper exclusive, as in the COCO evaluator.
inline SizeClass classify_area(double area) {
    if (area < kSmallAreaMax) return SizeClass::small;
    if (area < kMediumAreaMax) return SizeClass::medium;
    return SizeClass::large;
}

inline SizeClass classify_size(const AnnotationRecord& a, SizeBasis basis) {
    const double area =
        basis == SizeBasis::mask_area ? a.area : a.bbox.w * a.bbox.h;
    return classify_area(area);
}

/// In-memory COCO dataset. Treated as immutable once indexed; pipelines that
/// change it build a new descriptor instead.
class Dataset {
public:
    std::vector<ImageRecord> images;
    std::vector<AnnotationRecord> annotations;
    std::vector<Category> categories;

    void rebuild_index() {
        image_by_id_.clear();
        anns_by_image_.clear();
        category_ids_.clear();
        image_by_id_.reserve(images.size());
        for (std::size_t i = 0; i < images.size(); ++i)
            image_by_id_.emplace(images[i].id, i);
        for (std::size_t i = 0; i < annotations.size(); ++i)
            anns_by_image_[annotations[i].image_id].push_back(i);
        for (const auto& c : categories) category_ids_.insert(c.id);
    }

    const ImageRecord* find_image(std::int64_t id) const {
        const auto it = image_by_id_.find(id);
        return it == image_by_id_.end() ? nullptr : &images[it->second];
    }

    const std::vector<std::size_t>& annotations_of(std::int64_t image_id) const {
        static const std::vector<std::size_t> empty;
        const auto it = anns_by_image_.find(image_id);
        return it == anns_by_image_.end() ? empty : it->second;
    }

    bool has_category(int id) const { return category_ids_.count(id) != 0; }

    std::int64_t max_annotation_id() const {
        std::int64_t m = 0;
        for (const auto& a : annotations) m = std::max(m, a.id);
        return m;
    }

    std::int64_t max_image_id() const {
        std::int64_t m = 0;
        for (const auto& im : images) m = std::max(m, im.id);
        return m;
    }

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.images == b.images && a.annotations == b.annotations &&
               a.categories == b.categories;
    }

private:
    std::unordered_map<std::int64_t, std::size_t> image_by_id_;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> anns_by_image_;
    std::unordered_set<int> category_ids_;
};

struct LoadReport {
    std::vector<std::string> warnings;
    std::size_t dropped_annotations = 0;
};

namespace detail {

/// SAX builder for the COCO annotation layout. Only `images`, `annotations`
/// and `categories` are materialized; everything else (info, licenses,
/// unknown keys) is skipped without building a DOM, which keeps peak memory
/// close to the size of the final descriptor.
class CocoSaxHandler : public nlohmann::json_sax<nlohmann::json> {
public:
    CocoSaxHandler(Dataset& out, LoadReport& report) : out_(out), report_(report) {}

    bool null() override { return true; }
    bool boolean(bool v) override {
        if (state() == S::ann && key_ == "iscrowd") ann_.rec.iscrowd = v;
        return true;
    }
    bool number_integer(number_integer_t v) override { return on_number(static_cast<double>(v)); }
    bool number_unsigned(number_unsigned_t v) override { return on_number(static_cast<double>(v)); }
    bool number_float(number_float_t v, const string_t&) override { return on_number(v); }

    bool string(string_t& v) override {
        switch (state()) {
            case S::image:
                if (key_ == "file_name") {
                    img_.rec.file_name = v;
                    img_.has_file_name = true;
                }
                break;
            case S::cat:
                if (key_ == "name") {
                    cat_.rec.name = v;
                    cat_.has_name = true;
                }
                break;
            case S::seg_obj:
                if (key_ == "counts") {
                    ann_.rle_string = v;
                    ann_.counts_is_string = true;
                }
                break;
            default:
                break;
        }
        return true;
    }

    bool binary(binary_t&) override { return true; }

    bool start_object(std::size_t) override {
        switch (state()) {
            case S::start: stack_.back() = S::top; break;
            case S::top: push(S::skip); break;
            case S::images_arr: img_ = {}; push(S::image); break;
            case S::anns_arr: ann_ = {}; push(S::ann); break;
            case S::cats_arr: cat_ = {}; push(S::cat); break;
            case S::ann:
                if (key_ == "segmentation") {
                    ann_.seg_is_rle = true;
                    push(S::seg_obj);
                } else {
                    push(S::skip);
                }
                break;
            case S::image:
            case S::cat:
            case S::seg_obj:
            case S::skip: push(S::skip); break;
            default:
                throw MalformedJson("unexpected object in COCO annotation layout");
        }
        return true;
    }

    bool key(string_t& v) override {
        key_ = v;
        return true;
    }

    bool end_object() override {
        switch (state()) {
            case S::image: finish_image(); break;
            case S::ann: finish_annotation(); break;
            case S::cat: finish_category(); break;
            case S::seg_obj:
            case S::skip: break;
            case S::top: stack_.back() = S::done; return true;
            default:
                throw MalformedJson("unbalanced object in COCO annotation layout");
        }
        pop();
        return true;
    }

    bool start_array(std::size_t) override {
        switch (state()) {
            case S::start:
                throw MalformedJson("top-level JSON value must be an object");
            case S::top:
                if (key_ == "images") push(S::images_arr);
                else if (key_ == "annotations") push(S::anns_arr);
                else if (key_ == "categories") push(S::cats_arr);
                else push(S::skip);
                break;
            case S::ann:
                if (key_ == "bbox") push(S::ann_bbox);
                else if (key_ == "segmentation") push(S::seg_poly_list);
                else push(S::skip);
                break;
            case S::seg_poly_list: ann_.cur_poly.clear(); push(S::seg_poly); break;
            case S::seg_obj:
                if (key_ == "size") push(S::seg_size);
                else if (key_ == "counts") { ann_.counts_is_string = false; push(S::seg_counts); }
                else push(S::skip);
                break;
            case S::image:
            case S::cat:
            case S::skip: push(S::skip); break;
            default:
                throw MalformedJson("unexpected array in COCO annotation layout");
        }
        return true;
    }

    bool end_array() override {
        switch (state()) {
            case S::images_arr:
            case S::anns_arr:
            case S::cats_arr:
            case S::seg_poly_list:
            case S::seg_size:
            case S::seg_counts:
            case S::skip: break;
            case S::ann_bbox:
                if (ann_.bbox_vals.size() != 4)
                    throw MalformedJson("annotation record #" +
                                        std::to_string(out_.annotations.size()) +
                                        ": bbox must have 4 entries");
                break;
            case S::seg_poly:
                ann_.polys.push_back(std::move(ann_.cur_poly));
                ann_.cur_poly.clear();
                break;
            default:
                throw MalformedJson("unbalanced array in COCO annotation layout");
        }
        pop();
        return true;
    }

    bool parse_error(std::size_t position, const std::string&,
                     const nlohmann::detail::exception& ex) override {
        throw MalformedJson("JSON parse error at byte " + std::to_string(position) +
                            ": " + ex.what());
    }

private:
    enum class S {
        start, top, done,
        images_arr, image,
        anns_arr, ann, ann_bbox,
        seg_poly_list, seg_poly, seg_obj, seg_size, seg_counts,
        cats_arr, cat,
        skip,
    };

    struct PendingImage {
        ImageRecord rec;
        bool has_id = false, has_width = false, has_height = false,
             has_file_name = false;
    };
    struct PendingAnn {
        AnnotationRecord rec;
        bool has_id = false, has_image_id = false, has_category = false,
             has_area = false;
        std::vector<double> bbox_vals;
        PolygonSet polys;
        std::vector<double> cur_poly;
        bool seg_is_rle = false;
        std::vector<long long> rle_size;
        std::vector<std::uint32_t> rle_counts;
        std::string rle_string;
        bool counts_is_string = false;
    };
    struct PendingCat {
        Category rec;
        bool has_id = false, has_name = false;
    };

    S state() const { return stack_.back(); }
    void push(S s) { stack_.push_back(s); }
    void pop() { stack_.pop_back(); }

    bool on_number(double v) {
        switch (state()) {
            case S::image:
                if (key_ == "id") { img_.rec.id = static_cast<std::int64_t>(v); img_.has_id = true; }
                else if (key_ == "width") { img_.rec.width = static_cast<int>(v); img_.has_width = true; }
                else if (key_ == "height") { img_.rec.height = static_cast<int>(v); img_.has_height = true; }
                break;
            case S::ann:
                if (key_ == "id") { ann_.rec.id = static_cast<std::int64_t>(v); ann_.has_id = true; }
                else if (key_ == "image_id") { ann_.rec.image_id = static_cast<std::int64_t>(v); ann_.has_image_id = true; }
                else if (key_ == "category_id") { ann_.rec.category_id = static_cast<int>(v); ann_.has_category = true; }
                else if (key_ == "area") { ann_.rec.area = v; ann_.has_area = true; }
                else if (key_ == "iscrowd") { ann_.rec.iscrowd = v != 0; }
                break;
            case S::ann_bbox: ann_.bbox_vals.push_back(v); break;
            case S::seg_poly: ann_.cur_poly.push_back(v); break;
            case S::seg_size: ann_.rle_size.push_back(static_cast<long long>(v)); break;
            case S::seg_counts: ann_.rle_counts.push_back(static_cast<std::uint32_t>(v)); break;
            case S::cat:
                if (key_ == "id") { cat_.rec.id = static_cast<int>(v); cat_.has_id = true; }
                break;
            default:
                break;
        }
        return true;
    }

    [[noreturn]] void missing(const char* what, const char* field, std::size_t index) {
        throw MissingField(std::string(what) + " record #" + std::to_string(index) +
                           ": missing field '" + field + "'");
    }

    void finish_image() {
        const std::size_t idx = out_.images.size();
        if (!img_.has_id) missing("image", "id", idx);
        if (!img_.has_width) missing("image", "width", idx);
        if (!img_.has_height) missing("image", "height", idx);
        if (!img_.has_file_name) missing("image", "file_name", idx);
        if (img_.rec.width <= 0 || img_.rec.height <= 0)
            throw CocoError("image " + std::to_string(img_.rec.id) +
                            ": non-positive dimensions");
        out_.images.push_back(std::move(img_.rec));
    }

    void finish_annotation() {
        const std::size_t idx = out_.annotations.size();
        if (!ann_.has_id) missing("annotation", "id", idx);
        if (!ann_.has_image_id) missing("annotation", "image_id", idx);
        if (!ann_.has_category) missing("annotation", "category_id", idx);
        if (ann_.bbox_vals.size() != 4) missing("annotation", "bbox", idx);
        if (!ann_.has_area) missing("annotation", "area", idx);
        ann_.rec.bbox = {ann_.bbox_vals[0], ann_.bbox_vals[1], ann_.bbox_vals[2],
                         ann_.bbox_vals[3]};
        const std::string ann_label = "annotation " + std::to_string(ann_.rec.id);
        if (ann_.seg_is_rle) {
            if (ann_.rle_size.size() != 2)
                throw CocoError(ann_label + ": RLE size must be [height, width]");
            RunLengthCounts counts;
            counts.height = static_cast<int>(ann_.rle_size[0]);
            counts.width = static_cast<int>(ann_.rle_size[1]);
            if (ann_.counts_is_string) {
                try {
                    counts = rle_from_string(ann_.rle_string, counts.height, counts.width);
                } catch (const MaskError& e) {
                    throw CocoError(ann_label + ": " + e.what());
                }
            } else {
                counts.counts = std::move(ann_.rle_counts);
            }
            std::size_t sum = 0;
            for (const std::uint32_t c : counts.counts) sum += c;
            if (sum != static_cast<std::size_t>(counts.height) * counts.width)
                throw CocoError(ann_label + ": RLE run lengths do not sum to height*width");
            ann_.rec.segmentation = RleSegmentation{std::move(counts), ann_.counts_is_string};
        } else {
            PolygonSet kept;
            for (auto& poly : ann_.polys) {
                if (poly.size() < 6 || poly.size() % 2 != 0) {
                    report_.warnings.push_back(ann_label +
                                               ": dropped degenerate polygon part");
                    continue;
                }
                bool finite = true;
                for (double& c : poly) {
                    if (!std::isfinite(c)) { finite = false; break; }
                    if (c < 0.0) c = 0.0;
                }
                if (!finite) {
                    report_.warnings.push_back(ann_label +
                                               ": dropped polygon with non-finite coordinates");
                    continue;
                }
                kept.push_back(std::move(poly));
            }
            ann_.rec.segmentation = std::move(kept);
        }
        out_.annotations.push_back(std::move(ann_.rec));
    }

    void finish_category() {
        const std::size_t idx = out_.categories.size();
        if (!cat_.has_id) missing("category", "id", idx);
        if (!cat_.has_name) missing("category", "name", idx);
        out_.categories.push_back(std::move(cat_.rec));
    }

    Dataset& out_;
    LoadReport& report_;
    std::vector<S> stack_{S::start};
    std::string key_;
    PendingImage img_;
    PendingAnn ann_;
    PendingCat cat_;
};

}  // namespace detail

/// Loads and indexes a COCO annotation file. Out-of-bounds bboxes are clamped
/// to the image with a warning; annotations whose bbox degenerates to zero
/// width/height (or with non-positive area) are dropped with a warning.
/// Duplicate ids and dangling references are hard errors.
inline Dataset load_dataset(const std::filesystem::path& path,
                            LoadReport* report = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Dataset d;
    LoadReport local;
    LoadReport& rep = report ? *report : local;
    detail::CocoSaxHandler handler(d, rep);
    nlohmann::json::sax_parse(in, &handler);

    std::unordered_set<std::int64_t> image_ids;
    image_ids.reserve(d.images.size());
    for (const auto& im : d.images)
        if (!image_ids.insert(im.id).second)
            throw CocoError("duplicate image id " + std::to_string(im.id));
    std::unordered_set<int> cat_ids;
    for (const auto& c : d.categories)
        if (!cat_ids.insert(c.id).second)
            throw CocoError("duplicate category id " + std::to_string(c.id));

    d.rebuild_index();
    std::unordered_set<std::int64_t> ann_ids;
    ann_ids.reserve(d.annotations.size());
    std::vector<AnnotationRecord> kept;
    kept.reserve(d.annotations.size());
    for (auto& a : d.annotations) {
        const std::string label = "annotation " + std::to_string(a.id);
        if (!ann_ids.insert(a.id).second)
            throw CocoError("duplicate annotation id " + std::to_string(a.id));
        const ImageRecord* im = d.find_image(a.image_id);
        if (!im)
            throw DanglingReference(label + " references missing image " +
                                    std::to_string(a.image_id));
        if (!cat_ids.count(a.category_id))
            throw DanglingReference(label + " references missing category " +
                                    std::to_string(a.category_id));
        const double x0 = std::clamp(a.bbox.x, 0.0, static_cast<double>(im->width));
        const double y0 = std::clamp(a.bbox.y, 0.0, static_cast<double>(im->height));
        const double x1 = std::clamp(a.bbox.x + a.bbox.w, x0, static_cast<double>(im->width));
        const double y1 = std::clamp(a.bbox.y + a.bbox.h, y0, static_cast<double>(im->height));
        if (x0 != a.bbox.x || y0 != a.bbox.y || x1 != a.bbox.x + a.bbox.w ||
            y1 != a.bbox.y + a.bbox.h) {
            rep.warnings.push_back(label + ": bbox clamped to image bounds");
            a.bbox = {x0, y0, x1 - x0, y1 - y0};
        }
        if (a.bbox.w <= 0.0 || a.bbox.h <= 0.0) {
            rep.warnings.push_back(label + ": degenerate bbox after clamping, dropped");
            ++rep.dropped_annotations;
            continue;
        }
        if (a.area <= 0.0) {
            rep.warnings.push_back(label + ": non-positive area, dropped");
            ++rep.dropped_annotations;
            continue;
        }
        kept.push_back(std::move(a));
    }
    d.annotations = std::move(kept);
    d.rebuild_index();
    return d;
}

namespace detail {

inline void write_json_string(std::string& out, const std::string& s) {
    out.push_back('"');
    for (const char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out.push_back(ch);
                }
        }
    }
    out.push_back('"');
}

inline void write_json_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace detail

/// Streams the descriptor back to COCO JSON with one record per line. Key
/// order and float formatting are fixed, so identical descriptors always
/// serialize to identical bytes.
inline void save_dataset(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    std::string line;
    os << "{\"images\":[";
    for (std::size_t i = 0; i < d.images.size(); ++i) {
        const auto& im = d.images[i];
        line.clear();
        line += i ? ",\n" : "\n";
        line += "{\"id\":" + std::to_string(im.id);
        line += ",\"width\":" + std::to_string(im.width);
        line += ",\"height\":" + std::to_string(im.height);
        line += ",\"file_name\":";
        detail::write_json_string(line, im.file_name);
        line += "}";
        os << line;
    }
    os << "],\n\"annotations\":[";
    for (std::size_t i = 0; i < d.annotations.size(); ++i) {
        const auto& a = d.annotations[i];
        line.clear();
        line += i ? ",\n" : "\n";
        line += "{\"id\":" + std::to_string(a.id);
        line += ",\"image_id\":" + std::to_string(a.image_id);
        line += ",\"category_id\":" + std::to_string(a.category_id);
        line += ",\"bbox\":[";
        detail::write_json_double(line, a.bbox.x);
        line += ",";
        detail::write_json_double(line, a.bbox.y);
        line += ",";
        detail::write_json_double(line, a.bbox.w);
        line += ",";
        detail::write_json_double(line, a.bbox.h);
        line += "],\"area\":";
        detail::write_json_double(line, a.area);
        line += ",\"segmentation\":";
        if (const auto* polys = std::get_if<PolygonSet>(&a.segmentation)) {
            line += "[";
            for (std::size_t p = 0; p < polys->size(); ++p) {
                if (p) line += ",";
                line += "[";
                const auto& poly = (*polys)[p];
                for (std::size_t c = 0; c < poly.size(); ++c) {
                    if (c) line += ",";
                    detail::write_json_double(line, poly[c]);
                }
                line += "]";
            }
            line += "]";
        } else {
            const auto& rle = std::get<RleSegmentation>(a.segmentation);
            line += "{\"size\":[" + std::to_string(rle.counts.height) + "," +
                    std::to_string(rle.counts.width) + "],\"counts\":";
            if (rle.compressed) {
                detail::write_json_string(line, rle_to_string(rle.counts));
            } else {
                line += "[";
                for (std::size_t c = 0; c < rle.counts.counts.size(); ++c) {
                    if (c) line += ",";
                    line += std::to_string(rle.counts.counts[c]);
                }
                line += "]";
            }
            line += "}";
        }
        line += ",\"iscrowd\":";
        line += a.iscrowd ? "1" : "0";
        line += "}";
        os << line;
    }
    os << "],\n\"categories\":[";
    for (std::size_t i = 0; i < d.categories.size(); ++i) {
        const auto& c = d.categories[i];
        line.clear();
        line += i ? ",\n" : "\n";
        line += "{\"id\":" + std::to_string(c.id) + ",\"name\":";
        detail::write_json_string(line, c.name);
        line += "}";
        os << line;
    }
    os << "]}\n";
    os.flush();
    if (!os) throw IoError("failed writing " + path.string());
}

/// Rasterizes an annotation's segmentation onto the image grid. Polygons are
/// filled; RLE payloads are decoded at their own size and clipped into place.
/// An empty segmentation falls back to the bbox rectangle.
inline BinaryMask annotation_mask(const AnnotationRecord& a, int width, int height) {
    if (const auto* polys = std::get_if<PolygonSet>(&a.segmentation)) {
        if (!polys->empty()) return rasterize_polygons(*polys, width, height);
        PolygonSet box{{a.bbox.x, a.bbox.y, a.bbox.x + a.bbox.w, a.bbox.y,
                        a.bbox.x + a.bbox.w, a.bbox.y + a.bbox.h, a.bbox.x,
                        a.bbox.y + a.bbox.h}};
        return rasterize_polygons(box, width, height);
    }
    const auto& rle = std::get<RleSegmentation>(a.segmentation);
    const BinaryMask own = rle_decode(rle.counts);
    if (own.width() == width && own.height() == height) return own;
    return embed_mask(own, width, height, 0, 0);
}

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool clean() const { return errors.empty(); }
};

/// Checks descriptor invariants; with recompute_area also cross-checks the
/// stored area against the rasterized mask and reports mismatches beyond
/// `area_tolerance` (relative) as warnings, without rewriting anything.
inline ValidationReport validate_dataset(const Dataset& d, bool recompute_area = false,
                                         double area_tolerance = 0.01) {
    ValidationReport rep;
    std::unordered_map<std::int64_t, const ImageRecord*> images;
    for (const auto& im : d.images) {
        if (!images.emplace(im.id, &im).second)
            rep.errors.push_back("duplicate image id " + std::to_string(im.id));
        if (im.width <= 0 || im.height <= 0)
            rep.errors.push_back("image " + std::to_string(im.id) +
                                 ": non-positive dimensions");
    }
    std::unordered_set<int> cats;
    for (const auto& c : d.categories)
        if (!cats.insert(c.id).second)
            rep.errors.push_back("duplicate category id " + std::to_string(c.id));
    std::unordered_set<std::int64_t> ann_ids;
    for (const auto& a : d.annotations) {
        const std::string label = "annotation " + std::to_string(a.id);
        if (!ann_ids.insert(a.id).second)
            rep.errors.push_back("duplicate annotation id " + std::to_string(a.id));
        const auto it = images.find(a.image_id);
        if (it == images.end()) {
            rep.errors.push_back(label + ": dangling image_id " +
                                 std::to_string(a.image_id));
            continue;
        }
        if (!cats.count(a.category_id))
            rep.errors.push_back(label + ": dangling category_id " +
                                 std::to_string(a.category_id));
        const ImageRecord& im = *it->second;
        if (a.bbox.w <= 0 || a.bbox.h <= 0)
            rep.errors.push_back(label + ": non-positive bbox size");
        if (a.bbox.x < 0 || a.bbox.y < 0 || a.bbox.x + a.bbox.w > im.width + 1e-6 ||
            a.bbox.y + a.bbox.h > im.height + 1e-6)
            rep.errors.push_back(label + ": bbox outside image bounds");
        if (a.area <= 0) rep.errors.push_back(label + ": non-positive area");
        if (const auto* polys = std::get_if<PolygonSet>(&a.segmentation)) {
            for (const auto& poly : *polys) {
                if (poly.size() < 6 || poly.size() % 2 != 0) {
                    rep.errors.push_back(label + ": polygon with fewer than 3 vertices");
                    continue;
                }
                for (const double c : poly) {
                    if (!std::isfinite(c) || c < 0) {
                        rep.errors.push_back(label + ": invalid polygon coordinate");
                        break;
                    }
                }
            }
        } else {
            const auto& rle = std::get<RleSegmentation>(a.segmentation);
            std::size_t sum = 0;
            for (const std::uint32_t c : rle.counts.counts) sum += c;
            if (sum != static_cast<std::size_t>(rle.counts.height) * rle.counts.width)
                rep.errors.push_back(label + ": RLE run lengths do not sum to height*width");
            else if (rle.counts.height != im.height || rle.counts.width != im.width)
                rep.warnings.push_back(label + ": RLE size differs from image size");
        }
        if (recompute_area) {
            const BinaryMask m = annotation_mask(a, im.width, im.height);
            const double computed = static_cast<double>(mask_area(m));
            if (std::abs(computed - a.area) > area_tolerance * std::max(1.0, a.area))
                rep.warnings.push_back(label + ": stored area " + std::to_string(a.area) +
                                       " vs mask area " + std::to_string(computed));
        }
    }
    return rep;
}

}  // namespace smallobj
