#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "smallobj/augment.hpp"
#include "smallobj/coco.hpp"
#include "smallobj/image_io.hpp"
#include "smallobj/parallel.hpp"
#include "smallobj/rng.hpp"

namespace smallobj {

class MissingImageFile : public Error {
public:
    using Error::Error;
};

class InfeasibleSpec : public Error {
public:
    using Error::Error;
};

/// Output composition. `replace` swaps each small-object image for its
/// augmented copy; `aug_oversample` keeps `aug_ratio` independently augmented
/// copies; `original_plus_aug` keeps the original and one augmented copy.
enum class OutputMode { replace, aug_oversample, original_plus_aug };

struct PipelinePlan {
    int oversample_ratio = 1;
    std::optional<OutputMode> mode;
    int aug_ratio = 2;
    std::optional<AugmentationConfig> aug;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    SizeBasis size_basis = SizeBasis::mask_area;
};

inline void validate_plan(const PipelinePlan& plan) {
    if (plan.oversample_ratio < 1)
        throw std::invalid_argument("oversample ratio must be >= 1");
    if (plan.mode && !plan.aug)
        throw std::invalid_argument("output mode requires an augmentation config");
    if (plan.mode == OutputMode::aug_oversample && plan.aug_ratio < 1)
        throw std::invalid_argument("aug-oversample ratio must be >= 1");
    if (plan.aug) validate_config(*plan.aug);
}

struct RunReport {
    std::int64_t images_in = 0, images_out = 0;
    std::array<std::int64_t, 3> annotations_in_by_class{};
    std::array<std::int64_t, 3> annotations_out_by_class{};
    std::int64_t annotations_in = 0, annotations_out = 0;
    std::int64_t paste_attempts = 0, paste_successes = 0, paste_failures = 0;
    double wall_time_seconds = 0.0;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

inline bool image_has_small_object(const Dataset& d, const ImageRecord& im,
                                   SizeBasis basis) {
    for (const std::size_t ai : d.annotations_of(im.id))
        if (classify_size(d.annotations[ai], basis) == SizeClass::small) return true;
    return false;
}

inline std::string suffixed_file_name(const std::string& file_name,
                                      const std::string& suffix) {
    const std::filesystem::path p(file_name);
    std::filesystem::path out = p.parent_path();
    out /= p.stem().string() + suffix + p.extension().string();
    return out.generic_string();
}

/// Offline oversampling at the descriptor level: every image with at least
/// one small object appears `ratio` times, the original plus ratio-1 copies
/// with fresh ids and suffixed file names that reference the same pixels.
inline Dataset oversample_dataset(const Dataset& d, int ratio,
                                  SizeBasis basis = SizeBasis::mask_area) {
    if (ratio < 1) throw std::invalid_argument("oversample ratio must be >= 1");
    if (ratio == 1) return d;
    Dataset out;
    out.categories = d.categories;
    std::int64_t next_image_id = d.max_image_id() + 1;
    std::int64_t next_ann_id = d.max_annotation_id() + 1;
    for (const ImageRecord& im : d.images) {
        out.images.push_back(im);
        for (const std::size_t ai : d.annotations_of(im.id))
            out.annotations.push_back(d.annotations[ai]);
        if (!image_has_small_object(d, im, basis)) continue;
        for (int k = 2; k <= ratio; ++k) {
            ImageRecord dup = im;
            dup.id = next_image_id++;
            dup.file_name = suffixed_file_name(im.file_name, "_d" + std::to_string(k));
            out.images.push_back(dup);
            for (const std::size_t ai : d.annotations_of(im.id)) {
                AnnotationRecord a = d.annotations[ai];
                a.id = next_ann_id++;
                a.image_id = dup.id;
                out.annotations.push_back(a);
            }
        }
    }
    out.rebuild_index();
    return out;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os << text;
    os.flush();
    if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace detail

inline nlohmann::json augmentation_config_to_json(const AugmentationConfig& cfg) {
    const char* strategy = cfg.strategy == PasteStrategy::single_object ? "single"
                           : cfg.strategy == PasteStrategy::multiple_objects
                               ? "multiple"
                               : "all";
    nlohmann::json blend;
    if (cfg.blend.mode == BlendPolicy::Mode::hard)
        blend = "hard";
    else
        blend = "gaussian:" + std::to_string(cfg.blend.kernel);
    return {{"strategy", strategy},
            {"copies", cfg.copies},
            {"object_fraction", cfg.object_fraction},
            {"scale_range", {cfg.scale_min, cfg.scale_max}},
            {"rotation_range", {cfg.rotation_min, cfg.rotation_max}},
            {"border_margin", cfg.border_margin},
            {"overlap_policy",
             cfg.overlap_policy == OverlapPolicy::reject ? "reject" : "allow"},
            {"overlap_granularity",
             cfg.overlap_granularity == OverlapGranularity::mask ? "mask" : "bbox"},
            {"blend", blend},
            {"max_placement_attempts", cfg.max_placement_attempts},
            {"size_basis", cfg.size_basis == SizeBasis::mask_area ? "mask" : "bbox"}};
}

inline nlohmann::json plan_to_json(const PipelinePlan& plan) {
    nlohmann::json j{{"oversample_ratio", plan.oversample_ratio},
                     {"seed", plan.seed},
                     {"jobs", plan.jobs},
                     {"size_basis", plan.size_basis == SizeBasis::mask_area ? "mask" : "bbox"}};
    if (plan.mode) {
        j["mode"] = *plan.mode == OutputMode::replace          ? "replace"
                    : *plan.mode == OutputMode::aug_oversample ? "aug-oversample"
                                                               : "original+aug";
        if (*plan.mode == OutputMode::aug_oversample) j["aug_ratio"] = plan.aug_ratio;
    } else {
        j["mode"] = "none";
    }
    if (plan.aug) j["augmentation"] = augmentation_config_to_json(*plan.aug);
    return j;
}

inline nlohmann::json report_to_json(const RunReport& r) {
    auto by_class = [](const std::array<std::int64_t, 3>& a, std::int64_t total) {
        return nlohmann::json{{"small", a[0]}, {"medium", a[1]}, {"large", a[2]},
                              {"total", total}};
    };
    return {{"images", {{"in", r.images_in}, {"out", r.images_out}}},
            {"annotations_in", by_class(r.annotations_in_by_class, r.annotations_in)},
            {"annotations_out", by_class(r.annotations_out_by_class, r.annotations_out)},
            {"pastes",
             {{"attempts", r.paste_attempts},
              {"successes", r.paste_successes},
              {"failures", r.paste_failures}}},
            {"wall_time_seconds", r.wall_time_seconds},
            {"seed", r.seed},
            {"jobs", r.jobs}};
}

struct BuildResult {
    Dataset dataset;
    RunReport report;
    std::vector<PasteRecord> provenance;  // with output-space ids
    std::vector<std::int64_t> provenance_image_ids;
};

namespace detail {

struct OutputJob {
    std::size_t image_index = 0;
    bool augment = false;
    int aug_copy_index = 0;
    std::string out_file_name;
};

struct JobResult {
    std::vector<AnnotationRecord> annotations;
    std::vector<PasteRecord> provenance;
    int attempts = 0, failures = 0;
};

inline BuildResult build_output_impl(const Dataset& input,
                                     const std::filesystem::path& images_root,
                                     const std::filesystem::path& output_dir,
                                     const PipelinePlan& plan) {
    const auto t0 = std::chrono::steady_clock::now();

    AugmentationConfig aug_cfg;
    if (plan.aug) {
        aug_cfg = *plan.aug;
        aug_cfg.size_basis = plan.size_basis;
    }

    // Work list: every output image, in final order.
    std::vector<OutputJob> jobs;
    std::unordered_set<std::string> used_names;
    auto unique_name = [&](const ImageRecord& im, int ordinal, std::int64_t new_id) {
        std::string name = ordinal == 0
                               ? im.file_name
                               : suffixed_file_name(im.file_name,
                                                    "__" + std::to_string(ordinal));
        if (!used_names.insert(name).second) {
            name = suffixed_file_name(im.file_name, "__id" + std::to_string(new_id));
            used_names.insert(name);
        }
        return name;
    };
    for (std::size_t i = 0; i < input.images.size(); ++i) {
        const ImageRecord& im = input.images[i];
        const bool small = image_has_small_object(input, im, plan.size_basis);
        std::vector<bool> unit;  // true = augment
        if (!small) {
            unit = {false};
        } else if (!plan.mode) {
            unit = {false};
        } else if (*plan.mode == OutputMode::replace) {
            unit = {true};
        } else if (*plan.mode == OutputMode::aug_oversample) {
            unit.assign(static_cast<std::size_t>(plan.aug_ratio), true);
        } else {
            unit = {false, true};
        }
        const int repeats = small ? plan.oversample_ratio : 1;
        int ordinal = 0, aug_index = 0;
        for (int rep = 0; rep < repeats; ++rep) {
            for (const bool is_aug : unit) {
                OutputJob job;
                job.image_index = i;
                job.augment = is_aug;
                job.aug_copy_index = is_aug ? aug_index++ : 0;
                job.out_file_name =
                    unique_name(im, ordinal, static_cast<std::int64_t>(jobs.size()) + 1);
                ++ordinal;
                jobs.push_back(std::move(job));
            }
        }
    }

    namespace fs = std::filesystem;
    const fs::path images_dir = output_dir / "images";
    fs::create_directories(images_dir);
    for (const OutputJob& job : jobs) {
        const fs::path parent = (images_dir / job.out_file_name).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
    }

    const std::int64_t input_max_ann_id = input.max_annotation_id();
    std::vector<JobResult> results(jobs.size());

    parallel_for(jobs.size(), plan.jobs, [&](std::size_t j) {
        const OutputJob& job = jobs[j];
        const ImageRecord& im = input.images[job.image_index];
        const fs::path src = images_root / im.file_name;
        const fs::path dst = images_dir / job.out_file_name;
        if (!fs::exists(src))
            throw MissingImageFile("missing image file: " + src.string());
        std::vector<AnnotationRecord> anns;
        for (const std::size_t ai : input.annotations_of(im.id))
            anns.push_back(input.annotations[ai]);
        if (!job.augment) {
            fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
            results[j].annotations = std::move(anns);
            return;
        }
        const Image pixels = load_image(src);
        if (pixels.width != im.width || pixels.height != im.height)
            throw Error("image " + src.string() + " is " + std::to_string(pixels.width) +
                        "x" + std::to_string(pixels.height) + " but the record says " +
                        std::to_string(im.width) + "x" + std::to_string(im.height));
        const std::uint64_t seed =
            derive_seed(plan.seed, static_cast<std::uint64_t>(im.id),
                        static_cast<std::uint64_t>(job.aug_copy_index));
        AugmentOutcome outcome =
            augment_image(pixels, anns, aug_cfg, seed, input_max_ann_id + 1);
        save_image(dst, outcome.pixels);
        results[j].annotations = std::move(outcome.annotations);
        results[j].provenance = std::move(outcome.provenance);
        results[j].attempts = outcome.attempts;
        results[j].failures = outcome.failures;
    });

    // Renumber images and annotations contiguously in output order.
    BuildResult out;
    out.dataset.categories = input.categories;
    std::map<std::int64_t, std::vector<std::int64_t>> image_idmap, ann_idmap;
    std::int64_t next_ann_id = 1;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const OutputJob& job = jobs[j];
        const ImageRecord& src_im = input.images[job.image_index];
        const std::int64_t new_image_id = static_cast<std::int64_t>(j) + 1;
        out.dataset.images.push_back(
            {new_image_id, src_im.width, src_im.height, job.out_file_name});
        image_idmap[src_im.id].push_back(new_image_id);
        std::size_t paste_cursor = 0;
        for (AnnotationRecord a : results[j].annotations) {
            const std::int64_t old_id = a.id;
            const bool is_paste = old_id > input_max_ann_id;
            a.id = next_ann_id++;
            a.image_id = new_image_id;
            if (is_paste) {
                PasteRecord rec = results[j].provenance[paste_cursor++];
                rec.new_annotation_id = a.id;
                out.provenance.push_back(rec);
                out.provenance_image_ids.push_back(new_image_id);
            } else {
                ann_idmap[old_id].push_back(a.id);
            }
            out.dataset.annotations.push_back(std::move(a));
        }
        out.report.paste_attempts += results[j].attempts;
        out.report.paste_failures += results[j].failures;
        out.report.paste_successes +=
            static_cast<std::int64_t>(results[j].provenance.size());
    }
    out.dataset.rebuild_index();

    out.report.images_in = static_cast<std::int64_t>(input.images.size());
    out.report.images_out = static_cast<std::int64_t>(out.dataset.images.size());
    out.report.annotations_in = static_cast<std::int64_t>(input.annotations.size());
    out.report.annotations_out = static_cast<std::int64_t>(out.dataset.annotations.size());
    for (const auto& a : input.annotations)
        ++out.report.annotations_in_by_class[static_cast<int>(
            classify_size(a, plan.size_basis))];
    for (const auto& a : out.dataset.annotations)
        ++out.report.annotations_out_by_class[static_cast<int>(
            classify_size(a, plan.size_basis))];
    out.report.seed = plan.seed;
    out.report.jobs = plan.jobs;
    out.report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    save_dataset(out.dataset, output_dir / "annotations.json");

    nlohmann::json prov = nlohmann::json::array();
    for (std::size_t i = 0; i < out.provenance.size(); ++i) {
        const PasteRecord& r = out.provenance[i];
        prov.push_back({{"new_annotation_id", r.new_annotation_id},
                        {"image_id", out.provenance_image_ids[i]},
                        {"source_annotation_id", r.source_annotation_id},
                        {"scale", r.scale},
                        {"rotation", r.rotation},
                        {"x", r.x},
                        {"y", r.y}});
    }
    detail::write_text_file(output_dir / "provenance.json", prov.dump(1) + "\n");

    nlohmann::json report = report_to_json(out.report);
    report["config"] = plan_to_json(plan);
    detail::write_text_file(output_dir / "report.json", report.dump(1) + "\n");

    nlohmann::json idmap{{"images", nlohmann::json::object()},
                         {"annotations", nlohmann::json::object()}};
    for (const auto& [old_id, new_ids] : image_idmap)
        idmap["images"][std::to_string(old_id)] = new_ids;
    for (const auto& [old_id, new_ids] : ann_idmap)
        idmap["annotations"][std::to_string(old_id)] = new_ids;
    detail::write_text_file(output_dir / "idmap.json", idmap.dump(1) + "\n");

    return out;
}

}  // namespace detail

/// Materializes the planned output dataset under `output_dir`
/// (annotations.json, images/, provenance.json, report.json, idmap.json).
/// The directory must not exist or be empty; on failure the partial output is
/// removed. Output bytes depend only on (input, plan), never on worker count.
inline BuildResult build_output(const Dataset& input,
                                const std::filesystem::path& images_root,
                                const std::filesystem::path& output_dir,
                                const PipelinePlan& plan) {
    validate_plan(plan);
    namespace fs = std::filesystem;
    if (fs::exists(output_dir) && !fs::is_empty(output_dir))
        throw Error("output directory is not empty: " + output_dir.string());
    fs::create_directories(output_dir);
    try {
        return detail::build_output_impl(input, images_root, output_dir, plan);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(output_dir, ec);
        throw;
    }
}

enum class ShapeKind { rectangle, ellipse, triangle };

struct SynthSpec {
    int images = 20;
    int width = 256;
    int height = 256;
    int small_per_image = 3;
    int medium_per_image = 0;
    int large_per_image = 1;
    std::vector<ShapeKind> palette{ShapeKind::rectangle, ShapeKind::ellipse,
                                   ShapeKind::triangle};
};

namespace detail {

/// Shape generators return single polygons whose rasterized mask area lands
/// inside the target class interval. Small shapes are capped well below 32^2
/// so a +20% scale plus rotation jitter cannot push a pasted copy out of the
/// small class.
inline std::vector<double> synth_polygon(ShapeKind kind, SizeClass cls, double ox,
                                         double oy, SplitMix64& rng) {
    auto irange = [&](int lo, int hi) {
        return static_cast<double>(rng.uniform_int(lo, hi));
    };
    switch (kind) {
        case ShapeKind::rectangle: {
            double w, h;
            if (cls == SizeClass::small) { w = irange(8, 22); h = irange(8, std::min(22, 576 / static_cast<int>(w))); }
            else if (cls == SizeClass::medium) { w = irange(40, 90); h = irange(40, 90); }
            else { w = irange(100, 148); h = irange(100, 148); }
            return {ox, oy, ox + w, oy, ox + w, oy + h, ox, oy + h};
        }
        case ShapeKind::ellipse: {
            double a, b;
            if (cls == SizeClass::small) { a = irange(5, 13); b = irange(5, 13); }
            else if (cls == SizeClass::medium) { a = irange(21, 50); b = irange(21, 50); }
            else { a = irange(56, 76); b = irange(56, 76); }
            std::vector<double> poly;
            const int n = 32;
            for (int i = 0; i < n; ++i) {
                const double t = 2.0 * std::numbers::pi * i / n;
                poly.push_back(ox + a + a * std::cos(t));
                poly.push_back(oy + b + b * std::sin(t));
            }
            return poly;
        }
        default: {
            double legx, legy;
            if (cls == SizeClass::small) { legx = irange(14, 32); legy = irange(14, 32); }
            else if (cls == SizeClass::medium) { legx = irange(52, 118); legy = irange(52, 118); }
            else { legx = irange(142, 198); legy = irange(142, 198); }
            const int orient = static_cast<int>(rng.uniform_int(0, 3));
            const double x1 = ox + legx, y1 = oy + legy;
            switch (orient) {
                case 0: return {ox, oy, x1, oy, ox, y1};
                case 1: return {ox, oy, x1, oy, x1, y1};
                case 2: return {ox, oy, x1, y1, ox, y1};
                default: return {x1, oy, x1, y1, ox, y1};
            }
        }
    }
}

inline double class_area_min(SizeClass cls) {
    switch (cls) {
        case SizeClass::small: return 32.0;
        case SizeClass::medium: return kSmallAreaMax;
        default: return kMediumAreaMax;
    }
}

inline double class_area_max(SizeClass cls) {
    switch (cls) {
        case SizeClass::small: return 600.0;  // headroom for scaled pastes
        case SizeClass::medium: return kMediumAreaMax;
        default: return 1e18;
    }
}

}  // namespace detail

/// Deterministic desk-scale fixture: flat-color backgrounds with randomly
/// placed, non-overlapping solid shapes annotated by exact polygons whose
/// bbox and area come from the rasterized mask itself. Writes
/// `annotations.json` and `images/` under out_dir.
inline Dataset generate_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed,
                                         const std::filesystem::path& out_dir) {
    if (spec.width < 64 || spec.height < 64)
        throw InfeasibleSpec("image dimensions must be at least 64x64");
    if (spec.images < 1) throw InfeasibleSpec("need at least one image");
    if (spec.small_per_image < 0 || spec.medium_per_image < 0 || spec.large_per_image < 0)
        throw InfeasibleSpec("per-class object counts must be non-negative");
    if (spec.palette.empty()) throw InfeasibleSpec("shape palette is empty");
    const int margin = 6;
    const int max_extent = spec.large_per_image > 0   ? 200
                           : spec.medium_per_image > 0 ? 130
                           : spec.small_per_image > 0  ? 34
                                                       : 0;
    if (max_extent > spec.width - 2 * margin || max_extent > spec.height - 2 * margin)
        throw InfeasibleSpec("requested object sizes do not fit in the image");

    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "images");

    Dataset d;
    d.categories = {{1, "rectangle"}, {2, "ellipse"}, {3, "triangle"}};
    SplitMix64 rng(mix_bits(seed ^ 0x5eedc0de5eedc0deull));
    std::int64_t next_ann_id = 1;

    for (int i = 0; i < spec.images; ++i) {
        const std::int64_t image_id = i + 1;
        char name[32];
        std::snprintf(name, sizeof(name), "img_%04d.png", i);
        Image img(spec.width, spec.height);
        const std::uint8_t bg[3] = {static_cast<std::uint8_t>(rng.uniform_int(160, 230)),
                                    static_cast<std::uint8_t>(rng.uniform_int(160, 230)),
                                    static_cast<std::uint8_t>(rng.uniform_int(160, 230))};
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x) {
                std::uint8_t* p = img.at(x, y);
                p[0] = bg[0];
                p[1] = bg[1];
                p[2] = bg[2];
            }
        BinaryMask occupied(spec.width, spec.height);

        std::vector<SizeClass> wanted;
        for (int k = 0; k < spec.large_per_image; ++k) wanted.push_back(SizeClass::large);
        for (int k = 0; k < spec.medium_per_image; ++k) wanted.push_back(SizeClass::medium);
        for (int k = 0; k < spec.small_per_image; ++k) wanted.push_back(SizeClass::small);

        for (const SizeClass cls : wanted) {
            bool placed = false;
            for (int attempt = 0; attempt < 400 && !placed; ++attempt) {
                const ShapeKind kind = spec.palette[static_cast<std::size_t>(rng.uniform_int(
                    0, static_cast<std::int64_t>(spec.palette.size()) - 1))];
                std::vector<double> probe =
                    detail::synth_polygon(kind, cls, 0.0, 0.0, rng);
                double maxx = 0, maxy = 0;
                for (std::size_t c = 0; c + 1 < probe.size(); c += 2) {
                    maxx = std::max(maxx, probe[c]);
                    maxy = std::max(maxy, probe[c + 1]);
                }
                const int hi_x = spec.width - margin - static_cast<int>(std::ceil(maxx));
                const int hi_y = spec.height - margin - static_cast<int>(std::ceil(maxy));
                if (hi_x < margin || hi_y < margin) continue;
                const int ox = static_cast<int>(rng.uniform_int(margin, hi_x));
                const int oy = static_cast<int>(rng.uniform_int(margin, hi_y));
                std::vector<double> poly = probe;
                for (std::size_t c = 0; c + 1 < poly.size(); c += 2) {
                    poly[c] += ox;
                    poly[c + 1] += oy;
                }
                const BinaryMask mask =
                    rasterize_polygons({poly}, spec.width, spec.height);
                const double area = static_cast<double>(mask_area(mask));
                if (area < detail::class_area_min(cls) ||
                    area >= detail::class_area_max(cls))
                    continue;
                // keep a 2 px moat around every shape
                const auto bb = mask_bbox(mask);
                bool clash = false;
                for (int y = std::max(0, bb->y - 2);
                     y < std::min(spec.height, bb->y + bb->h + 2) && !clash; ++y)
                    for (int x = std::max(0, bb->x - 2);
                         x < std::min(spec.width, bb->x + bb->w + 2); ++x)
                        if (occupied.get(x, y)) { clash = true; break; }
                if (clash) continue;

                const std::uint8_t color[3] = {
                    static_cast<std::uint8_t>(rng.uniform_int(20, 140)),
                    static_cast<std::uint8_t>(rng.uniform_int(20, 140)),
                    static_cast<std::uint8_t>(rng.uniform_int(20, 140))};
                for (int y = bb->y; y < bb->y + bb->h; ++y)
                    for (int x = bb->x; x < bb->x + bb->w; ++x)
                        if (mask.get(x, y)) {
                            std::uint8_t* p = img.at(x, y);
                            p[0] = color[0];
                            p[1] = color[1];
                            p[2] = color[2];
                        }
                mask_or_into(occupied, mask, 0, 0);

                AnnotationRecord a;
                a.id = next_ann_id++;
                a.image_id = image_id;
                a.category_id = kind == ShapeKind::rectangle ? 1
                                : kind == ShapeKind::ellipse ? 2
                                                             : 3;
                a.bbox = {static_cast<double>(bb->x), static_cast<double>(bb->y),
                          static_cast<double>(bb->w), static_cast<double>(bb->h)};
                a.area = area;
                a.segmentation = PolygonSet{poly};
                a.iscrowd = false;
                d.annotations.push_back(std::move(a));
                placed = true;
            }
            if (!placed)
                throw InfeasibleSpec("could not place a " +
                                     std::string(size_class_name(cls)) +
                                     " shape without overlap in image " +
                                     std::to_string(image_id));
        }
        d.images.push_back({image_id, spec.width, spec.height, name});
        save_image(out_dir / "images" / name, img);
    }
    d.rebuild_index();
    save_dataset(d, out_dir / "annotations.json");
    return d;
}

}  // namespace smallobj
