#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smallobj/coco.hpp"
#include "smallobj/image.hpp"
#include "smallobj/mask.hpp"
#include "smallobj/rng.hpp"

namespace smallobj {

class OutOfBounds : public Error {
public:
    using Error::Error;
};

enum class PasteStrategy { single_object, multiple_objects, all_objects };
enum class OverlapPolicy { reject, allow };
enum class OverlapGranularity { mask, bbox };

struct BlendPolicy {
    enum class Mode { hard, gaussian_edge };
    Mode mode = Mode::hard;
    int kernel = 3;
};

struct AugmentationConfig {
    PasteStrategy strategy = PasteStrategy::all_objects;
    int copies = 1;
    double object_fraction = 0.5;
    double scale_min = 0.8, scale_max = 1.2;
    double rotation_min = -15.0, rotation_max = 15.0;
    int border_margin = 5;
    OverlapPolicy overlap_policy = OverlapPolicy::reject;
    OverlapGranularity overlap_granularity = OverlapGranularity::mask;
    BlendPolicy blend{};
    int max_placement_attempts = 100;
    std::uint64_t seed = 0;
    SizeBasis size_basis = SizeBasis::mask_area;
};

inline void validate_config(const AugmentationConfig& cfg) {
    const int max_copies = cfg.strategy == PasteStrategy::all_objects ? 3 : 5;
    if (cfg.copies < 1 || cfg.copies > max_copies)
        throw std::invalid_argument("copies must be in 1.." + std::to_string(max_copies) +
                                    " for this strategy");
    if (cfg.strategy == PasteStrategy::multiple_objects &&
        !(cfg.object_fraction > 0 && cfg.object_fraction <= 1))
        throw std::invalid_argument("object fraction must be in (0, 1]");
    if (!(cfg.scale_min > 0) || cfg.scale_max < cfg.scale_min)
        throw std::invalid_argument("scale range must be positive and ordered");
    if (cfg.rotation_max < cfg.rotation_min)
        throw std::invalid_argument("rotation range must be ordered");
    if (cfg.border_margin < 0) throw std::invalid_argument("border margin must be >= 0");
    if (cfg.blend.mode == BlendPolicy::Mode::gaussian_edge &&
        (cfg.blend.kernel < 1 || cfg.blend.kernel % 2 == 0))
        throw std::invalid_argument("blend kernel must be odd");
    if (cfg.max_placement_attempts < 1)
        throw std::invalid_argument("placement attempts must be >= 1");
}

/// Provenance of one paste, sufficient to replay it.
struct PasteRecord {
    std::int64_t source_annotation_id = 0;
    double scale = 1.0;
    double rotation = 0.0;
    int x = 0, y = 0;  // top-left of the transformed mask canvas
    std::int64_t new_annotation_id = 0;
};

/// Paste candidates: Small under the basis, non-crowd, and a single polygon
/// part. Multi-part masks are the occlusion proxy and are excluded.
inline std::vector<std::size_t> select_candidates(
    const std::vector<AnnotationRecord>& anns, SizeBasis basis) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < anns.size(); ++i) {
        const AnnotationRecord& a = anns[i];
        if (a.iscrowd) continue;
        if (classify_size(a, basis) != SizeClass::small) continue;
        const auto* polys = std::get_if<PolygonSet>(&a.segmentation);
        if (!polys || polys->size() != 1) continue;
        out.push_back(i);
    }
    return out;
}

struct Transform {
    double scale = 1.0;
    double rotation = 0.0;
};

/// Independent uniform draws: scale from [scale_min, scale_max), rotation
/// from [rotation_min, rotation_max). Scale is drawn first; the order is part
/// of the determinism contract.
inline Transform sample_transform(SplitMix64& rng, const AugmentationConfig& cfg) {
    Transform t;
    t.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
    t.rotation = rng.uniform(cfg.rotation_min, cfg.rotation_max);
    return t;
}

/// Union of everything already on the image; `boxes` carries per-object
/// bounding boxes for the bbox overlap granularity.
struct Occupancy {
    BinaryMask mask;
    std::vector<PixelBox> boxes;
};

/// Tries uniformly random positions until the object's tight bbox lies within
/// [margin, dim - margin) on both axes and, under the reject policy, the mask
/// does not touch anything in `occupied`. On success the occupancy is updated
/// and the canvas top-left is returned.
inline std::optional<std::pair<int, int>> find_placement(const BinaryMask& obj_mask,
                                                         Occupancy& occupied,
                                                         const AugmentationConfig& cfg,
                                                         SplitMix64& rng) {
    const int W = occupied.mask.width(), H = occupied.mask.height();
    const auto bb = mask_bbox(obj_mask);
    if (!bb) return std::nullopt;
    const int m = cfg.border_margin;
    const int lo_x = m, hi_x = W - m - bb->w;
    const int lo_y = m, hi_y = H - m - bb->h;
    if (hi_x < lo_x || hi_y < lo_y) return std::nullopt;
    for (int attempt = 0; attempt < cfg.max_placement_attempts; ++attempt) {
        const int bx = static_cast<int>(rng.uniform_int(lo_x, hi_x));
        const int by = static_cast<int>(rng.uniform_int(lo_y, hi_y));
        const int px = bx - bb->x, py = by - bb->y;
        bool ok = true;
        if (cfg.overlap_policy == OverlapPolicy::reject) {
            if (cfg.overlap_granularity == OverlapGranularity::mask) {
                ok = !masks_overlap(obj_mask, px, py, occupied.mask, 0, 0);
            } else {
                for (const PixelBox& other : occupied.boxes) {
                    if (bx < other.x + other.w && other.x < bx + bb->w &&
                        by < other.y + other.h && other.y < by + bb->h) {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if (ok) {
            mask_or_into(occupied.mask, obj_mask, px, py);
            occupied.boxes.push_back({bx, by, bb->w, bb->h});
            return std::make_pair(px, py);
        }
    }
    return std::nullopt;
}

/// Writes patch pixels over the canvas under the mask. Hard: a plain copy
/// wherever the mask is set. GaussianEdge: the binary mask is blurred into a
/// per-pixel alpha and the patch is alpha-blended; the annotation mask stays
/// the un-blurred binary mask.
inline void composite_paste(Image& canvas, const Image& patch, const BinaryMask& mask,
                            int at_x, int at_y, const BlendPolicy& blend) {
    assert(patch.width == mask.width() && patch.height == mask.height());
    const auto bb = mask_bbox(mask);
    if (!bb) return;
    if (at_x + bb->x < 0 || at_y + bb->y < 0 ||
        at_x + bb->x + bb->w > canvas.width || at_y + bb->y + bb->h > canvas.height)
        throw OutOfBounds("paste does not fit in the canvas");
    const int x0 = std::max(0, at_x), y0 = std::max(0, at_y);
    const int x1 = std::min(canvas.width, at_x + mask.width());
    const int y1 = std::min(canvas.height, at_y + mask.height());
    if (blend.mode == BlendPolicy::Mode::hard) {
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                if (!mask.get(x - at_x, y - at_y)) continue;
                const std::uint8_t* src = patch.at(x - at_x, y - at_y);
                std::uint8_t* dst = canvas.at(x, y);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            }
        }
        return;
    }
    const std::vector<float> alpha = gaussian_alpha(mask, blend.kernel);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const float a =
                alpha[static_cast<std::size_t>(y - at_y) * mask.width() + (x - at_x)];
            if (a <= 0.0f) continue;
            const std::uint8_t* src = patch.at(x - at_x, y - at_y);
            std::uint8_t* dst = canvas.at(x, y);
            if (a >= 1.0f) {
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            } else {
                for (int c = 0; c < 3; ++c)
                    dst[c] = round_channel(dst[c] + a * (src[c] - dst[c]));
            }
        }
    }
}

struct AugmentOutcome {
    Image pixels;
    std::vector<AnnotationRecord> annotations;  // originals followed by pastes
    std::vector<PasteRecord> provenance;
    std::vector<std::string> exclusions;
    int attempts = 0;
    int failures = 0;
};

/// The whole per-image copy-paste procedure. Candidate objects are selected
/// per strategy, each paste draws a fresh scale/rotation, placement is
/// retried up to the attempt budget, and a paste that finds no spot is
/// dropped (counted, never re-drawn). Output is a pure function of
/// (pixels, annotations, cfg, seed).
inline AugmentOutcome augment_image(const Image& image,
                                    const std::vector<AnnotationRecord>& anns,
                                    const AugmentationConfig& cfg, std::uint64_t seed,
                                    std::int64_t first_new_annotation_id) {
    AugmentOutcome out;
    out.pixels = image;
    out.annotations = anns;

    for (const AnnotationRecord& a : anns) {
        if (a.iscrowd || classify_size(a, cfg.size_basis) != SizeClass::small) continue;
        const auto* polys = std::get_if<PolygonSet>(&a.segmentation);
        if (polys && polys->size() > 1)
            out.exclusions.push_back("annotation " + std::to_string(a.id) +
                                     ": multi-part mask, excluded as occluded");
    }

    const std::vector<std::size_t> candidates = select_candidates(anns, cfg.size_basis);
    if (candidates.empty()) return out;

    SplitMix64 rng(seed);

    Occupancy occ{BinaryMask(image.width, image.height), {}};
    for (const AnnotationRecord& a : anns) {
        const BinaryMask m = annotation_mask(a, image.width, image.height);
        mask_or_into(occ.mask, m, 0, 0);
        const int bx0 = static_cast<int>(std::floor(a.bbox.x));
        const int by0 = static_cast<int>(std::floor(a.bbox.y));
        const int bx1 = static_cast<int>(std::ceil(a.bbox.x + a.bbox.w));
        const int by1 = static_cast<int>(std::ceil(a.bbox.y + a.bbox.h));
        occ.boxes.push_back({bx0, by0, bx1 - bx0, by1 - by0});
    }

    std::vector<std::size_t> targets;
    switch (cfg.strategy) {
        case PasteStrategy::single_object:
            targets.push_back(candidates[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))]);
            break;
        case PasteStrategy::multiple_objects: {
            const std::size_t k = std::min<std::size_t>(
                candidates.size(),
                static_cast<std::size_t>(
                    std::ceil(cfg.object_fraction * static_cast<double>(candidates.size()))));
            std::vector<std::size_t> pool = candidates;
            for (std::size_t i = 0; i < k; ++i) {
                const auto j = static_cast<std::size_t>(rng.uniform_int(
                    static_cast<std::int64_t>(i), static_cast<std::int64_t>(pool.size()) - 1));
                std::swap(pool[i], pool[j]);
            }
            pool.resize(k);
            std::sort(pool.begin(), pool.end());
            targets = std::move(pool);
            break;
        }
        case PasteStrategy::all_objects:
            targets = candidates;
            break;
    }

    for (const std::size_t t : targets) {
        const AnnotationRecord& src = anns[t];
        const BinaryMask full = annotation_mask(src, image.width, image.height);
        const auto bb0 = mask_bbox(full);
        if (!bb0) {
            out.exclusions.push_back("annotation " + std::to_string(src.id) +
                                     ": empty mask, skipped");
            continue;
        }
        BinaryMask base_mask(bb0->w, bb0->h);
        for (int y = 0; y < bb0->h; ++y)
            for (int x = 0; x < bb0->w; ++x)
                if (full.get(bb0->x + x, bb0->y + y)) base_mask.set(x, y);
        const Image base_patch = crop_image(image, bb0->x, bb0->y, bb0->w, bb0->h);

        for (int copy = 0; copy < cfg.copies; ++copy) {
            ++out.attempts;
            const Transform tr = sample_transform(rng, cfg);
            const BinaryMask scaled = scale_mask(base_mask, tr.scale);
            const Image scaled_patch =
                scale_image_bilinear(base_patch, scaled.width(), scaled.height());
            const BinaryMask placed_mask = rotate_mask(scaled, tr.rotation);
            const Image placed_patch = rotate_image_bilinear(scaled_patch, tr.rotation);
            const auto placement = find_placement(placed_mask, occ, cfg, rng);
            if (!placement) {
                ++out.failures;
                continue;
            }
            const auto [px, py] = *placement;
            composite_paste(out.pixels, placed_patch, placed_mask, px, py, cfg.blend);

            const auto bb = mask_bbox(placed_mask);
            AnnotationRecord na;
            na.id = first_new_annotation_id +
                    static_cast<std::int64_t>(out.provenance.size());
            na.image_id = src.image_id;
            na.category_id = src.category_id;
            na.bbox = {static_cast<double>(px + bb->x), static_cast<double>(py + bb->y),
                       static_cast<double>(bb->w), static_cast<double>(bb->h)};
            na.area = static_cast<double>(mask_area(placed_mask));
            na.segmentation = RleSegmentation{
                rle_encode(embed_mask(placed_mask, image.width, image.height, px, py)),
                true};
            na.iscrowd = false;
            out.annotations.push_back(na);
            out.provenance.push_back({src.id, tr.scale, tr.rotation, px, py, na.id});
        }
    }
    return out;
}

}  // namespace smallobj
