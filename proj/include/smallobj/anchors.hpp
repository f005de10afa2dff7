#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "smallobj/coco.hpp"
#include "smallobj/parallel.hpp"

namespace smallobj {

class EmptyDataset : public Error {
public:
    using Error::Error;
};

struct AnchorLevel {
    double stride = 0;
    double base_size = 0;
    friend bool operator==(const AnchorLevel&, const AnchorLevel&) = default;
};

/// FPN-style anchor generator parameters. Defaults: five levels with base
/// sizes 32..512 paired with strides 4..64, ratios {1, 0.5, 2}, positive IoU
/// threshold 0.7, and forced argmax assignment so every object gets at least
/// one anchor.
struct AnchorConfig {
    std::vector<AnchorLevel> levels{{4, 32}, {8, 64}, {16, 128}, {32, 256}, {64, 512}};
    std::vector<double> aspect_ratios{1.0, 0.5, 2.0};
    double positive_iou = 0.7;
    bool force_argmax = true;
};

inline void validate_config(const AnchorConfig& cfg) {
    if (cfg.levels.empty()) throw std::invalid_argument("anchor config needs at least one level");
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
        if (cfg.levels[i].stride <= 0 || cfg.levels[i].base_size <= 0)
            throw std::invalid_argument("anchor strides and base sizes must be positive");
        if (i && (cfg.levels[i].stride <= cfg.levels[i - 1].stride ||
                  cfg.levels[i].base_size <= cfg.levels[i - 1].base_size))
            throw std::invalid_argument("anchor strides and base sizes must be ascending");
    }
    if (cfg.aspect_ratios.empty()) throw std::invalid_argument("anchor config needs at least one aspect ratio");
    for (const double r : cfg.aspect_ratios)
        if (r <= 0) throw std::invalid_argument("aspect ratios must be positive");
    if (!(cfg.positive_iou > 0 && cfg.positive_iou <= 1))
        throw std::invalid_argument("positive IoU threshold must be in (0, 1]");
}

struct AnchorBox {
    Box box;
    int level = 0;
};

/// Area-preserving ratio split: w = base * sqrt(1/r), h = base * sqrt(r).
inline std::pair<double, double> anchor_dims(double base_size, double ratio) {
    return {base_size * std::sqrt(1.0 / ratio), base_size * std::sqrt(ratio)};
}

/// One anchor per (grid cell, ratio) per level, centered on cell centers
/// (i*stride + stride/2). Grid dims are ceil(dim/stride); anchors may extend
/// past the image border and are not clipped.
inline std::vector<AnchorBox> generate_anchors(int width, int height,
                                               const AnchorConfig& cfg) {
    std::vector<AnchorBox> out;
    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
        const auto& lv = cfg.levels[li];
        const int nx = static_cast<int>(std::ceil(width / lv.stride));
        const int ny = static_cast<int>(std::ceil(height / lv.stride));
        for (const double ratio : cfg.aspect_ratios) {
            const auto [wa, ha] = anchor_dims(lv.base_size, ratio);
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    const double cx = i * lv.stride + lv.stride * 0.5;
                    const double cy = j * lv.stride + lv.stride * 0.5;
                    out.push_back({{cx - wa * 0.5, cy - ha * 0.5, wa, ha},
                                   static_cast<int>(li)});
                }
            }
        }
    }
    return out;
}

/// Intersection-over-union on continuous box coordinates; 0 when the union
/// is empty.
inline double box_iou(const Box& a, const Box& b) {
    const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    if (iw <= 0) return 0.0;
    const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (ih <= 0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return uni <= 0 ? 0.0 : inter / uni;
}

struct ObjectMatchStats {
    std::int64_t annotation_id = 0;
    SizeClass size_class = SizeClass::small;
    std::uint32_t matched_anchor_count = 0;
    double max_iou = 0.0;
};

/// RPN positive-assignment counting. An anchor whose best IoU clears the
/// threshold is attributed to its argmax ground truth only (ties broken by
/// lower index), so no anchor is counted twice. With force_argmax, a ground
/// truth left without any attributed anchor gets its best-IoU anchor, which
/// guarantees matched_anchor_count >= 1.
inline std::vector<ObjectMatchStats> match_anchors(const std::vector<Box>& gts,
                                                   const std::vector<AnchorBox>& anchors,
                                                   const AnchorConfig& cfg) {
    std::vector<ObjectMatchStats> out(gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g) {
        out[g].annotation_id = static_cast<std::int64_t>(g);
    }
    if (gts.empty()) return out;
    for (const auto& anchor : anchors) {
        double best = 0.0;
        std::size_t best_g = 0;
        bool found = false;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double iou = box_iou(anchor.box, gts[g]);
            if (iou > out[g].max_iou) out[g].max_iou = iou;
            if (iou > 0 && (!found || iou > best)) {
                best = iou;
                best_g = g;
                found = true;
            }
        }
        if (found && best > cfg.positive_iou) ++out[best_g].matched_anchor_count;
    }
    if (cfg.force_argmax)
        for (auto& s : out)
            if (s.matched_anchor_count == 0) s.matched_anchor_count = 1;
    return out;
}

struct GtMatch {
    std::uint32_t count = 0;
    double max_iou = 0.0;
};

/// Same assignment as match_anchors against the full generated anchor grid,
/// restricted to anchors that can actually matter. Two exact prunes:
///   - per ground truth, only grid cells whose anchor can intersect it;
///   - per (gt, level, ratio) group, a best-case IoU bound
///     I*/(Aa + Ag - I*) with I* = min(wa,gw)*min(ha,gh). Groups are
///     processed in descending bound order and skipped once the bound can
///     neither beat the running max_iou nor clear the positive threshold;
///     every skipped pair is provably irrelevant.
/// IoUs use the identical formula on identical coordinates, so results are
/// bit-equal to the exhaustive path.
inline std::vector<GtMatch> match_gt_boxes(const std::vector<Box>& gts, int width,
                                           int height, const AnchorConfig& cfg) {
    std::vector<GtMatch> out(gts.size());
    if (gts.empty()) return out;

    const std::size_t n_ratios = cfg.aspect_ratios.size();
    struct Group {
        int nx = 0, ny = 0;
        std::size_t offset = 0;
        double wa = 0, ha = 0, stride = 0, area = 0;
    };
    std::vector<Group> groups(cfg.levels.size() * n_ratios);
    std::size_t total_anchors = 0;
    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
        const auto& lv = cfg.levels[li];
        const int nx = static_cast<int>(std::ceil(width / lv.stride));
        const int ny = static_cast<int>(std::ceil(height / lv.stride));
        for (std::size_t ri = 0; ri < n_ratios; ++ri) {
            Group& g = groups[li * n_ratios + ri];
            const auto [wa, ha] = anchor_dims(lv.base_size, cfg.aspect_ratios[ri]);
            g.nx = nx;
            g.ny = ny;
            g.offset = total_anchors;
            g.wa = wa;
            g.ha = ha;
            g.stride = lv.stride;
            g.area = wa * ha;
            total_anchors += static_cast<std::size_t>(nx) * ny;
        }
    }

    // Dense per-anchor best table, reused across calls on the same thread;
    // epoch stamps make stale entries invisible without clearing.
    struct Best {
        double iou = 0;
        std::uint32_t gt = 0;
        std::uint32_t epoch = 0;
    };
    static thread_local std::vector<Best> table;
    static thread_local std::uint32_t epoch = 0;
    if (table.size() < total_anchors) table.resize(total_anchors);
    if (++epoch == 0) {  // wrapped: stamp everything stale once
        for (auto& b : table) b.epoch = 0;
        epoch = 1;
    }

    std::vector<std::size_t> order(groups.size());
    std::vector<double> bounds(groups.size());
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const Box& gt = gts[g];
        const double gt_area = gt.w * gt.h;
        for (std::size_t k = 0; k < groups.size(); ++k) {
            const Group& grp = groups[k];
            const double imax = std::min(grp.wa, gt.w) * std::min(grp.ha, gt.h);
            bounds[k] = imax / (grp.area + gt_area - imax);
            order[k] = k;
        }
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return bounds[a] > bounds[b]; });
        double& best_iou = out[g].max_iou;
        for (const std::size_t k : order) {
            if (!(bounds[k] > cfg.positive_iou) && !(bounds[k] >= best_iou)) break;
            const Group& grp = groups[k];
            const double gcx = gt.x + gt.w * 0.5;
            const double gcy = gt.y + gt.h * 0.5;
            const double rx = (grp.wa + gt.w) * 0.5;
            const double ry = (grp.ha + gt.h) * 0.5;
            const int i0 = std::max(
                0, static_cast<int>(std::floor((gcx - rx - grp.stride * 0.5) / grp.stride)) - 1);
            const int i1 = std::min(
                grp.nx - 1,
                static_cast<int>(std::ceil((gcx + rx - grp.stride * 0.5) / grp.stride)) + 1);
            const int j0 = std::max(
                0, static_cast<int>(std::floor((gcy - ry - grp.stride * 0.5) / grp.stride)) - 1);
            const int j1 = std::min(
                grp.ny - 1,
                static_cast<int>(std::ceil((gcy + ry - grp.stride * 0.5) / grp.stride)) + 1);
            for (int j = j0; j <= j1; ++j) {
                for (int i = i0; i <= i1; ++i) {
                    const double cx = i * grp.stride + grp.stride * 0.5;
                    const double cy = j * grp.stride + grp.stride * 0.5;
                    const Box anchor{cx - grp.wa * 0.5, cy - grp.ha * 0.5, grp.wa,
                                     grp.ha};
                    const double iou = box_iou(anchor, gt);
                    if (iou <= 0) continue;
                    if (iou > best_iou) best_iou = iou;
                    Best& slot =
                        table[grp.offset + static_cast<std::size_t>(j) * grp.nx + i];
                    if (slot.epoch != epoch) {
                        slot = {iou, static_cast<std::uint32_t>(g), epoch};
                        if (iou > cfg.positive_iou) ++out[g].count;
                    } else if (iou > slot.iou) {
                        if (slot.iou > cfg.positive_iou) --out[slot.gt].count;
                        slot.iou = iou;
                        slot.gt = static_cast<std::uint32_t>(g);
                        if (iou > cfg.positive_iou) ++out[g].count;
                    }
                }
            }
        }
    }
    if (cfg.force_argmax)
        for (auto& m : out)
            if (m.count == 0) m.count = 1;
    return out;
}

struct SizeClassStats {
    struct PerClass {
        std::int64_t object_count = 0;
        std::int64_t image_count = 0;
        double total_area = 0.0;
        std::uint64_t matched_anchors = 0;
        std::int64_t matched_objects = 0;
        double max_iou_sum = 0.0;

        double object_count_pct = 0.0;
        double images_pct = 0.0;
        double total_area_pct = 0.0;
        double matched_anchors_pct = 0.0;
        double avg_matching_anchors = 0.0;
        double avg_max_iou = 0.0;
    };
    std::array<PerClass, 3> classes{};
    std::int64_t total_objects = 0;
    std::int64_t total_images = 0;
    double total_area = 0.0;
    std::uint64_t total_matched = 0;
    SizeBasis basis = SizeBasis::mask_area;
    AnchorConfig config;
};

/// Aggregates per-class composition and anchor matching statistics over the
/// whole dataset. Crowd regions count toward object/image/area composition
/// but are excluded from anchor matching, as RPN training ignores them.
/// Per-image work runs as a parallel map; partial sums are reduced in image
/// order so results are identical for any worker count.
inline SizeClassStats dataset_statistics(const Dataset& d, const AnchorConfig& cfg,
                                         SizeBasis basis, unsigned jobs = 1) {
    validate_config(cfg);
    if (d.annotations.empty()) throw EmptyDataset("dataset has no annotations");

    struct Partial {
        std::array<std::int64_t, 3> objects{};
        std::array<bool, 3> present{};
        std::array<double, 3> area{};
        std::array<std::uint64_t, 3> matched{};
        std::array<std::int64_t, 3> matched_objects{};
        std::array<double, 3> max_iou_sum{};
    };
    std::vector<Partial> partials(d.images.size());

    parallel_for(d.images.size(), jobs, [&](std::size_t i) {
        const ImageRecord& im = d.images[i];
        Partial& p = partials[i];
        std::vector<Box> boxes;
        std::vector<int> classes;
        for (const std::size_t ai : d.annotations_of(im.id)) {
            const AnnotationRecord& a = d.annotations[ai];
            const int c = static_cast<int>(classify_size(a, basis));
            ++p.objects[c];
            p.present[c] = true;
            p.area[c] += basis == SizeBasis::mask_area ? a.area : a.bbox.w * a.bbox.h;
            if (a.iscrowd) continue;
            boxes.push_back(a.bbox);
            classes.push_back(c);
        }
        if (boxes.empty()) return;
        const auto matches = match_gt_boxes(boxes, im.width, im.height, cfg);
        for (std::size_t g = 0; g < boxes.size(); ++g) {
            p.matched[classes[g]] += matches[g].count;
            ++p.matched_objects[classes[g]];
            p.max_iou_sum[classes[g]] += matches[g].max_iou;
        }
    });

    SizeClassStats stats;
    stats.basis = basis;
    stats.config = cfg;
    stats.total_images = static_cast<std::int64_t>(d.images.size());
    for (const Partial& p : partials) {
        for (int c = 0; c < 3; ++c) {
            auto& cls = stats.classes[c];
            cls.object_count += p.objects[c];
            cls.image_count += p.present[c] ? 1 : 0;
            cls.total_area += p.area[c];
            cls.matched_anchors += p.matched[c];
            cls.matched_objects += p.matched_objects[c];
            cls.max_iou_sum += p.max_iou_sum[c];
        }
    }
    for (int c = 0; c < 3; ++c) {
        const auto& cls = stats.classes[c];
        stats.total_objects += cls.object_count;
        stats.total_area += cls.total_area;
        stats.total_matched += cls.matched_anchors;
    }
    for (int c = 0; c < 3; ++c) {
        auto& cls = stats.classes[c];
        cls.object_count_pct = 100.0 * cls.object_count / stats.total_objects;
        cls.images_pct = stats.total_images
                             ? 100.0 * cls.image_count / stats.total_images
                             : 0.0;
        cls.total_area_pct =
            stats.total_area > 0 ? 100.0 * cls.total_area / stats.total_area : 0.0;
        cls.matched_anchors_pct =
            stats.total_matched
                ? 100.0 * static_cast<double>(cls.matched_anchors) / stats.total_matched
                : 0.0;
        cls.avg_matching_anchors =
            cls.matched_objects
                ? static_cast<double>(cls.matched_anchors) / cls.matched_objects
                : 0.0;
        cls.avg_max_iou =
            cls.matched_objects ? cls.max_iou_sum / cls.matched_objects : 0.0;
    }
    return stats;
}

inline nlohmann::json anchor_config_to_json(const AnchorConfig& cfg) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lv : cfg.levels)
        levels.push_back({{"stride", lv.stride}, {"base_size", lv.base_size}});
    return {{"levels", levels},
            {"aspect_ratios", cfg.aspect_ratios},
            {"positive_iou", cfg.positive_iou},
            {"force_argmax", cfg.force_argmax}};
}

inline nlohmann::json stats_to_json(const SizeClassStats& stats) {
    nlohmann::json classes;
    for (int c = 0; c < 3; ++c) {
        const auto& cls = stats.classes[c];
        classes[size_class_name(static_cast<SizeClass>(c))] = {
            {"object_count", cls.object_count},
            {"object_count_pct", cls.object_count_pct},
            {"image_count", cls.image_count},
            {"images_pct", cls.images_pct},
            {"total_area", cls.total_area},
            {"total_area_pct", cls.total_area_pct},
            {"matched_anchors", cls.matched_anchors},
            {"matched_anchors_pct", cls.matched_anchors_pct},
            {"avg_matching_anchors", cls.avg_matching_anchors},
            {"avg_max_iou", cls.avg_max_iou},
        };
    }
    return {{"schema_version", 1},
            {"size_basis", stats.basis == SizeBasis::mask_area ? "mask" : "bbox"},
            {"anchor_config", anchor_config_to_json(stats.config)},
            {"totals",
             {{"objects", stats.total_objects},
              {"images", stats.total_images},
              {"area", stats.total_area},
              {"matched_anchors", stats.total_matched}}},
            {"classes", classes}};
}

/// Aligned six-column table, one row per size class.
inline std::string stats_to_table(const SizeClassStats& stats) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-8s %12s %10s %12s %14s %14s %12s\n", "",
                  "Object Cnt", "Images", "Total Area", "Matched Anch",
                  "Avg matching", "Avg max IoU");
    out += buf;
    for (int c = 0; c < 3; ++c) {
        const auto& cls = stats.classes[c];
        std::snprintf(buf, sizeof(buf),
                      "%-8s %11.2f%% %9.2f%% %11.2f%% %13.2f%% %14.2f %12.2f\n",
                      size_class_name(static_cast<SizeClass>(c)), cls.object_count_pct,
                      cls.images_pct, cls.total_area_pct, cls.matched_anchors_pct,
                      cls.avg_matching_anchors, cls.avg_max_iou);
        out += buf;
    }
    return out;
}

}  // namespace smallobj
