#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smallobj/errors.hpp"

namespace smallobj {

class MaskError : public Error {
public:
    using Error::Error;
};

/// Polygon with fewer than 3 vertices.
class DegeneratePolygon : public MaskError {
public:
    using MaskError::MaskError;
};

/// Run-length counts that do not sum to height * width.
class LengthMismatch : public MaskError {
public:
    using MaskError::MaskError;
};

/// A transform whose output would round to zero size.
class DegenerateOutput : public MaskError {
public:
    using MaskError::MaskError;
};

struct PixelBox {
    int x = 0, y = 0, w = 0, h = 0;
    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// Dense bit grid, one bit per pixel, row-major.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height)
        : width_(width), height_(height),
          words_((static_cast<std::size_t>(width) * height + 63) / 64, 0) {
        if (width < 0 || height < 0) throw MaskError("negative mask dimensions");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept {
        return static_cast<std::size_t>(width_) * height_;
    }

    bool get(int x, int y) const noexcept {
        const std::size_t i = static_cast<std::size_t>(y) * width_ + x;
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }

    void set(int x, int y, bool v = true) noexcept {
        const std::size_t i = static_cast<std::size_t>(y) * width_ + x;
        const std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= bit;
        else
            words_[i >> 6] &= ~bit;
    }

    std::size_t area() const noexcept {
        std::size_t n = 0;
        for (const std::uint64_t w : words_) n += std::popcount(w);
        return n;
    }

    bool any() const noexcept {
        for (const std::uint64_t w : words_)
            if (w) return true;
        return false;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_ = 0, height_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Flat coordinate lists: [x0, y0, x1, y1, ...] per polygon.
using PolygonSet = std::vector<std::vector<double>>;

/// COCO run lengths: column-major scan order, first run counts zeros.
struct RunLengthCounts {
    int height = 0, width = 0;
    std::vector<std::uint32_t> counts;
    friend bool operator==(const RunLengthCounts&, const RunLengthCounts&) = default;
};

namespace detail {

/// Scanline even-odd fill at pixel centers (x+0.5, y+0.5). Vertices are
/// clamped to the image rectangle before rasterizing. The crossing rule is
/// half-open in y so shared vertices are counted exactly once, and fills are
/// left-inclusive / right-exclusive in x, matching a strict right-ray
/// point-in-polygon test.
inline void fill_polygon_even_odd(BinaryMask& mask, std::span<const double> flat) {
    if (flat.size() < 6 || flat.size() % 2 != 0)
        throw DegeneratePolygon("polygon needs at least 3 (x, y) vertices");
    const int w = mask.width(), h = mask.height();
    if (w == 0 || h == 0) return;
    const std::size_t n = flat.size() / 2;
    std::vector<double> xs(n), ys(n);
    double ymin = static_cast<double>(h), ymax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::clamp(flat[2 * i], 0.0, static_cast<double>(w));
        ys[i] = std::clamp(flat[2 * i + 1], 0.0, static_cast<double>(h));
        ymin = std::min(ymin, ys[i]);
        ymax = std::max(ymax, ys[i]);
    }
    const int j0 = std::max(0, static_cast<int>(std::floor(ymin)) - 1);
    const int j1 = std::min(h - 1, static_cast<int>(std::ceil(ymax)));
    std::vector<double> cross;
    for (int j = j0; j <= j1; ++j) {
        const double yc = j + 0.5;
        cross.clear();
        for (std::size_t e = 0, p = n - 1; e < n; p = e++) {
            const double y1 = ys[p], y2 = ys[e];
            if ((y1 <= yc) == (y2 <= yc)) continue;
            cross.push_back(xs[p] + (yc - y1) * (xs[e] - xs[p]) / (y2 - y1));
        }
        std::sort(cross.begin(), cross.end());
        for (std::size_t k = 0; k + 1 < cross.size(); k += 2) {
            const int xb = std::max(0, static_cast<int>(std::ceil(cross[k] - 0.5)));
            const int xe = std::min(w, static_cast<int>(std::ceil(cross[k + 1] - 0.5)));
            for (int x = xb; x < xe; ++x) mask.set(x, j);
        }
    }
}

}  // namespace detail

/// Union of the even-odd interiors of each polygon. A pixel is set iff its
/// center lies inside at least one polygon.
inline BinaryMask rasterize_polygons(const PolygonSet& polygons, int width, int height) {
    BinaryMask mask(width, height);
    for (const auto& poly : polygons) detail::fill_polygon_even_odd(mask, poly);
    return mask;
}

inline BinaryMask rle_decode(const RunLengthCounts& r) {
    if (r.height < 0 || r.width < 0) throw LengthMismatch("negative RLE size");
    const std::size_t total = static_cast<std::size_t>(r.height) * r.width;
    std::size_t sum = 0;
    for (const std::uint32_t c : r.counts) sum += c;
    if (sum != total)
        throw LengthMismatch("run lengths sum to " + std::to_string(sum) +
                             ", expected " + std::to_string(total));
    BinaryMask mask(r.width, r.height);
    const int h = r.height;
    std::size_t pos = 0;
    bool value = false;
    for (const std::uint32_t c : r.counts) {
        if (value) {
            for (std::size_t k = 0; k < c; ++k) {
                const std::size_t p = pos + k;
                mask.set(static_cast<int>(p / h), static_cast<int>(p % h));
            }
        }
        pos += c;
        value = !value;
    }
    return mask;
}

/// Canonical form: counts[0] is the (possibly zero) number of leading zeros;
/// no interior zero runs.
inline RunLengthCounts rle_encode(const BinaryMask& mask) {
    RunLengthCounts r;
    r.height = mask.height();
    r.width = mask.width();
    std::uint32_t run = 0;
    bool current = false;
    for (int x = 0; x < mask.width(); ++x) {
        for (int y = 0; y < mask.height(); ++y) {
            const bool v = mask.get(x, y);
            if (v == current) {
                ++run;
            } else {
                r.counts.push_back(run);
                current = v;
                run = 1;
            }
        }
    }
    r.counts.push_back(run);
    return r;
}

/// COCO compressed counts string: 6 bits per char offset by 48, with
/// sign-folded deltas against counts[i-2] from the fourth element on.
inline std::string rle_to_string(const RunLengthCounts& r) {
    std::string s;
    s.reserve(r.counts.size() * 2);
    for (std::size_t i = 0; i < r.counts.size(); ++i) {
        long long x = static_cast<long long>(r.counts[i]);
        if (i > 2) x -= static_cast<long long>(r.counts[i - 2]);
        bool more = true;
        while (more) {
            long long c = x & 0x1f;
            x >>= 5;
            more = (c & 0x10) ? x != -1 : x != 0;
            if (more) c |= 0x20;
            s.push_back(static_cast<char>(c + 48));
        }
    }
    return s;
}

inline RunLengthCounts rle_from_string(const std::string& s, int height, int width) {
    RunLengthCounts r;
    r.height = height;
    r.width = width;
    std::size_t p = 0;
    while (p < s.size()) {
        long long x = 0;
        int k = 0;
        bool more = true;
        while (more) {
            if (p >= s.size()) throw MaskError("truncated RLE counts string");
            const long long c = s[p] - 48;
            if (c < 0 || c > 63) throw MaskError("invalid RLE counts character");
            if (k > 12) throw MaskError("RLE counts varint too long");
            x |= (c & 0x1f) << (5 * k);
            more = (c & 0x20) != 0;
            ++p;
            ++k;
            if (!more && (c & 0x10)) x |= -1ll << (5 * k);
        }
        if (r.counts.size() > 2) x += static_cast<long long>(r.counts[r.counts.size() - 2]);
        if (x < 0) throw MaskError("negative run length in RLE counts string");
        r.counts.push_back(static_cast<std::uint32_t>(x));
    }
    return r;
}

/// Tightest box covering all set pixels; nullopt when the mask is empty.
inline std::optional<PixelBox> mask_bbox(const BinaryMask& mask) {
    int minx = mask.width(), miny = mask.height(), maxx = -1, maxy = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.get(x, y)) continue;
            minx = std::min(minx, x);
            maxx = std::max(maxx, x);
            miny = std::min(miny, y);
            maxy = std::max(maxy, y);
        }
    }
    if (maxx < 0) return std::nullopt;
    return PixelBox{minx, miny, maxx - minx + 1, maxy - miny + 1};
}

inline std::size_t mask_area(const BinaryMask& mask) { return mask.area(); }

/// Nearest-neighbor resample; output dims = round(dim * factor).
inline BinaryMask scale_mask(const BinaryMask& mask, double factor) {
    if (!(factor > 0.0)) throw DegenerateOutput("scale factor must be positive");
    const int ow = static_cast<int>(std::llround(mask.width() * factor));
    const int oh = static_cast<int>(std::llround(mask.height() * factor));
    if (ow < 1 || oh < 1) throw DegenerateOutput("scaled mask rounds to zero size");
    BinaryMask out(ow, oh);
    const double sx = static_cast<double>(mask.width()) / ow;
    const double sy = static_cast<double>(mask.height()) / oh;
    for (int y = 0; y < oh; ++y) {
        const int iy = std::min(static_cast<int>((y + 0.5) * sy), mask.height() - 1);
        for (int x = 0; x < ow; ++x) {
            const int ix = std::min(static_cast<int>((x + 0.5) * sx), mask.width() - 1);
            if (mask.get(ix, iy)) out.set(x, y);
        }
    }
    return out;
}

/// Shared geometry for rotating a w x h canvas about its center. cos/sin are
/// snapped so that multiples of 90 degrees are lattice-exact.
struct RotationGeometry {
    double cos_t = 1.0, sin_t = 0.0;
    int in_w = 0, in_h = 0;
    int out_w = 0, out_h = 0;
};

inline RotationGeometry rotation_geometry(int w, int h, double degrees) {
    const double rad = degrees * std::numbers::pi / 180.0;
    auto snap = [](double v) {
        for (const double t : {-1.0, 0.0, 1.0})
            if (std::abs(v - t) < 1e-12) return t;
        return v;
    };
    RotationGeometry g;
    g.cos_t = snap(std::cos(rad));
    g.sin_t = snap(std::sin(rad));
    g.in_w = w;
    g.in_h = h;
    const double ow = std::abs(g.cos_t) * w + std::abs(g.sin_t) * h;
    const double oh = std::abs(g.sin_t) * w + std::abs(g.cos_t) * h;
    g.out_w = std::max(1, static_cast<int>(std::ceil(ow - 1e-9)));
    g.out_h = std::max(1, static_cast<int>(std::ceil(oh - 1e-9)));
    return g;
}

/// Inverse-maps the center of output pixel (x, y) into input grid coordinates.
inline std::pair<double, double> rotation_source_point(const RotationGeometry& g,
                                                       int x, int y) {
    const double dx = x + 0.5 - g.out_w * 0.5;
    const double dy = y + 0.5 - g.out_h * 0.5;
    return {g.cos_t * dx + g.sin_t * dy + g.in_w * 0.5,
            -g.sin_t * dx + g.cos_t * dy + g.in_h * 0.5};
}

/// Rotation about the mask center, nearest-neighbor via inverse mapping. The
/// output canvas is the rotated bounding box of the input canvas, so no set
/// pixel is ever clipped.
inline BinaryMask rotate_mask(const BinaryMask& mask, double degrees) {
    const RotationGeometry g = rotation_geometry(mask.width(), mask.height(), degrees);
    BinaryMask out(g.out_w, g.out_h);
    for (int y = 0; y < g.out_h; ++y) {
        for (int x = 0; x < g.out_w; ++x) {
            const auto [ix, iy] = rotation_source_point(g, x, y);
            const int xi = static_cast<int>(std::floor(ix));
            const int yi = static_cast<int>(std::floor(iy));
            if (xi >= 0 && xi < mask.width() && yi >= 0 && yi < mask.height() &&
                mask.get(xi, yi))
                out.set(x, y);
        }
    }
    return out;
}

/// True iff any pixel is set in both masks after placing their top-left
/// corners at the given offsets in a common frame. The canvas-rectangle
/// prefilter only skips provably disjoint cases.
inline bool masks_overlap(const BinaryMask& a, int ax, int ay, const BinaryMask& b,
                          int bx, int by) {
    const int x0 = std::max(ax, bx), y0 = std::max(ay, by);
    const int x1 = std::min(ax + a.width(), bx + b.width());
    const int y1 = std::min(ay + a.height(), by + b.height());
    if (x0 >= x1 || y0 >= y1) return false;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            if (a.get(x - ax, y - ay) && b.get(x - bx, y - by)) return true;
    return false;
}

/// OR src into dst at offset (x0, y0), clipping to dst bounds.
inline void mask_or_into(BinaryMask& dst, const BinaryMask& src, int x0, int y0) {
    const int xb = std::max(0, x0), yb = std::max(0, y0);
    const int xe = std::min(dst.width(), x0 + src.width());
    const int ye = std::min(dst.height(), y0 + src.height());
    for (int y = yb; y < ye; ++y)
        for (int x = xb; x < xe; ++x)
            if (src.get(x - x0, y - y0)) dst.set(x, y);
}

/// src placed at (x0, y0) on a width x height canvas, clipped.
inline BinaryMask embed_mask(const BinaryMask& src, int width, int height, int x0,
                             int y0) {
    BinaryMask out(width, height);
    mask_or_into(out, src, x0, y0);
    return out;
}

}  // namespace smallobj
