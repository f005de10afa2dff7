#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "smallobj/mask.hpp"

namespace smallobj {

/// Interleaved 8-bit RGB raster, row-major.
struct Image {
    int width = 0, height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h)
        : width(w), height(h),
          pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* at(int x, int y) {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }

    friend bool operator==(const Image&, const Image&) = default;
};

inline Image crop_image(const Image& im, int x, int y, int w, int h) {
    Image out(w, h);
    for (int j = 0; j < h; ++j) {
        const std::uint8_t* src = im.at(x, y + j);
        std::copy(src, src + 3 * static_cast<std::size_t>(w), out.at(0, j));
    }
    return out;
}

/// Bilinear sample at pixel-center coordinates, clamped to the edges.
inline std::array<double, 3> sample_bilinear(const Image& im, double x, double y) {
    const double cx = std::clamp(x, 0.0, im.width - 1.0);
    const double cy = std::clamp(y, 0.0, im.height - 1.0);
    const int x0 = static_cast<int>(std::floor(cx));
    const int y0 = static_cast<int>(std::floor(cy));
    const int x1 = std::min(x0 + 1, im.width - 1);
    const int y1 = std::min(y0 + 1, im.height - 1);
    const double fx = cx - x0, fy = cy - y0;
    const std::uint8_t* p00 = im.at(x0, y0);
    const std::uint8_t* p10 = im.at(x1, y0);
    const std::uint8_t* p01 = im.at(x0, y1);
    const std::uint8_t* p11 = im.at(x1, y1);
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        const double top = p00[c] + fx * (p10[c] - p00[c]);
        const double bot = p01[c] + fx * (p11[c] - p01[c]);
        out[c] = top + fy * (bot - top);
    }
    return out;
}

inline std::uint8_t round_channel(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

inline Image scale_image_bilinear(const Image& im, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw std::invalid_argument("bad output size");
    Image out(out_w, out_h);
    const double sx = static_cast<double>(im.width) / out_w;
    const double sy = static_cast<double>(im.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double srcy = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double srcx = (x + 0.5) * sx - 0.5;
            const auto v = sample_bilinear(im, srcx, srcy);
            std::uint8_t* p = out.at(x, y);
            for (int c = 0; c < 3; ++c) p[c] = round_channel(v[c]);
        }
    }
    return out;
}

/// Rotation about the image center with the same canvas geometry as
/// rotate_mask, so a patch and its mask stay aligned pixel for pixel.
inline Image rotate_image_bilinear(const Image& im, double degrees) {
    const RotationGeometry g = rotation_geometry(im.width, im.height, degrees);
    Image out(g.out_w, g.out_h);
    for (int y = 0; y < g.out_h; ++y) {
        for (int x = 0; x < g.out_w; ++x) {
            const auto [ix, iy] = rotation_source_point(g, x, y);
            const auto v = sample_bilinear(im, ix - 0.5, iy - 0.5);
            std::uint8_t* p = out.at(x, y);
            for (int c = 0; c < 3; ++c) p[c] = round_channel(v[c]);
        }
    }
    return out;
}

/// Normalized 1-D Gaussian taps for an odd kernel size, sigma chosen by the
/// usual 0.3 * ((k - 1) / 2 - 1) + 0.8 rule.
inline std::vector<double> gaussian_kernel_1d(int ksize) {
    if (ksize < 1 || ksize % 2 == 0)
        throw std::invalid_argument("Gaussian kernel size must be odd and positive");
    const double sigma = 0.3 * ((ksize - 1) * 0.5 - 1.0) + 0.8;
    std::vector<double> k(ksize);
    const int c = ksize / 2;
    double sum = 0.0;
    for (int i = 0; i < ksize; ++i) {
        const double d = (i - c) / sigma;
        k[i] = std::exp(-0.5 * d * d);
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Blurs a binary mask into a per-pixel alpha map in [0, 1] (separable
/// convolution, zero padding). Values within 1e-6 of 0 or 1 are snapped so
/// interiors blend exactly and supports stay tight.
inline std::vector<float> gaussian_alpha(const BinaryMask& mask, int ksize) {
    const auto kernel = gaussian_kernel_1d(ksize);
    const int w = mask.width(), h = mask.height(), r = ksize / 2;
    std::vector<double> horiz(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t) {
                const int xi = x + t;
                if (xi >= 0 && xi < w && mask.get(xi, y)) acc += kernel[t + r];
            }
            horiz[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    std::vector<float> alpha(static_cast<std::size_t>(w) * h, 0.0f);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t) {
                const int yi = y + t;
                if (yi >= 0 && yi < h) acc += kernel[t + r] * horiz[static_cast<std::size_t>(yi) * w + x];
            }
            if (acc > 1.0 - 1e-6) acc = 1.0;
            if (acc < 1e-6) acc = 0.0;
            alpha[static_cast<std::size_t>(y) * w + x] = static_cast<float>(acc);
        }
    }
    return alpha;
}

}  // namespace smallobj
