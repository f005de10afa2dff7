#pragma once

#include <filesystem>
#include <string>
#include <vector>

#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-enum-enum-conversion"
#include <opencv2/imgcodecs.hpp>
#pragma GCC diagnostic pop

#include "smallobj/errors.hpp"
#include "smallobj/image.hpp"

namespace smallobj {

inline Image load_image(const std::filesystem::path& path) {
    const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw IoError("cannot read image: " + path.string());
    Image out(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const std::uint8_t* row = bgr.ptr<std::uint8_t>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            std::uint8_t* p = out.at(x, y);
            p[0] = row[3 * x + 2];
            p[1] = row[3 * x + 1];
            p[2] = row[3 * x + 0];
        }
    }
    return out;
}

/// Writes PNG or JPEG by extension; JPEG is re-encoded at quality 95.
inline void save_image(const std::filesystem::path& path, const Image& im) {
    cv::Mat bgr(im.height, im.width, CV_8UC3);
    for (int y = 0; y < im.height; ++y) {
        std::uint8_t* row = bgr.ptr<std::uint8_t>(y);
        for (int x = 0; x < im.width; ++x) {
            const std::uint8_t* p = im.at(x, y);
            row[3 * x + 0] = p[2];
            row[3 * x + 1] = p[1];
            row[3 * x + 2] = p[0];
        }
    }
    std::vector<int> params;
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == ".jpg" || ext == ".jpeg")
        params = {cv::IMWRITE_JPEG_QUALITY, 95};
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), bgr, params);
    } catch (const cv::Exception& e) {
        throw IoError("cannot write image " + path.string() + ": " + e.what());
    }
    if (!ok) throw IoError("cannot write image: " + path.string());
}

}  // namespace smallobj
