#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace anoscore {

/// 8-bit grayscale image, row-major, top-left origin.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0);
    GrayImage(int w, int h, std::vector<std::uint8_t> px);

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return pixels.size(); }

    bool operator==(const GrayImage&) const = default;
};

/// Real-valued image used for blur, gradients and generator output.
struct FloatImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    FloatImage() = default;
    FloatImage(int w, int h, double fill = 0.0);
    FloatImage(int w, int h, std::vector<double> vals);

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return values.size(); }
};

/// Affine map of [0,255] onto [lo,hi]. Endpoints map exactly.
FloatImage to_float(const GrayImage& img, double lo, double hi);

/// Inverse of to_float: clamp to [lo,hi], map to 0..255, round half away from zero.
GrayImage quantize(const FloatImage& img, double lo, double hi);

/// Per-image min-max rescaling to [0,1]; constant images map to all zeros.
FloatImage minmax_normalize(const GrayImage& img);

void require_same_shape(const GrayImage& a, const GrayImage& b);

}  // namespace anoscore
