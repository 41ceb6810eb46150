#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "anoscore/image.hpp"

namespace anoscore {

/// Parameters of the Canny detector. Defaults: kernel 5, sigma 3,
/// hysteresis thresholds 100/200 in 0-255 gradient-magnitude units.
struct CannyParams {
    int kernel_size = 5;
    double sigma = 3.0;
    double low_threshold = 100.0;
    double high_threshold = 200.0;

    void validate() const;
};

/// Binary edge map; dimensions equal the source image's.
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // 0 or 1

    EdgeMap() = default;
    EdgeMap(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}
    bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }

    bool operator==(const EdgeMap&) const = default;
};

struct Gradients {
    FloatImage magnitude;
    FloatImage direction;  // radians, from atan2(gy, gx)
};

/// Separable Gaussian convolution, reflect-101 borders, kernel normalized to sum 1.
FloatImage gaussian_blur(const FloatImage& img, int kernel_size, double sigma);

/// 3x3 Sobel gradients with reflect-101 borders; Euclidean magnitude.
Gradients sobel_gradients(const FloatImage& img);

/// Keeps pixels that are >= both neighbors along the quantized gradient
/// direction (4 sectors, ties toward the lower sector index).
FloatImage nonmax_suppress(const FloatImage& magnitude, const FloatImage& direction);

/// Two-threshold flood: pixels >= high seed, pixels in [low, high) survive
/// iff 8-connected to a seed through pixels >= low.
EdgeMap hysteresis(const FloatImage& suppressed, double low, double high);

/// Full pipeline: blur -> sobel -> non-max suppression -> hysteresis.
/// Gradients are computed on 0-255 intensities so the thresholds keep their scale.
EdgeMap canny(const GrayImage& img, const CannyParams& params = {});

std::size_t edge_count(const EdgeMap& edges);

}  // namespace anoscore
