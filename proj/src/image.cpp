#include "anoscore/image.hpp"

#include <algorithm>
#include <cmath>

namespace anoscore {

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("GrayImage: dimensions must be positive");
}

GrayImage::GrayImage(int w, int h, std::vector<std::uint8_t> px)
    : width(w), height(h), pixels(std::move(px)) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("GrayImage: dimensions must be positive");
    if (pixels.size() != static_cast<std::size_t>(w) * h)
        throw std::invalid_argument("GrayImage: pixel count does not match dimensions");
}

FloatImage::FloatImage(int w, int h, double fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("FloatImage: dimensions must be positive");
}

FloatImage::FloatImage(int w, int h, std::vector<double> vals)
    : width(w), height(h), values(std::move(vals)) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("FloatImage: dimensions must be positive");
    if (values.size() != static_cast<std::size_t>(w) * h)
        throw std::invalid_argument("FloatImage: value count does not match dimensions");
}

FloatImage to_float(const GrayImage& img, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("to_float: lo must be < hi");
    FloatImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.values[i] = lo + (img.pixels[i] / 255.0) * (hi - lo);
    return out;
}

GrayImage quantize(const FloatImage& img, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("quantize: lo must be < hi");
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        double v = std::clamp(img.values[i], lo, hi);
        double t = (v - lo) / (hi - lo) * 255.0;
        out.pixels[i] = static_cast<std::uint8_t>(std::round(t));
    }
    return out;
}

FloatImage minmax_normalize(const GrayImage& img) {
    auto [mn, mx] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    FloatImage out(img.width, img.height);
    if (*mn == *mx) return out;  // constant image maps to zeros
    double span = static_cast<double>(*mx) - static_cast<double>(*mn);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.values[i] = (img.pixels[i] - static_cast<double>(*mn)) / span;
    return out;
}

void require_same_shape(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("image dimensions do not match");
}

}  // namespace anoscore
