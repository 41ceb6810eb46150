#include "anoscore/canny.hpp"

#include <cmath>
#include <numbers>

namespace anoscore {
namespace {

// reflect-101: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
int mirror(int i, int n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    return i;
}

std::vector<double> gaussian_kernel(int kernel_size, double sigma) {
    int r = kernel_size / 2;
    std::vector<double> k(kernel_size);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[i + r] = std::exp(-0.5 * (i / sigma) * (i / sigma));
        sum += k[i + r];
    }
    for (double& v : k) v /= sum;
    return k;
}

FloatImage convolve_separable(const FloatImage& img, const std::vector<double>& k) {
    int r = static_cast<int>(k.size()) / 2;
    FloatImage tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int j = -r; j <= r; ++j) acc += k[j + r] * img.at(mirror(x + j, img.width), y);
            tmp.at(x, y) = acc;
        }
    FloatImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int j = -r; j <= r; ++j) acc += k[j + r] * tmp.at(x, mirror(y + j, img.height));
            out.at(x, y) = acc;
        }
    return out;
}

}  // namespace

void CannyParams::validate() const {
    if (kernel_size < 3 || kernel_size % 2 == 0)
        throw std::invalid_argument("CannyParams: kernel_size must be odd and >= 3");
    if (!(sigma > 0)) throw std::invalid_argument("CannyParams: sigma must be positive");
    if (low_threshold < 0 || low_threshold > high_threshold)
        throw std::invalid_argument("CannyParams: need 0 <= low <= high");
}

FloatImage gaussian_blur(const FloatImage& img, int kernel_size, double sigma) {
    if (kernel_size < 3 || kernel_size % 2 == 0)
        throw std::invalid_argument("gaussian_blur: kernel_size must be odd and >= 3");
    if (!(sigma > 0)) throw std::invalid_argument("gaussian_blur: sigma must be positive");
    if (img.width < kernel_size || img.height < kernel_size)
        throw std::invalid_argument("gaussian_blur: image smaller than kernel");
    return convolve_separable(img, gaussian_kernel(kernel_size, sigma));
}

Gradients sobel_gradients(const FloatImage& img) {
    if (img.width < 3 || img.height < 3)
        throw std::invalid_argument("sobel_gradients: image must be at least 3x3");
    static constexpr int SX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static constexpr int SY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    Gradients g{FloatImage(img.width, img.height), FloatImage(img.width, img.height)};
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double gx = 0.0, gy = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    double v = img.at(mirror(x + dx, img.width), mirror(y + dy, img.height));
                    gx += SX[dy + 1][dx + 1] * v;
                    gy += SY[dy + 1][dx + 1] * v;
                }
            g.magnitude.at(x, y) = std::hypot(gx, gy);
            g.direction.at(x, y) = std::atan2(gy, gx);
        }
    return g;
}

FloatImage nonmax_suppress(const FloatImage& magnitude, const FloatImage& direction) {
    if (magnitude.width != direction.width || magnitude.height != direction.height)
        throw std::invalid_argument("nonmax_suppress: dimension mismatch");
    // Neighbor offsets per direction sector: 0, 45, 90, 135 degrees.
    static constexpr int OFF[4][2] = {{1, 0}, {1, 1}, {0, 1}, {1, -1}};
    FloatImage out(magnitude.width, magnitude.height);
    for (int y = 0; y < magnitude.height; ++y)
        for (int x = 0; x < magnitude.width; ++x) {
            double deg = direction.at(x, y) * 180.0 / std::numbers::pi;
            deg = std::fmod(deg + 360.0, 180.0);
            // Boundary angles fall into the lower sector index; 157.5 wraps to sector 0.
            int sector;
            if (deg <= 22.5 || deg >= 157.5) sector = 0;
            else if (deg <= 67.5) sector = 1;
            else if (deg <= 112.5) sector = 2;
            else sector = 3;
            auto neighbor = [&](int sgn) {
                int nx = x + sgn * OFF[sector][0];
                int ny = y + sgn * OFF[sector][1];
                if (nx < 0 || nx >= magnitude.width || ny < 0 || ny >= magnitude.height) return 0.0;
                return magnitude.at(nx, ny);
            };
            double m = magnitude.at(x, y);
            out.at(x, y) = (m >= neighbor(+1) && m >= neighbor(-1)) ? m : 0.0;
        }
    return out;
}

EdgeMap hysteresis(const FloatImage& suppressed, double low, double high) {
    if (low > high) throw std::invalid_argument("hysteresis: low must be <= high");
    EdgeMap out(suppressed.width, suppressed.height);
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < suppressed.height; ++y)
        for (int x = 0; x < suppressed.width; ++x)
            if (suppressed.at(x, y) >= high && !out.at(x, y)) {
                out.bits[static_cast<std::size_t>(y) * out.width + x] = 1;
                stack.emplace_back(x, y);
                while (!stack.empty()) {
                    auto [cx, cy] = stack.back();
                    stack.pop_back();
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            int nx = cx + dx, ny = cy + dy;
                            if (nx < 0 || nx >= out.width || ny < 0 || ny >= out.height) continue;
                            std::size_t idx = static_cast<std::size_t>(ny) * out.width + nx;
                            if (!out.bits[idx] && suppressed.at(nx, ny) >= low) {
                                out.bits[idx] = 1;
                                stack.emplace_back(nx, ny);
                            }
                        }
                }
            }
    return out;
}

EdgeMap canny(const GrayImage& img, const CannyParams& params) {
    params.validate();
    if (img.width < params.kernel_size || img.height < params.kernel_size ||
        img.width < 3 || img.height < 3)
        throw std::invalid_argument("canny: image too small for the requested kernel");
    FloatImage blurred = gaussian_blur(to_float(img, 0.0, 255.0), params.kernel_size, params.sigma);
    Gradients g = sobel_gradients(blurred);
    FloatImage thin = nonmax_suppress(g.magnitude, g.direction);
    return hysteresis(thin, params.low_threshold, params.high_threshold);
}

std::size_t edge_count(const EdgeMap& edges) {
    std::size_t n = 0;
    for (std::uint8_t b : edges.bits) n += (b != 0);
    return n;
}

}  // namespace anoscore
