#include "anoscore/metrics.hpp"

#include <cmath>
#include <limits>

namespace anoscore {

double score_canny(const GrayImage& x, const GrayImage& xhat, const CannyParams& params) {
    require_same_shape(x, xhat);
    auto nx = static_cast<double>(edge_count(canny(x, params)));
    auto nxhat = static_cast<double>(edge_count(canny(xhat, params)));
    return nx - nxhat;
}

double score_mse(const GrayImage& x, const GrayImage& xhat) {
    require_same_shape(x, xhat);
    double s = 0.0;
    for (std::size_t i = 0; i < x.pixels.size(); ++i) {
        double d = static_cast<double>(x.pixels[i]) - static_cast<double>(xhat.pixels[i]);
        s += d * d;
    }
    return s / static_cast<double>(x.pixels.size());
}

double score_psnr(const GrayImage& x, const GrayImage& xhat) {
    double mse = score_mse(x, xhat);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double score_residual(const GrayImage& x, const GrayImage& xhat) {
    require_same_shape(x, xhat);
    FloatImage a = minmax_normalize(x);
    FloatImage b = minmax_normalize(xhat);
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double score_origin(const LatentVector& z) { return z.norm(); }

double score_feature(const GrayImage& x, const GrayImage& xhat, const FeatureExtractor& f) {
    require_same_shape(x, xhat);
    std::vector<double> fx = f.features(x);
    std::vector<double> fy = f.features(xhat);
    if (fx.size() != fy.size() || fx.size() != static_cast<std::size_t>(f.feature_dim()))
        throw std::runtime_error("score_feature: extractor produced wrong dimension");
    double s = 0.0;
    for (std::size_t i = 0; i < fx.size(); ++i) {
        double d = fx[i] - fy[i];
        s += d * d;
    }
    return s / static_cast<double>(fx.size());
}

double score_f_anogan(const GrayImage& x, const GrayImage& xhat, const FeatureExtractor& f,
                      double kappa) {
    return score_mse(x, xhat) + kappa * score_feature(x, xhat, f);
}

double score_pg_anogan(const GrayImage& x, const GrayImage& xhat, const LatentVector& z,
                       double alpha) {
    return alpha * score_residual(x, xhat) + (1.0 - alpha) * score_origin(z);
}

std::size_t score_baseline(const GrayImage& x, const CannyParams& params) {
    return edge_count(canny(x, params));
}

namespace {

class PyramidFeatures : public FeatureExtractor {
public:
    static constexpr int kLevels = 3;
    static constexpr int kGrid = 8;

    int feature_dim() const override { return kLevels * 2 * kGrid * kGrid; }

    std::vector<double> features(const GrayImage& img) const override {
        std::vector<double> out;
        out.reserve(feature_dim());
        FloatImage level = to_float(img, 0.0, 1.0);
        for (int l = 0; l < kLevels; ++l) {
            append_cell_means(level, out);
            Gradients g = sobel_gradients(level);
            append_cell_means(g.magnitude, out);
            if (l + 1 < kLevels) level = half(level);
        }
        return out;
    }

private:
    static void append_cell_means(const FloatImage& img, std::vector<double>& out) {
        for (int gy = 0; gy < kGrid; ++gy)
            for (int gx = 0; gx < kGrid; ++gx) {
                int x0 = gx * img.width / kGrid, x1 = (gx + 1) * img.width / kGrid;
                int y0 = gy * img.height / kGrid, y1 = (gy + 1) * img.height / kGrid;
                double s = 0.0;
                int n = 0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) {
                        s += img.at(x, y);
                        ++n;
                    }
                out.push_back(n > 0 ? s / n : 0.0);
            }
    }

    static FloatImage half(const FloatImage& img) {
        FloatImage b = gaussian_blur(img, 5, 1.0);
        FloatImage out((img.width + 1) / 2, (img.height + 1) / 2);
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) out.at(x, y) = b.at(2 * x, 2 * y);
        return out;
    }
};

}  // namespace

std::unique_ptr<FeatureExtractor> default_feature_extractor() {
    return std::make_unique<PyramidFeatures>();
}

}  // namespace anoscore
