#pragma once

#include <memory>
#include <vector>

#include "anoscore/canny.hpp"
#include "anoscore/image.hpp"
#include "anoscore/inversion.hpp"

namespace anoscore {

/// Maps an image to a fixed-length feature vector. Stand-in slot for the
/// discriminator features behind the A_D score; implementations must be
/// deterministic.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual int feature_dim() const = 0;
    virtual std::vector<double> features(const GrayImage& img) const = 0;
};

/// Signed difference of Canny edge counts between input and reconstruction.
double score_canny(const GrayImage& x, const GrayImage& xhat, const CannyParams& params = {});

/// Mean squared pixel difference on raw 0-255 intensities.
double score_mse(const GrayImage& x, const GrayImage& xhat);

/// 10*log10(255^2 / MSE); +infinity when MSE is 0.
double score_psnr(const GrayImage& x, const GrayImage& xhat);

/// l2 norm of the difference after independent per-image min-max normalization.
double score_residual(const GrayImage& x, const GrayImage& xhat);

/// Euclidean norm of the latent vector.
double score_origin(const LatentVector& z);

/// Mean squared difference of extracted features.
double score_feature(const GrayImage& x, const GrayImage& xhat, const FeatureExtractor& f);

constexpr double kDefaultKappa = 1.0;
constexpr double kDefaultAlpha = 0.05;

/// score_mse + kappa * score_feature.
double score_f_anogan(const GrayImage& x, const GrayImage& xhat, const FeatureExtractor& f,
                      double kappa = kDefaultKappa);

/// alpha * score_residual + (1 - alpha) * score_origin.
double score_pg_anogan(const GrayImage& x, const GrayImage& xhat, const LatentVector& z,
                       double alpha = kDefaultAlpha);

/// Edge count of the input alone; needs no reconstruction.
std::size_t score_baseline(const GrayImage& x, const CannyParams& params = {});

/// Deterministic hand-crafted extractor: for each of 3 Gaussian pyramid levels
/// (64, 32, 16), cell means of intensity and of Sobel gradient magnitude over
/// an 8x8 grid. feature_dim = 3 * 2 * 64 = 384 for 64x64 inputs.
std::unique_ptr<FeatureExtractor> default_feature_extractor();

}  // namespace anoscore
