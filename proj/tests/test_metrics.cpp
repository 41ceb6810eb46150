#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anoscore/canny.hpp"
#include "anoscore/metrics.hpp"
#include "anoscore/rng.hpp"

using namespace anoscore;

namespace {

GrayImage random_image(SplitMix64& rng, int w = 64, int h = 64) {
    GrayImage img(w, h);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.next_u64() % 256);
    return img;
}

// Flattened pixels on a 0-1 scale; used to relate A_D to A_MSE.
class IdentityExtractor : public FeatureExtractor {
public:
    int feature_dim() const override { return 64 * 64; }
    std::vector<double> features(const GrayImage& img) const override {
        std::vector<double> f(img.pixels.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = img.pixels[i] / 255.0;
        return f;
    }
};

GrayImage disk64(double r) {
    GrayImage img(64, 64, std::uint8_t{255});
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if ((x - 32.0) * (x - 32.0) + (y - 32.0) * (y - 32.0) <= r * r) img.at(x, y) = 0;
    return img;
}

}  // namespace

TEST_CASE("score_canny") {
    SplitMix64 rng(1);
    GrayImage x = random_image(rng);
    CHECK(score_canny(x, x) == 0.0);

    // disk vs. near-flat reconstruction: input has many more edges
    GrayImage disk = disk64(16.0);
    GrayImage flat = quantize(gaussian_blur(to_float(disk, 0, 255), 9, 4.0), 0, 255);
    double s = score_canny(disk, flat);
    CHECK(s > 0.0);
    CHECK(s == static_cast<double>(edge_count(canny(disk))) -
                   static_cast<double>(edge_count(canny(flat))));

    CHECK_THROWS_AS(score_canny(x, GrayImage(32, 32, std::uint8_t{0})), std::invalid_argument);
}

TEST_CASE("score_mse") {
    GrayImage a(1, 1, std::vector<std::uint8_t>{0});
    GrayImage b(1, 1, std::vector<std::uint8_t>{255});
    CHECK(score_mse(a, a) == 0.0);
    CHECK(score_mse(a, b) == 65025.0);

    SplitMix64 rng(2);
    for (int t = 0; t < 10; ++t) {
        GrayImage x = random_image(rng, 8, 8);
        GrayImage y = random_image(rng, 8, 8);
        CHECK(score_mse(x, y) == score_mse(y, x));
        CHECK(score_mse(x, y) >= 0.0);
    }
}

TEST_CASE("score_psnr") {
    GrayImage a(1, 1, std::vector<std::uint8_t>{0});
    GrayImage b(1, 1, std::vector<std::uint8_t>{255});
    CHECK(std::isinf(score_psnr(a, a)));
    CHECK(score_psnr(a, b) == doctest::Approx(0.0).epsilon(1e-12));

    // MSE = 650.25 -> 20 dB; 10x10 image with one 0-vs-255 pixel scaled to hit it
    GrayImage x(10, 10, std::uint8_t{0});
    GrayImage y(10, 10, std::uint8_t{0});
    y.pixels[0] = 255;  // MSE = 65025/100
    CHECK(score_psnr(x, y) == doctest::Approx(20.0).epsilon(1e-12));

    // strictly decreasing in MSE
    GrayImage z(10, 10, std::uint8_t{0});
    z.pixels[0] = 255;
    z.pixels[1] = 255;
    CHECK(score_psnr(x, z) < score_psnr(x, y));
}

TEST_CASE("score_residual") {
    GrayImage x(2, 1, std::vector<std::uint8_t>{0, 255});
    GrayImage y(2, 1, std::vector<std::uint8_t>{255, 0});
    CHECK(score_residual(x, x) == 0.0);
    CHECK(score_residual(x, y) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // constants normalize to zeros regardless of value
    GrayImage c1(4, 4, std::uint8_t{10});
    GrayImage c2(4, 4, std::uint8_t{200});
    CHECK(score_residual(c1, c2) == 0.0);
    CHECK(score_residual(c1, c1) == 0.0);
}

TEST_CASE("score_origin") {
    CHECK(score_origin(LatentVector::zeros(5)) == 0.0);
    CHECK(score_origin(LatentVector({3.0, 4.0})) == doctest::Approx(5.0).epsilon(1e-15));

    SplitMix64 rng(3);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> v(8);
        for (auto& c : v) c = rng.normal();
        double c = rng.uniform(-3.0, 3.0);
        std::vector<double> scaled(v);
        for (auto& s : scaled) s *= c;
        CHECK(score_origin(LatentVector(scaled)) ==
              doctest::Approx(std::abs(c) * score_origin(LatentVector(v))).epsilon(1e-12));
    }
}

TEST_CASE("score_feature and the identity-extractor identity") {
    IdentityExtractor id;
    SplitMix64 rng(4);
    GrayImage x = random_image(rng);
    GrayImage y = random_image(rng);
    CHECK(score_feature(x, x, id) == 0.0);
    CHECK(score_feature(x, y, id) >= 0.0);
    CHECK(score_feature(x, y, id) * 255.0 * 255.0 == doctest::Approx(score_mse(x, y)).epsilon(1e-9));
}

TEST_CASE("composite scores are the stated linear combinations") {
    IdentityExtractor id;
    SplitMix64 rng(5);
    GrayImage x = random_image(rng);
    GrayImage y = random_image(rng);
    LatentVector z({0.3, -1.2, 0.7});

    CHECK(score_f_anogan(x, x, id) == 0.0);
    CHECK(score_f_anogan(x, y, id, 0.0) == score_mse(x, y));
    for (double kappa : {1.0, 0.25, 3.0})
        CHECK(score_f_anogan(x, y, id, kappa) ==
              doctest::Approx(score_mse(x, y) + kappa * score_feature(x, y, id)).epsilon(1e-12));

    CHECK(score_pg_anogan(x, y, z, 1.0) == doctest::Approx(score_residual(x, y)).epsilon(1e-12));
    CHECK(score_pg_anogan(x, y, z, 0.0) == doctest::Approx(score_origin(z)).epsilon(1e-12));
    for (double alpha : {0.05, 0.5, 0.9})
        CHECK(score_pg_anogan(x, y, z, alpha) ==
              doctest::Approx(alpha * score_residual(x, y) + (1 - alpha) * score_origin(z))
                  .epsilon(1e-12));
}

TEST_CASE("score_baseline equals the edge count of the input") {
    GrayImage flat(64, 64, std::uint8_t{140});
    CHECK(score_baseline(flat) == 0);
    GrayImage disk = disk64(12.0);
    CHECK(score_baseline(disk) == edge_count(canny(disk)));
}

TEST_CASE("default feature extractor") {
    auto f = default_feature_extractor();
    SplitMix64 rng(6);
    GrayImage x = random_image(rng);
    GrayImage y = random_image(rng);
    CHECK(score_feature(x, x, *f) == 0.0);
    CHECK(score_feature(x, y, *f) == score_feature(y, x, *f));
    CHECK(f->features(x).size() == static_cast<std::size_t>(f->feature_dim()));
    CHECK(f->features(y).size() == static_cast<std::size_t>(f->feature_dim()));
    CHECK(f->features(x) == f->features(x));  // deterministic
}
