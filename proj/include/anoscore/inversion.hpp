#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "anoscore/image.hpp"

namespace anoscore {

struct LatentVector {
    std::vector<double> components;

    LatentVector() = default;
    explicit LatentVector(std::vector<double> c) : components(std::move(c)) {}
    static LatentVector zeros(int dim) { return LatentVector(std::vector<double>(dim, 0.0)); }

    int dim() const { return static_cast<int>(components.size()); }
    double norm() const;
};

/// Differentiable generator interface: z -> 64x64 image in [-1,1], plus the
/// pullback (vector-Jacobian product) mapping an output-space gradient to a
/// latent-space gradient at z.
class Generator {
public:
    virtual ~Generator() = default;
    virtual int latent_dim() const = 0;
    virtual FloatImage generate(const LatentVector& z) const = 0;
    virtual std::vector<double> pullback(const LatentVector& z, const FloatImage& out_grad) const = 0;
};

/// Two-layer MLP generator: tanh(W2 * relu(W1 * z + b1) + b2) -> 64x64.
/// Weights are float32 (matching the file format); arithmetic is double.
struct ToyGeneratorParams {
    std::uint32_t d = 0;  // latent dim
    std::uint32_t h = 0;  // hidden width
    std::vector<float> w1;  // h x d, row-major
    std::vector<float> b1;  // h
    std::vector<float> w2;  // 4096 x h, row-major
    std::vector<float> b2;  // 4096
    std::uint64_t seed = 0;

    /// Seeded uniform(-a, a) init with a = 1/sqrt(fan_in).
    static ToyGeneratorParams random_init(std::uint32_t d, std::uint32_t h, std::uint64_t seed);

    /// Little-endian binary: magic "TGEN", u32 version, u32 d, u32 h,
    /// then W1, b1, W2, b2 as float32 row-major.
    void save(const std::filesystem::path& path) const;
    static ToyGeneratorParams load(const std::filesystem::path& path);
};

class ToyGenerator : public Generator {
public:
    explicit ToyGenerator(ToyGeneratorParams params);
    int latent_dim() const override { return static_cast<int>(params_.d); }
    FloatImage generate(const LatentVector& z) const override;
    std::vector<double> pullback(const LatentVector& z, const FloatImage& out_grad) const override;
    const ToyGeneratorParams& params() const { return params_; }

private:
    ToyGeneratorParams params_;
};

/// Distance between a target and a candidate image, with the exact gradient
/// of the value with respect to the candidate.
class Distance {
public:
    virtual ~Distance() = default;
    virtual double value(const FloatImage& target, const FloatImage& candidate) const = 0;
    virtual FloatImage gradient(const FloatImage& target, const FloatImage& candidate) const = 0;
};

std::unique_ptr<Distance> mse_distance();

/// Sum over `levels` resolutions of per-level MSE; each level is a Gaussian
/// blur (kernel 5, sigma 1) followed by factor-2 decimation of the previous one.
std::unique_ptr<Distance> pyramid_distance(int levels);

enum class DistanceKind { Mse, Pyramid };
enum class InitKind { Origin, SeededRandom };

struct ProjectionConfig {
    int steps = 200;
    double step_size = 0.05;
    InitKind init = InitKind::Origin;
    std::uint64_t seed = 0;
    bool backtracking = true;
    DistanceKind distance = DistanceKind::Pyramid;
    int pyramid_levels = 3;
    const Distance* custom_distance = nullptr;  // overrides `distance` when set
};

struct ProjectionResult {
    LatentVector z_final;
    GrayImage reconstruction;       // quantized from [-1,1] generator output
    std::vector<double> loss_trace;  // length steps + 1
    int steps_taken = 0;             // steps actually applied (skipped steps excluded)
};

struct ProjectionError : std::runtime_error {
    int step;
    ProjectionError(int s, const std::string& msg) : std::runtime_error(msg), step(s) {}
};

/// Latent projection by descent along the normalized gradient of the distance,
/// with loss-halving backtracking (a step that would increase the loss retries
/// with half the step length, up to 20 times, else is skipped).
ProjectionResult project(const Generator& g, const GrayImage& x, const ProjectionConfig& cfg);

}  // namespace anoscore
