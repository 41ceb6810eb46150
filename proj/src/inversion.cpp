#include "anoscore/inversion.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "anoscore/canny.hpp"
#include "anoscore/rng.hpp"

namespace anoscore {

static_assert(std::endian::native == std::endian::little,
              "TGEN serialization assumes a little-endian host");

namespace {

constexpr int kImageSide = 64;
constexpr int kOutputDim = kImageSide * kImageSide;
constexpr std::uint32_t kTgenVersion = 1;
constexpr char kTgenMagic[4] = {'T', 'G', 'E', 'N'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

void write_floats(std::ostream& out, const std::vector<float>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> read_floats(std::istream& in, std::size_t n) {
    std::vector<float> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(float)));
    return v;
}

}  // namespace

double LatentVector::norm() const {
    double s = 0.0;
    for (double c : components) s += c * c;
    return std::sqrt(s);
}

ToyGeneratorParams ToyGeneratorParams::random_init(std::uint32_t d, std::uint32_t h,
                                                   std::uint64_t seed) {
    if (d == 0 || h == 0)
        throw std::invalid_argument("ToyGeneratorParams: dimensions must be positive");
    ToyGeneratorParams p;
    p.d = d;
    p.h = h;
    p.seed = seed;
    SplitMix64 rng(SplitMix64::mix(seed));
    auto fill = [&](std::vector<float>& v, std::size_t n, double fan_in) {
        double a = 1.0 / std::sqrt(fan_in);
        v.resize(n);
        for (auto& x : v) x = static_cast<float>(rng.uniform(-a, a));
    };
    fill(p.w1, static_cast<std::size_t>(h) * d, d);
    fill(p.b1, h, d);
    fill(p.w2, static_cast<std::size_t>(kOutputDim) * h, h);
    fill(p.b2, kOutputDim, h);
    return p;
}

void ToyGeneratorParams::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(kTgenMagic, 4);
    write_u32(out, kTgenVersion);
    write_u32(out, d);
    write_u32(out, h);
    write_floats(out, w1);
    write_floats(out, b1);
    write_floats(out, w2);
    write_floats(out, b2);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

ToyGeneratorParams ToyGeneratorParams::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kTgenMagic, 4) != 0)
        throw std::runtime_error(path.string() + ": not a TGEN file");
    std::uint32_t version = read_u32(in);
    if (version != kTgenVersion)
        throw std::runtime_error(path.string() + ": unsupported TGEN version");
    ToyGeneratorParams p;
    p.d = read_u32(in);
    p.h = read_u32(in);
    if (!in || p.d == 0 || p.h == 0)
        throw std::runtime_error(path.string() + ": malformed TGEN header");
    p.w1 = read_floats(in, static_cast<std::size_t>(p.h) * p.d);
    p.b1 = read_floats(in, p.h);
    p.w2 = read_floats(in, static_cast<std::size_t>(kOutputDim) * p.h);
    p.b2 = read_floats(in, kOutputDim);
    if (!in) throw std::runtime_error(path.string() + ": truncated TGEN file");
    return p;
}

ToyGenerator::ToyGenerator(ToyGeneratorParams params) : params_(std::move(params)) {
    const auto& p = params_;
    if (p.w1.size() != static_cast<std::size_t>(p.h) * p.d || p.b1.size() != p.h ||
        p.w2.size() != static_cast<std::size_t>(kOutputDim) * p.h ||
        p.b2.size() != static_cast<std::size_t>(kOutputDim))
        throw std::invalid_argument("ToyGenerator: inconsistent parameter shapes");
}

FloatImage ToyGenerator::generate(const LatentVector& z) const {
    const auto& p = params_;
    if (z.dim() != static_cast<int>(p.d))
        throw std::invalid_argument("ToyGenerator::generate: latent dimension mismatch");
    std::vector<double> hidden(p.h);
    for (std::uint32_t i = 0; i < p.h; ++i) {
        double a = p.b1[i];
        for (std::uint32_t j = 0; j < p.d; ++j) a += p.w1[i * p.d + j] * z.components[j];
        hidden[i] = a > 0.0 ? a : 0.0;
    }
    FloatImage out(kImageSide, kImageSide);
    for (int i = 0; i < kOutputDim; ++i) {
        double a = p.b2[i];
        const float* row = &p.w2[static_cast<std::size_t>(i) * p.h];
        for (std::uint32_t j = 0; j < p.h; ++j) a += row[j] * hidden[j];
        out.values[i] = std::tanh(a);
    }
    return out;
}

std::vector<double> ToyGenerator::pullback(const LatentVector& z, const FloatImage& out_grad) const {
    const auto& p = params_;
    if (z.dim() != static_cast<int>(p.d))
        throw std::invalid_argument("ToyGenerator::pullback: latent dimension mismatch");
    if (out_grad.size() != static_cast<std::size_t>(kOutputDim))
        throw std::invalid_argument("ToyGenerator::pullback: gradient shape mismatch");

    std::vector<double> pre(p.h);  // pre-activations
    std::vector<double> hidden(p.h);
    for (std::uint32_t i = 0; i < p.h; ++i) {
        double a = p.b1[i];
        for (std::uint32_t j = 0; j < p.d; ++j) a += p.w1[i * p.d + j] * z.components[j];
        pre[i] = a;
        hidden[i] = a > 0.0 ? a : 0.0;
    }
    // dL/dhidden = W2^T ((1 - y^2) * g)
    std::vector<double> dh(p.h, 0.0);
    for (int i = 0; i < kOutputDim; ++i) {
        double a = p.b2[i];
        const float* row = &p.w2[static_cast<std::size_t>(i) * p.h];
        for (std::uint32_t j = 0; j < p.h; ++j) a += row[j] * hidden[j];
        double y = std::tanh(a);
        double gy = (1.0 - y * y) * out_grad.values[i];
        for (std::uint32_t j = 0; j < p.h; ++j) dh[j] += row[j] * gy;
    }
    // relu subgradient at 0 is 0
    for (std::uint32_t i = 0; i < p.h; ++i)
        if (pre[i] <= 0.0) dh[i] = 0.0;
    std::vector<double> dz(p.d, 0.0);
    for (std::uint32_t i = 0; i < p.h; ++i)
        for (std::uint32_t j = 0; j < p.d; ++j) dz[j] += p.w1[i * p.d + j] * dh[i];
    return dz;
}

namespace {

class MseDistance : public Distance {
public:
    double value(const FloatImage& t, const FloatImage& c) const override {
        check(t, c);
        double s = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            double d = c.values[i] - t.values[i];
            s += d * d;
        }
        return s / static_cast<double>(t.size());
    }
    FloatImage gradient(const FloatImage& t, const FloatImage& c) const override {
        check(t, c);
        FloatImage g(t.width, t.height);
        double inv = 2.0 / static_cast<double>(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            g.values[i] = inv * (c.values[i] - t.values[i]);
        return g;
    }

private:
    static void check(const FloatImage& t, const FloatImage& c) {
        if (t.width != c.width || t.height != c.height)
            throw std::invalid_argument("mse_distance: dimension mismatch");
    }
};

constexpr int kPyrKernel = 5;
constexpr double kPyrSigma = 1.0;

int mirror(int i, int n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    return i;
}

std::vector<double> pyr_kernel() {
    std::vector<double> k(kPyrKernel);
    double sum = 0.0;
    for (int i = -2; i <= 2; ++i) {
        k[i + 2] = std::exp(-0.5 * (i / kPyrSigma) * (i / kPyrSigma));
        sum += k[i + 2];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Blur (kernel 5, sigma 1, reflect-101) then keep even-index pixels.
FloatImage downsample2(const FloatImage& img) {
    FloatImage b = gaussian_blur(img, kPyrKernel, kPyrSigma);
    FloatImage out((img.width + 1) / 2, (img.height + 1) / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = b.at(2 * x, 2 * y);
    return out;
}

/// Exact adjoint of downsample2 (zero-insertion followed by the scatter
/// adjoint of the reflect-101 separable convolution).
FloatImage downsample2_adjoint(const FloatImage& g, int up_w, int up_h) {
    FloatImage z(up_w, up_h);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) z.at(2 * x, 2 * y) = g.at(x, y);
    const std::vector<double> k = pyr_kernel();
    FloatImage tmp(up_w, up_h);
    for (int y = 0; y < up_h; ++y)
        for (int x = 0; x < up_w; ++x) {
            double v = z.at(x, y);
            if (v == 0.0) continue;
            for (int j = -2; j <= 2; ++j) tmp.at(x, mirror(y + j, up_h)) += k[j + 2] * v;
        }
    FloatImage out(up_w, up_h);
    for (int y = 0; y < up_h; ++y)
        for (int x = 0; x < up_w; ++x) {
            double v = tmp.at(x, y);
            if (v == 0.0) continue;
            for (int j = -2; j <= 2; ++j) out.at(mirror(x + j, up_w), y) += k[j + 2] * v;
        }
    return out;
}

class PyramidDistance : public Distance {
public:
    explicit PyramidDistance(int levels) : levels_(levels) {
        if (levels < 1) throw std::invalid_argument("pyramid_distance: levels must be >= 1");
    }

    double value(const FloatImage& t, const FloatImage& c) const override {
        check(t, c);
        FloatImage ts = t, cs = c;
        double total = 0.0;
        for (int l = 0; l < levels_; ++l) {
            double s = 0.0;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                double d = cs.values[i] - ts.values[i];
                s += d * d;
            }
            total += s / static_cast<double>(ts.size());
            if (l + 1 < levels_) {
                ts = downsample2(ts);
                cs = downsample2(cs);
            }
        }
        return total;
    }

    FloatImage gradient(const FloatImage& t, const FloatImage& c) const override {
        check(t, c);
        std::vector<FloatImage> ts{t}, cs{c};
        for (int l = 1; l < levels_; ++l) {
            ts.push_back(downsample2(ts.back()));
            cs.push_back(downsample2(cs.back()));
        }
        // Accumulate per-level MSE gradients, pulled back level by level.
        FloatImage grad;
        for (int l = levels_ - 1; l >= 0; --l) {
            FloatImage g(ts[l].width, ts[l].height);
            double inv = 2.0 / static_cast<double>(ts[l].size());
            for (std::size_t i = 0; i < ts[l].size(); ++i)
                g.values[i] = inv * (cs[l].values[i] - ts[l].values[i]);
            if (l == levels_ - 1) {
                grad = std::move(g);
            } else {
                FloatImage up = downsample2_adjoint(grad, ts[l].width, ts[l].height);
                for (std::size_t i = 0; i < up.size(); ++i) up.values[i] += g.values[i];
                grad = std::move(up);
            }
        }
        return grad;
    }

private:
    void check(const FloatImage& t, const FloatImage& c) const {
        if (t.width != c.width || t.height != c.height)
            throw std::invalid_argument("pyramid_distance: dimension mismatch");
        int side = std::min(t.width, t.height);
        for (int l = 1; l < levels_; ++l) side = (side + 1) / 2;
        if (side < kPyrKernel)
            throw std::invalid_argument("pyramid_distance: image too small for requested levels");
    }

    int levels_;
};

}  // namespace

std::unique_ptr<Distance> mse_distance() { return std::make_unique<MseDistance>(); }

std::unique_ptr<Distance> pyramid_distance(int levels) {
    return std::make_unique<PyramidDistance>(levels);
}

ProjectionResult project(const Generator& g, const GrayImage& x, const ProjectionConfig& cfg) {
    if (cfg.steps < 1) throw std::invalid_argument("project: steps must be >= 1");
    if (!(cfg.step_size > 0)) throw std::invalid_argument("project: step_size must be positive");
    if (x.width != kImageSide || x.height != kImageSide)
        throw std::invalid_argument("project: input must be 64x64");

    std::unique_ptr<Distance> owned;
    const Distance* dist = cfg.custom_distance;
    if (dist == nullptr) {
        owned = cfg.distance == DistanceKind::Mse ? mse_distance()
                                                  : pyramid_distance(cfg.pyramid_levels);
        dist = owned.get();
    }

    FloatImage target = to_float(x, -1.0, 1.0);
    LatentVector z = LatentVector::zeros(g.latent_dim());
    if (cfg.init == InitKind::SeededRandom) {
        SplitMix64 rng(SplitMix64::mix(cfg.seed));
        for (double& c : z.components) c = rng.normal();
    }

    ProjectionResult res;
    FloatImage y = g.generate(z);
    double loss = dist->value(target, y);
    if (!std::isfinite(loss)) throw ProjectionError(0, "project: non-finite initial loss");
    res.loss_trace.reserve(cfg.steps + 1);
    res.loss_trace.push_back(loss);

    double warm_step = cfg.step_size;
    for (int step = 0; step < cfg.steps; ++step) {
        FloatImage img_grad = dist->gradient(target, y);
        std::vector<double> zg = g.pullback(z, img_grad);
        double gn = 0.0;
        for (double v : zg) gn += v * v;
        gn = std::sqrt(gn);
        if (!std::isfinite(gn)) throw ProjectionError(step, "project: non-finite gradient");
        if (gn == 0.0) {  // stationary point, nothing to do
            res.loss_trace.push_back(loss);
            continue;
        }
        // Descend along the normalized gradient so step_size is a latent-space
        // step length independent of the loss scale. Backtracking warm-starts
        // from twice the last accepted length, capped at the nominal size.
        double step_len = std::min(cfg.step_size, 2.0 * warm_step);
        bool accepted = false;
        for (int attempt = 0; attempt <= 20; ++attempt) {
            LatentVector zc = z;
            for (int i = 0; i < z.dim(); ++i) zc.components[i] -= step_len * zg[i] / gn;
            FloatImage yc = g.generate(zc);
            double lc = dist->value(target, yc);
            if (!std::isfinite(lc)) throw ProjectionError(step, "project: non-finite loss");
            if (lc <= loss || !cfg.backtracking) {
                z = std::move(zc);
                y = std::move(yc);
                loss = lc;
                warm_step = step_len;
                accepted = true;
                break;
            }
            step_len *= 0.5;
        }
        if (accepted) ++res.steps_taken;
        res.loss_trace.push_back(loss);
    }

    res.z_final = std::move(z);
    res.reconstruction = quantize(y, -1.0, 1.0);
    return res;
}

}  // namespace anoscore
