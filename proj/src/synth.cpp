#include "anoscore/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "anoscore/pgm.hpp"
#include "anoscore/rng.hpp"

namespace anoscore {
namespace {

struct Blob {
    double cx, cy;   // center, pixel units
    double rx, ry;   // semi-axes
    double theta;    // rotation
};

// Approximate coverage of the pixel centered at (px+0.5, py+0.5) by the
// ellipse: 1 inside, 0 outside, linear ramp about one pixel wide at the rim.
double coverage(const Blob& b, int px, int py) {
    double dx = px + 0.5 - b.cx;
    double dy = py + 0.5 - b.cy;
    double c = std::cos(b.theta), s = std::sin(b.theta);
    double u = (dx * c + dy * s) / b.rx;
    double v = (-dx * s + dy * c) / b.ry;
    double d = std::sqrt(u * u + v * v);
    double ramp = (1.0 - d) * std::min(b.rx, b.ry) + 0.5;
    return std::clamp(ramp, 0.0, 1.0);
}

std::uint64_t patch_key(std::uint64_t seed, Label label, int index) {
    std::uint64_t tag = (label == Label::Anomaly ? 0x8000000000000000ull : 0ull) |
                        static_cast<std::uint64_t>(index);
    return SplitMix64::mix(seed) ^ SplitMix64::mix(tag);
}

}  // namespace

void SynthConfig::validate() const {
    auto ok_range = [](auto r) { return r.first <= r.second && r.first >= 0; };
    if (!ok_range(normal_blob_count_range) || !ok_range(anomaly_blob_count_range) ||
        !ok_range(anomaly_cluster_count_range))
        throw std::invalid_argument("SynthConfig: empty count range");
    if (!(blob_radius_range_px.first > 0 &&
          blob_radius_range_px.first <= blob_radius_range_px.second))
        throw std::invalid_argument("SynthConfig: bad radius range");
    if (background_intensity < 0 || background_intensity > 255 || blob_intensity < 0 ||
        blob_intensity > 255)
        throw std::invalid_argument("SynthConfig: intensities must be in 0-255");
    if (noise_std < 0) throw std::invalid_argument("SynthConfig: noise_std must be >= 0");
    if (n_normal < 0 || n_anomaly < 0)
        throw std::invalid_argument("SynthConfig: counts must be >= 0");
}

GrayImage gen_patch(const SynthConfig& cfg, Label label, int index) {
    cfg.validate();
    SplitMix64 rng(patch_key(cfg.seed, label, index));

    std::vector<Blob> blobs;
    if (label == Label::Anomaly) {
        int count = rng.uniform_int(cfg.anomaly_blob_count_range.first,
                                    cfg.anomaly_blob_count_range.second);
        int n_clusters = rng.uniform_int(cfg.anomaly_cluster_count_range.first,
                                         cfg.anomaly_cluster_count_range.second);
        std::vector<std::pair<double, double>> centers(n_clusters);
        for (auto& c : centers) {
            c.first = rng.uniform(8.0, 56.0);
            c.second = rng.uniform(8.0, 56.0);
        }
        for (int i = 0; i < count; ++i) {
            const auto& c = centers[rng.uniform_int(0, n_clusters - 1)];
            Blob b;
            b.cx = c.first + rng.normal() * cfg.anomaly_cluster_scatter_px;
            b.cy = c.second + rng.normal() * cfg.anomaly_cluster_scatter_px;
            b.rx = rng.uniform(cfg.blob_radius_range_px.first, cfg.blob_radius_range_px.second);
            b.ry = rng.uniform(cfg.blob_radius_range_px.first, cfg.blob_radius_range_px.second);
            b.theta = rng.uniform(0.0, std::numbers::pi);
            blobs.push_back(b);
        }
    } else {
        int count = rng.uniform_int(cfg.normal_blob_count_range.first,
                                    cfg.normal_blob_count_range.second);
        for (int i = 0; i < count; ++i) {
            Blob b;
            b.cx = rng.uniform(4.0, 60.0);
            b.cy = rng.uniform(4.0, 60.0);
            b.rx = rng.uniform(cfg.blob_radius_range_px.first, cfg.blob_radius_range_px.second);
            b.ry = rng.uniform(cfg.blob_radius_range_px.first, cfg.blob_radius_range_px.second);
            b.theta = rng.uniform(0.0, std::numbers::pi);
            blobs.push_back(b);
        }
    }

    FloatImage img(kPatchSide, kPatchSide, static_cast<double>(cfg.background_intensity));
    for (const Blob& b : blobs) {
        // Blobs only touch pixels near their bounding box.
        double rmax = std::max(b.rx, b.ry) + 1.0;
        int x0 = std::max(0, static_cast<int>(std::floor(b.cx - rmax - 1)));
        int x1 = std::min(kPatchSide - 1, static_cast<int>(std::ceil(b.cx + rmax + 1)));
        int y0 = std::max(0, static_cast<int>(std::floor(b.cy - rmax - 1)));
        int y1 = std::min(kPatchSide - 1, static_cast<int>(std::ceil(b.cy + rmax + 1)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                double cov = coverage(b, x, y);
                if (cov > 0.0)
                    img.at(x, y) += (cfg.blob_intensity - img.at(x, y)) * cov;
            }
    }
    GrayImage out(kPatchSide, kPatchSide);
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        double v = img.values[i] + rng.normal() * cfg.noise_std;
        out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
    }
    return out;
}

std::vector<ManifestEntry> gen_dataset(const SynthConfig& cfg,
                                       const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    std::vector<ManifestEntry> entries;
    auto emit = [&](Label label, int count, const char* name) {
        for (int i = 0; i < count; ++i) {
            ManifestEntry e;
            e.id = std::string(name) + "_" + std::to_string(i);
            e.label = label;
            e.path = out_dir / (e.id + ".pgm");
            save_pgm(gen_patch(cfg, label, i), e.path);
            entries.push_back(std::move(e));
        }
    };
    emit(Label::Normal, cfg.n_normal, "normal");
    emit(Label::Anomaly, cfg.n_anomaly, "anomaly");

    std::ofstream manifest(out_dir / "manifest.csv", std::ios::binary);
    if (!manifest) throw std::runtime_error("cannot write manifest.csv");
    manifest << "id,label,path\n";
    for (const auto& e : entries)
        manifest << e.id << ',' << (e.label == Label::Anomaly ? "anomaly" : "normal") << ','
                 << e.path.filename().string() << '\n';
    if (!manifest) throw std::runtime_error("manifest write failed");
    return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& manifest_csv) {
    std::ifstream in(manifest_csv);
    if (!in) throw std::runtime_error("cannot open " + manifest_csv.string());
    std::string line;
    if (!std::getline(in, line) || line != "id,label,path")
        throw std::runtime_error(manifest_csv.string() + ": bad manifest header");
    std::vector<ManifestEntry> entries;
    std::filesystem::path base = manifest_csv.parent_path();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto c1 = line.find(',');
        auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::runtime_error(manifest_csv.string() + ": malformed manifest row");
        ManifestEntry e;
        e.id = line.substr(0, c1);
        std::string lab = line.substr(c1 + 1, c2 - c1 - 1);
        if (lab == "anomaly") e.label = Label::Anomaly;
        else if (lab == "normal") e.label = Label::Normal;
        else throw std::runtime_error(manifest_csv.string() + ": unknown label " + lab);
        std::filesystem::path p = line.substr(c2 + 1);
        e.path = p.is_absolute() ? p : base / p;
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace anoscore
