#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "anoscore/eval.hpp"
#include "anoscore/image.hpp"

namespace anoscore {

/// Synthetic 64x64 patch generator. The normal class scatters a few blobs
/// uniformly; the anomaly class packs many blobs into a handful of loose
/// clusters, so the classes differ in edge structure rather than a simple
/// intensity shift.
struct SynthConfig {
    std::uint64_t seed = 0;
    int n_normal = 0;
    int n_anomaly = 0;
    std::pair<int, int> normal_blob_count_range{4, 10};
    std::pair<int, int> anomaly_blob_count_range{25, 45};
    std::pair<double, double> blob_radius_range_px{2.0, 5.0};
    std::pair<int, int> anomaly_cluster_count_range{3, 5};
    double anomaly_cluster_scatter_px = 8.0;
    int background_intensity = 220;
    int blob_intensity = 60;
    double noise_std = 6.0;

    void validate() const;
};

constexpr int kPatchSide = 64;

/// Deterministic function of (seed, label, index); blobs are anti-aliased
/// ellipses composited over the background, then Gaussian noise, clamp, round.
GrayImage gen_patch(const SynthConfig& cfg, Label label, int index);

struct ManifestEntry {
    std::string id;
    Label label;
    std::filesystem::path path;
};

/// Writes `<class>_<index>.pgm` files plus `manifest.csv` (id,label,path).
/// Returns the manifest entries in file order; deterministic.
std::vector<ManifestEntry> gen_dataset(const SynthConfig& cfg,
                                       const std::filesystem::path& out_dir);

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& manifest_csv);

}  // namespace anoscore
