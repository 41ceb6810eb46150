#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "anoscore/canny.hpp"
#include "anoscore/eval.hpp"
#include "anoscore/inversion.hpp"
#include "anoscore/metrics.hpp"
#include "anoscore/pgm.hpp"
#include "anoscore/synth.hpp"

namespace fs = std::filesystem;
using namespace anoscore;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitShape = 5;
constexpr int kExitDegenerate = 6;

int thread_budget() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("ANOSCORE_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return static_cast<int>(n);
}

// Runs fn(i) for i in [0, n) across the thread budget. Callers collect
// results into pre-sized buffers so output order never depends on scheduling.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
    int threads = std::min(thread_budget(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

struct CannyFlags {
    int kernel = 5;
    double sigma = 3.0;
    double low = 100.0;
    double high = 200.0;
    CannyParams params() const { return {kernel, sigma, low, high}; }
};

void add_canny_flags(CLI::App* cmd, CannyFlags& f) {
    cmd->add_option("--kernel", f.kernel, "Canny Gaussian kernel size (odd)");
    cmd->add_option("--sigma", f.sigma, "Canny Gaussian sigma");
    cmd->add_option("--low", f.low, "Canny low threshold");
    cmd->add_option("--high", f.high, "Canny high threshold");
}

// ---------------------------------------------------------------- synth

int run_synth(std::uint64_t seed, int n_normal, int n_anomaly, const fs::path& out) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_normal = n_normal;
    cfg.n_anomaly = n_anomaly;
    try {
        gen_dataset(cfg, out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    std::cout << (out / "manifest.csv").string() << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- gen-init

int run_gen_init(std::uint32_t dim, std::uint32_t hidden, std::uint64_t seed,
                 const fs::path& out) {
    try {
        ToyGeneratorParams::random_init(dim, hidden, seed).save(out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    std::cout << out.string() << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- project

void save_latent(const LatentVector& z, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (double c : z.components) {
        float f = static_cast<float>(c);
        out.write(reinterpret_cast<const char*>(&f), sizeof f);
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::optional<LatentVector> load_latent(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::vector<double> comps;
    float f;
    while (in.read(reinterpret_cast<char*>(&f), sizeof f)) comps.push_back(f);
    return LatentVector(std::move(comps));
}

int run_project(const fs::path& manifest_path, const fs::path& gen_params, const fs::path& out,
                const ProjectionConfig& cfg) {
    std::vector<ManifestEntry> rows;
    ToyGeneratorParams params;
    try {
        rows = load_manifest(manifest_path);
        params = ToyGeneratorParams::load(gen_params);
        fs::create_directories(out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    ToyGenerator gen(std::move(params));

    std::vector<ProjectionResult> results(rows.size());
    std::string failed_id;
    std::mutex fail_mutex;
    try {
        parallel_for(static_cast<int>(rows.size()), [&](int i) {
            try {
                GrayImage x = load_pgm(rows[i].path);
                results[i] = project(gen, x, cfg);
            } catch (const ProjectionError&) {
                std::lock_guard lock(fail_mutex);
                failed_id = rows[i].id;
                throw;
            }
        });
    } catch (const ProjectionError& e) {
        std::cerr << "error: " << e.what() << " (id " << failed_id << ", step " << e.step << ")\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }

    try {
        std::ofstream csv(out / "projections.csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write projections.csv");
        csv << "id,final_loss,initial_loss,steps_taken\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = results[i];
            save_pgm(r.reconstruction, out / (rows[i].id + "_recon.pgm"));
            save_latent(r.z_final, out / (rows[i].id + ".z"));
            csv << rows[i].id << ',' << fmt_double(r.loss_trace.back()) << ','
                << fmt_double(r.loss_trace.front()) << ',' << r.steps_taken << '\n';
        }
        if (!csv) throw std::runtime_error("projections.csv write failed");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

// ----------------------------------------------------------------- score

int run_score(const fs::path& manifest_path, const fs::path& out, const CannyParams& cp,
              double kappa, double alpha) {
    std::vector<ManifestEntry> rows;
    try {
        rows = load_manifest(manifest_path);
        fs::create_directories(out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    auto extractor = default_feature_extractor();

    std::vector<std::array<std::string, 10>> cells(rows.size());
    try {
        parallel_for(static_cast<int>(rows.size()), [&](int i) {
            GrayImage x = load_pgm(rows[i].path);
            fs::path recon_path = out / (rows[i].id + "_recon.pgm");
            fs::path latent_path = out / (rows[i].id + ".z");
            std::optional<GrayImage> xhat;
            if (fs::exists(recon_path)) xhat = load_pgm(recon_path);
            std::optional<LatentVector> z = load_latent(latent_path);

            auto& c = cells[i];
            if (xhat) {
                double ac = score_canny(x, *xhat, cp);
                c[0] = fmt_double(ac);
                c[1] = fmt_double(std::abs(ac));
                c[2] = fmt_double(score_mse(x, *xhat));
                c[3] = fmt_double(score_feature(x, *xhat, *extractor));
                c[4] = fmt_double(score_f_anogan(x, *xhat, *extractor, kappa));
                c[5] = fmt_double(score_residual(x, *xhat));
                c[9] = fmt_double(score_psnr(x, *xhat));
            }
            if (z) c[6] = fmt_double(score_origin(*z));
            if (xhat && z) c[7] = fmt_double(score_pg_anogan(x, *xhat, *z, alpha));
            c[8] = std::to_string(score_baseline(x, cp));
        });
    } catch (const PgmError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitShape;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }

    try {
        std::ofstream csv(out / "scores.csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write scores.csv");
        csv << "id,label,a_canny,a_canny_abs,a_mse,a_d,a_f_anogan,a_res,a_origin,"
               "a_pg_anogan,baseline_edges,psnr\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& c = cells[i];
            csv << rows[i].id << ',' << (rows[i].label == Label::Anomaly ? "anomaly" : "normal")
                << ',' << c[0] << ',' << c[1] << ',' << c[2] << ',' << c[3] << ',' << c[4] << ','
                << c[5] << ',' << c[6] << ',' << c[7] << ',' << c[8] << ',' << c[9] << '\n';
        }
        if (!csv) throw std::runtime_error("scores.csv write failed");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

// ------------------------------------------------------------------ eval

int run_eval(const fs::path& out, const std::string& col, int bins) {
    std::ifstream in(out / "scores.csv");
    if (!in) {
        std::cerr << "error: cannot open " << (out / "scores.csv").string() << "\n";
        return kExitIo;
    }
    std::string line;
    if (!std::getline(in, line)) {
        std::cerr << "error: empty scores.csv\n";
        return kExitIo;
    }
    std::vector<std::string> header = split_csv_row(line);
    auto it = std::find(header.begin(), header.end(), col);
    auto psnr_it = std::find(header.begin(), header.end(), "psnr");
    if (it == header.end()) {
        std::cerr << "error: unknown score column '" << col << "'\n";
        return kExitUsage;
    }
    std::size_t col_idx = static_cast<std::size_t>(it - header.begin());
    std::size_t psnr_idx = static_cast<std::size_t>(psnr_it - header.begin());

    std::vector<ScoreRecord> records;
    std::vector<double> psnr_normal;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_row(line);
        if (cells.size() != header.size()) {
            std::cerr << "error: malformed scores.csv row\n";
            return kExitIo;
        }
        Label label = cells[1] == "anomaly" ? Label::Anomaly : Label::Normal;
        if (psnr_it != header.end() && label == Label::Normal && !cells[psnr_idx].empty())
            psnr_normal.push_back(cells[psnr_idx] == "inf"
                                      ? std::numeric_limits<double>::infinity()
                                      : std::strtod(cells[psnr_idx].c_str(), nullptr));
        const std::string& cell = cells[col_idx];
        if (cell.empty() || cell == "inf" || cell == "-inf") continue;
        records.push_back({cells[0], label, std::strtod(cell.c_str(), nullptr)});
    }

    RocCurve roc;
    Histogram hist;
    try {
        roc = roc_curve(records);
        hist = histogram(records, bins);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", roc.auc);
    std::cout << "auc=" << buf << "\n";
    if (roc.auc < 0.5)
        std::cerr << "warning: auc < 0.5 for column '" << col
                  << "' -- score is correlated with the normal class\n";

    try {
        std::ofstream roc_csv(out / ("roc_" + col + ".csv"), std::ios::binary);
        roc_csv << "fpr,tpr,threshold\n";
        for (const auto& p : roc.points)
            roc_csv << fmt_double(p.fpr) << ',' << fmt_double(p.tpr) << ','
                    << fmt_double(p.threshold) << '\n';
        std::ofstream hist_csv(out / ("hist_" + col + ".csv"), std::ios::binary);
        hist_csv << "bin_lo,bin_hi,count_normal,count_anomaly\n";
        for (std::size_t i = 0; i + 1 < hist.bin_edges.size(); ++i)
            hist_csv << fmt_double(hist.bin_edges[i]) << ',' << fmt_double(hist.bin_edges[i + 1])
                     << ',' << hist.counts_normal[i] << ',' << hist.counts_anomaly[i] << '\n';
        if (!roc_csv || !hist_csv) throw std::runtime_error("eval output write failed");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }

    std::size_t finite = 0;
    for (double v : psnr_normal) finite += std::isfinite(v);
    if (finite >= 2) {
        Summary s = summarize(psnr_normal);
        char mbuf[32], sbuf[32];
        std::snprintf(mbuf, sizeof mbuf, "%.1f", s.mean);
        std::snprintf(sbuf, sizeof sbuf, "%.1f", s.stddev);
        std::cout << "psnr normal: " << mbuf << " (standard deviation: " << sbuf << ")";
        if (s.excluded > 0) std::cout << " [excluded infinite: " << s.excluded << "]";
        std::cout << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GAN-reconstruction anomaly scoring pipeline"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled patch dataset");
    std::uint64_t synth_seed = 0;
    int n_normal = 0, n_anomaly = 0;
    std::string synth_out;
    synth->add_option("--seed", synth_seed, "Dataset seed");
    synth->add_option("--normal", n_normal, "Number of normal patches")->required();
    synth->add_option("--anomaly", n_anomaly, "Number of anomaly patches")->required();
    synth->add_option("--out", synth_out, "Output directory")->required();

    // gen-init
    auto* geninit = app.add_subcommand("gen-init", "Write seeded toy generator parameters");
    std::uint32_t dim = 8, hidden = 32;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    geninit->add_option("--dim", dim, "Latent dimension");
    geninit->add_option("--hidden", hidden, "Hidden width");
    geninit->add_option("--seed", gen_seed, "Init seed");
    geninit->add_option("--out", gen_out, "Output TGEN file")->required();

    // project
    auto* proj = app.add_subcommand("project", "Project every manifest image into latent space");
    std::string proj_manifest, proj_params, proj_out, proj_distance = "pyramid";
    ProjectionConfig pcfg;
    proj->add_option("--manifest", proj_manifest, "Dataset manifest CSV")->required();
    proj->add_option("--gen-params", proj_params, "TGEN generator parameter file")->required();
    proj->add_option("--out", proj_out, "Output directory")->required();
    proj->add_option("--steps", pcfg.steps, "Descent steps");
    proj->add_option("--lr", pcfg.step_size, "Latent step length");
    proj->add_option("--distance", proj_distance, "Projection objective")
        ->check(CLI::IsMember({"mse", "pyramid"}));
    proj->add_option("--seed", pcfg.seed, "Seed for random init");
    std::string proj_init = "origin";
    proj->add_option("--init", proj_init, "Latent init")->check(CLI::IsMember({"origin", "random"}));

    // score
    auto* score = app.add_subcommand("score", "Compute all anomaly scores into scores.csv");
    std::string score_manifest, score_out;
    CannyFlags canny_flags;
    double kappa = kDefaultKappa, alpha = kDefaultAlpha;
    score->add_option("--manifest", score_manifest, "Dataset manifest CSV")->required();
    score->add_option("--out", score_out, "Directory with projection outputs")->required();
    add_canny_flags(score, canny_flags);
    score->add_option("--kappa", kappa, "f-AnoGAN feature weight");
    score->add_option("--alpha", alpha, "pg-AnoGAN residual weight");

    // eval
    auto* eval = app.add_subcommand("eval", "ROC/AUC, histogram and PSNR summary for one column");
    std::string eval_out, score_col;
    int bins = 20;
    eval->add_option("--out", eval_out, "Directory containing scores.csv")->required();
    eval->add_option("--score-col", score_col, "Score column to evaluate")->required();
    eval->add_option("--bins", bins, "Histogram bin count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (synth->parsed()) return run_synth(synth_seed, n_normal, n_anomaly, synth_out);
    if (geninit->parsed()) return run_gen_init(dim, hidden, gen_seed, gen_out);
    if (proj->parsed()) {
        if (pcfg.steps < 1 || !(pcfg.step_size > 0)) {
            std::cerr << "error: --steps must be >= 1 and --lr positive\n";
            std::cerr << proj->help() << "\n";
            return kExitUsage;
        }
        pcfg.distance = proj_distance == "mse" ? DistanceKind::Mse : DistanceKind::Pyramid;
        pcfg.init = proj_init == "random" ? InitKind::SeededRandom : InitKind::Origin;
        return run_project(proj_manifest, proj_params, proj_out, pcfg);
    }
    if (score->parsed()) {
        try {
            canny_flags.params().validate();
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        return run_score(score_manifest, score_out, canny_flags.params(), kappa, alpha);
    }
    if (eval->parsed()) {
        if (bins < 1) {
            std::cerr << "error: --bins must be >= 1\n";
            return kExitUsage;
        }
        return run_eval(eval_out, score_col, bins);
    }
    return kExitUsage;
}
