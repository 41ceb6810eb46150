#pragma once

#include <span>
#include <string>
#include <vector>

#include "anoscore/image.hpp"

namespace anoscore {

enum class Label { Normal, Anomaly };

struct ScoreRecord {
    std::string id;
    Label label = Label::Normal;
    double score = 0.0;
};

/// ROC convention: higher score predicts anomaly. Points sorted by
/// descending threshold, anchored at (0,0) and (1,1); tied scores collapse
/// into a single threshold step. AUC by trapezoidal integration.
struct RocCurve {
    struct Point {
        double fpr;
        double tpr;
        double threshold;
    };
    std::vector<Point> points;
    double auc = 0.0;
};

RocCurve roc_curve(std::span<const ScoreRecord> records);

/// Independent AUC oracle: (concordant + 0.5 * tied) / (n_pos * n_neg).
double auc_pairwise(std::span<const ScoreRecord> records);

/// Equal-width bins over [min, max]; the max score lands in the last bin.
struct Histogram {
    std::vector<double> bin_edges;           // n_bins + 1 ascending values
    std::vector<std::size_t> counts_normal;  // n_bins
    std::vector<std::size_t> counts_anomaly;
};

Histogram histogram(std::span<const ScoreRecord> records, int n_bins);

/// Mean and population standard deviation; non-finite entries are excluded
/// and reported via `excluded`.
struct Summary {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t excluded = 0;
};

Summary summarize(std::span<const double> values);

}  // namespace anoscore
