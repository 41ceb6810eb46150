#include "anoscore/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace anoscore {
namespace {

std::pair<std::size_t, std::size_t> class_counts(std::span<const ScoreRecord> records) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& r : records) {
        if (!std::isfinite(r.score))
            throw std::invalid_argument("scores must be finite");
        (r.label == Label::Anomaly ? n_pos : n_neg)++;
    }
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("need at least one record of each label");
    return {n_pos, n_neg};
}

}  // namespace

RocCurve roc_curve(std::span<const ScoreRecord> records) {
    auto [n_pos, n_neg] = class_counts(records);

    std::vector<std::pair<double, bool>> sorted;  // (score, is_anomaly)
    sorted.reserve(records.size());
    for (const auto& r : records) sorted.emplace_back(r.score, r.label == Label::Anomaly);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    RocCurve roc;
    roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        double s = sorted[i].first;
        while (i < sorted.size() && sorted[i].first == s) {
            (sorted[i].second ? tp : fp)++;
            ++i;
        }
        roc.points.push_back({static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos, s});
    }
    double auc = 0.0;
    for (std::size_t i = 1; i < roc.points.size(); ++i)
        auc += (roc.points[i].fpr - roc.points[i - 1].fpr) *
               (roc.points[i].tpr + roc.points[i - 1].tpr) * 0.5;
    roc.auc = auc;
    return roc;
}

double auc_pairwise(std::span<const ScoreRecord> records) {
    auto [n_pos, n_neg] = class_counts(records);
    double num = 0.0;
    for (const auto& p : records) {
        if (p.label != Label::Anomaly) continue;
        for (const auto& n : records) {
            if (n.label != Label::Normal) continue;
            if (p.score > n.score) num += 1.0;
            else if (p.score == n.score) num += 0.5;
        }
    }
    return num / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Histogram histogram(std::span<const ScoreRecord> records, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("histogram: n_bins must be >= 1");
    if (records.empty()) throw std::invalid_argument("histogram: empty input");
    double lo = records[0].score, hi = records[0].score;
    for (const auto& r : records) {
        if (!std::isfinite(r.score)) throw std::invalid_argument("histogram: scores must be finite");
        lo = std::min(lo, r.score);
        hi = std::max(hi, r.score);
    }
    double span = hi > lo ? hi - lo : 1.0;  // degenerate range still gets ascending edges
    Histogram h;
    h.bin_edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i) h.bin_edges[i] = lo + span * i / n_bins;
    h.counts_normal.assign(n_bins, 0);
    h.counts_anomaly.assign(n_bins, 0);
    for (const auto& r : records) {
        int bin = static_cast<int>((r.score - lo) / span * n_bins);
        bin = std::clamp(bin, 0, n_bins - 1);
        (r.label == Label::Anomaly ? h.counts_anomaly : h.counts_normal)[bin]++;
    }
    return h;
}

Summary summarize(std::span<const double> values) {
    Summary s;
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values) {
        if (std::isfinite(v)) finite.push_back(v);
        else ++s.excluded;
    }
    if (finite.size() < 2)
        throw std::invalid_argument("summarize: need at least 2 finite values");
    double sum = 0.0;
    for (double v : finite) sum += v;
    s.mean = sum / finite.size();
    double var = 0.0;
    for (double v : finite) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / finite.size());  // population std
    return s;
}

}  // namespace anoscore
