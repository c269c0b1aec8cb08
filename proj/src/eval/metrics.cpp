#include "metafas/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "metafas/common.hpp"

namespace metafas::eval {

namespace {
void check_both_classes(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("scores/labels length mismatch");
    bool live = false, spoof = false;
    for (int l : labels) (l == 1 ? live : spoof) = true;
    if (!live || !spoof) throw std::invalid_argument("both label values must be present");
}

std::vector<double> sweep_candidates(const std::vector<double>& scores) {
    std::vector<double> uniq = scores;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<double> cands;
    cands.reserve(uniq.size() + 1);
    cands.push_back(uniq.front() - 1.0);  // accept everything
    for (size_t i = 0; i + 1 < uniq.size(); ++i) cands.push_back(0.5 * (uniq[i] + uniq[i + 1]));
    cands.push_back(uniq.back() + 1.0);  // accept nothing
    return cands;
}
}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_both_classes(scores, labels);
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tied groups; the rank-sum form equals pairwise
    // counting with half-credit ties.
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double rank_sum_live = 0.0;
    std::int64_t n_live = 0, n_spoof = 0;
    for (size_t k = 0; k < n; ++k) {
        if (labels[k] == 1) {
            rank_sum_live += rank[k];
            ++n_live;
        } else {
            ++n_spoof;
        }
    }
    return (rank_sum_live - 0.5 * static_cast<double>(n_live) * (n_live + 1)) /
           (static_cast<double>(n_live) * static_cast<double>(n_spoof));
}

HterResult hter(const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
    check_both_classes(scores, labels);
    std::int64_t live = 0, spoof = 0, false_accept = 0, false_reject = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 1) {
            ++live;
            if (scores[i] < threshold) ++false_reject;
        } else {
            ++spoof;
            if (scores[i] >= threshold) ++false_accept;
        }
    }
    HterResult r;
    r.far = static_cast<double>(false_accept) / spoof;
    r.frr = static_cast<double>(false_reject) / live;
    r.hter = 0.5 * (r.far + r.frr);
    return r;
}

double select_threshold(const std::vector<double>& dev_scores, const std::vector<int>& dev_labels) {
    check_both_classes(dev_scores, dev_labels);
    double best_t = 0.0, best_gap = std::numeric_limits<double>::infinity(), best_hter = 0.0;
    bool first = true;
    for (double t : sweep_candidates(dev_scores)) {
        const HterResult r = hter(dev_scores, dev_labels, t);
        const double gap = std::abs(r.far - r.frr);
        if (first || gap < best_gap || (gap == best_gap && r.hter < best_hter)) {
            best_t = t;
            best_gap = gap;
            best_hter = r.hter;
            first = false;
        }
    }
    return best_t;
}

std::vector<std::pair<double, double>> roc_points(const std::vector<double>& scores,
                                                  const std::vector<int>& labels) {
    check_both_classes(scores, labels);
    std::vector<std::pair<double, double>> pts;
    for (double t : sweep_candidates(scores)) {
        const HterResult r = hter(scores, labels, t);
        pts.emplace_back(r.far, 1.0 - r.frr);
    }
    std::sort(pts.begin(), pts.end());
    return pts;
}

EvalReport make_report(std::vector<double> scores, std::vector<int> labels, double threshold) {
    EvalReport rep;
    rep.auc = auc(scores, labels);
    const HterResult r = hter(scores, labels, threshold);
    rep.threshold = threshold;
    rep.far = r.far;
    rep.frr = r.frr;
    rep.hter = r.hter;
    rep.roc = roc_points(scores, labels);
    rep.scores = std::move(scores);
    rep.labels = std::move(labels);
    return rep;
}

void write_report_json(const EvalReport& report, const std::string& path) {
    nlohmann::ordered_json j;
    j["auc"] = report.auc;
    j["threshold"] = report.threshold;
    j["far"] = report.far;
    j["frr"] = report.frr;
    j["hter"] = report.hter;
    j["scores"] = report.scores;
    j["labels"] = report.labels;
    nlohmann::ordered_json roc = nlohmann::ordered_json::array();
    for (const auto& [fpr, tpr] : report.roc) roc.push_back({fpr, tpr});
    j["roc"] = roc;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write eval report to " + path);
    out << j.dump(2) << "\n";
}

}  // namespace metafas::eval
