#pragma once

#include <string>
#include <utility>
#include <vector>

namespace metafas::eval {

struct HterResult {
    double far = 0.0;  // spoof fraction with score >= threshold
    double frr = 0.0;  // live fraction with score < threshold
    double hter = 0.0;
};

// Probability that a random live outscores a random spoof, ties counted
// half (Mann-Whitney). Requires both label values.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

HterResult hter(const std::vector<double>& scores, const std::vector<int>& labels, double threshold);

// Threshold at the dev-split equal-error-rate point: the sweep candidate
// (midpoints of adjacent distinct scores plus the two extremes) minimizing
// |FAR - FRR|, ties broken by lower HTER then lower threshold.
double select_threshold(const std::vector<double>& dev_scores, const std::vector<int>& dev_labels);

// (FPR, TPR) at every candidate threshold, FPR ascending.
std::vector<std::pair<double, double>> roc_points(const std::vector<double>& scores,
                                                  const std::vector<int>& labels);

struct EvalReport {
    std::vector<double> scores;
    std::vector<int> labels;
    double auc = 0.0;
    double threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;
    double hter = 0.0;
    std::vector<std::pair<double, double>> roc;
};

EvalReport make_report(std::vector<double> scores, std::vector<int> labels, double threshold);
void write_report_json(const EvalReport& report, const std::string& path);

}  // namespace metafas::eval
