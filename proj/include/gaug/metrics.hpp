#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gaug {

/// Index of the largest entry; lowest index on ties.
std::size_t argmax_row(const Eigen::MatrixXd& logits, Eigen::Index row);

/// Fraction of rows whose argmax equals the label.
double top1_accuracy(const Eigen::MatrixXd& logits, std::span<const int> labels);

/// A row is correct when its argmax is any member of its label set.
double one_to_multi_accuracy(const Eigen::MatrixXd& logits, std::span<const std::set<int>> label_sets);

/// Top-1 grouped by true class; only classes present in `labels` appear.
std::map<int, double> per_class_accuracy(const Eigen::MatrixXd& logits, std::span<const int> labels);

inline constexpr std::size_t kRisTopFeatures = 25;
inline constexpr double kRisFiringQuantile = 0.5;

/// Linear-interpolation quantile of `values` (0 <= q <= 1).
double quantile(std::vector<double> values, double q);

/// Representation invariance score. Each matrix holds one object's representations under
/// different transformation parameters (rows). A feature fires on a row when its value is
/// >= the q-quantile of that feature over all pooled rows. Per object, the min(K, d) features
/// firing most often (ties by lower index) are kept; the object's score is their mean firing
/// rate. Returns the mean over objects.
double top_k_ris(std::span<const Eigen::MatrixXd> objects, std::size_t top_k = kRisTopFeatures,
                 double firing_quantile = kRisFiringQuantile);

struct Correlation {
    std::optional<double> spearman;  // unset when either side has zero variance
    std::optional<double> pearson;
};

/// Ranks with ties replaced by their average rank (1-based).
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson on raw values and Spearman on average ranks, over the keys both maps share.
/// Throws when fewer than three keys are shared.
Correlation correlate(const std::map<int, double>& x, const std::map<int, double>& y);

}  // namespace gaug
