#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "netanom/frame.hpp"
#include "netanom/matrix.hpp"

namespace netanom {

/// Two-class Gini impurity 1 - sum(p_i^2). Throws std::invalid_argument when
/// fractions are negative or do not sum to 1 within 1e-9.
double gini(std::span<const double> class_fractions);

/// Binary Gini 2p(1-p) for positive share p.
inline double binary_gini(double p) noexcept { return 2.0 * p * (1.0 - p); }

/// Node of a flat binary tree. A node is a leaf when it has no children;
/// otherwise rows with x[feature] <= threshold go to `left`.
struct TreeNode {
  static constexpr std::size_t kNoChild = std::numeric_limits<std::size_t>::max();

  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = kNoChild;
  std::size_t right = kNoChild;
  /// Weighted positive fraction of the training rows reaching this node.
  double class_score = 0.0;
  /// Total training weight reaching the node and its binary Gini impurity.
  double weight = 0.0;
  double impurity = 0.0;

  bool is_leaf() const noexcept { return left == kNoChild; }
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t depth() const;

  /// Leaf class_score reached by the row.
  double predict_score(std::span<const double> row) const;
  std::uint8_t predict_label(std::span<const double> row) const {
    return predict_score(row) > 0.5 ? 1 : 0;
  }

 private:
  std::vector<TreeNode> nodes_;
};

/// Per-feature row orderings by ascending value, reused across boosting rounds.
class SortedColumns {
 public:
  explicit SortedColumns(const Matrix& x);
  std::span<const std::uint32_t> order(std::size_t feature) const { return order_[feature]; }
  std::size_t n_features() const noexcept { return order_.size(); }

 private:
  std::vector<std::vector<std::uint32_t>> order_;
};

/// Greedy weighted-Gini tree. Candidate thresholds are midpoints between
/// consecutive distinct values; ties go to the lowest feature index, then the
/// lowest threshold. Growth stops at max_depth, at a pure node, or when no
/// candidate lowers the weighted impurity.
DecisionTree fit_tree(const Matrix& x, const Labels& y, std::span<const double> w,
                      std::size_t max_depth);
DecisionTree fit_tree(const Matrix& x, const SortedColumns& sorted, const Labels& y,
                      std::span<const double> w, std::size_t max_depth);

struct BoostedModel {
  std::vector<DecisionTree> estimators;
  std::vector<double> alphas;
  std::size_t n_series = 0;
  std::size_t max_depth = 1;
  std::size_t n_estimators = 50;
};

/// Discrete AdaBoost over depth-limited Gini trees.
///
/// Starts from uniform weights. Each round fits a tree, takes its weighted
/// error e (clamped to [1e-10, 1 - 1e-10]), sets alpha = ln((1 - e) / e) / 2
/// and multiplies misclassified weights by exp(alpha), the rest by
/// exp(-alpha), then renormalizes. A perfect round is kept and ends training;
/// a round with e >= 0.5 ends training without being kept, except as the only
/// estimator, where it is kept with alpha 1.
///
/// Throws std::invalid_argument if the labels hold a single class.
BoostedModel fit_adaboost(const Matrix& x, const Labels& y, std::size_t n_estimators = 50,
                          std::size_t max_depth = 1);
BoostedModel fit_adaboost(const LabeledSplit& split, std::size_t n_estimators = 50,
                          std::size_t max_depth = 1);

/// Alpha-weighted mean of leaf scores, in [0, 1]. Hard label is score > 0.5.
double predict_score(const BoostedModel& model, std::span<const double> row);
inline std::uint8_t predict_label(const BoostedModel& model, std::span<const double> row) {
  return predict_score(model, row) > 0.5 ? 1 : 0;
}
std::vector<double> predict_scores(const BoostedModel& model, const Matrix& x);

/// Alpha-weighted share of trees whose leaf majority is positive, in [0, 1].
/// This is the discrete AdaBoost decision: label 1 when the share exceeds 0.5.
double predict_vote(const BoostedModel& model, std::span<const double> row);
std::vector<double> predict_votes(const BoostedModel& model, const Matrix& x);

/// Rank-based (Mann-Whitney) AUC, ties counted as one half.
/// Throws std::invalid_argument unless both classes are present.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Alpha-weighted impurity decrease per feature. Each tree's decreases are
/// normalized to sum to 1 before weighting, and the result sums to 1.
/// Throws std::invalid_argument if no tree splits or all alphas are zero.
std::vector<double> feature_importances(const BoostedModel& model);

/// Human-readable dump of every estimator, one node per line.
std::string dump_model(const BoostedModel& model, std::span<const std::string> feature_names = {});

}  // namespace netanom
