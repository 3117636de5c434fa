#include "netanom/boost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace netanom {

double gini(std::span<const double> class_fractions) {
  double total = 0.0;
  double sum_sq = 0.0;
  for (double p : class_fractions) {
    if (!(p >= 0.0)) throw std::invalid_argument("gini: class fractions must be nonnegative");
    total += p;
    sum_sq += p * p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("gini: class fractions must sum to 1");
  return 1.0 - sum_sq;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::function<std::size_t(std::size_t)> walk = [&](std::size_t i) -> std::size_t {
    const auto& n = nodes_[i];
    if (n.is_leaf()) return 0;
    return 1 + std::max(walk(n.left), walk(n.right));
  };
  return walk(0);
}

double DecisionTree::predict_score(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].class_score;
}

SortedColumns::SortedColumns(const Matrix& x) : order_(x.cols()) {
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& ord = order_[f];
    ord.resize(x.rows());
    std::iota(ord.begin(), ord.end(), 0u);
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
  }
}

namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
};

class TreeGrower {
 public:
  TreeGrower(const Matrix& x, const Labels& y, std::span<const double> w, std::size_t max_depth)
      : x_(x), y_(y), w_(w), max_depth_(max_depth), goes_left_(x.rows(), 0) {}

  DecisionTree grow(std::vector<std::span<const std::uint32_t>> root_orders) {
    nodes_.clear();
    grow_node(root_orders, 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  // Returns the index of the created node.
  std::size_t grow_node(const std::vector<std::span<const std::uint32_t>>& orders, std::size_t depth) {
    double total = 0.0;
    double positive = 0.0;
    for (auto i : orders.front()) {
      total += w_[i];
      if (y_[i]) positive += w_[i];
    }
    const double score = total > 0.0 ? std::clamp(positive / total, 0.0, 1.0) : 0.0;

    const std::size_t index = nodes_.size();
    nodes_.push_back(TreeNode{});
    nodes_[index].class_score = score;
    nodes_[index].weight = total;
    nodes_[index].impurity = binary_gini(score);

    const bool pure = positive <= 0.0 || positive >= total;
    if (depth >= max_depth_ || pure) return index;

    const SplitChoice split = find_split(orders, total, positive);
    if (!split.found) return index;

    // Partition every feature ordering, keeping ascending order on both sides.
    for (auto i : orders.front()) goes_left_[i] = x_(i, split.feature) <= split.threshold ? 1 : 0;
    std::vector<std::vector<std::uint32_t>> left_store(orders.size());
    std::vector<std::vector<std::uint32_t>> right_store(orders.size());
    for (std::size_t f = 0; f < orders.size(); ++f) {
      left_store[f].reserve(orders[f].size());
      right_store[f].reserve(orders[f].size());
      for (auto i : orders[f]) (goes_left_[i] ? left_store[f] : right_store[f]).push_back(i);
    }
    std::vector<std::span<const std::uint32_t>> left_orders(left_store.begin(), left_store.end());
    std::vector<std::span<const std::uint32_t>> right_orders(right_store.begin(), right_store.end());

    const std::size_t left = grow_node(left_orders, depth + 1);
    left_store.clear();
    const std::size_t right = grow_node(right_orders, depth + 1);

    auto& node = nodes_[index];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  // Minimizes W_L * g_L + W_R * g_R. A candidate must beat the incumbent
  // (initially the parent's W * g) by a relative margin, so exact and
  // near-exact ties keep the earlier (feature, threshold) pair.
  SplitChoice find_split(const std::vector<std::span<const std::uint32_t>>& orders, double total,
                         double positive) const {
    const double tol = 1e-12 * total;
    double best = total * binary_gini(positive / total);
    SplitChoice choice;

    for (std::size_t f = 0; f < orders.size(); ++f) {
      const auto ord = orders[f];
      double w_left = 0.0;
      double p_left = 0.0;
      for (std::size_t k = 0; k + 1 < ord.size(); ++k) {
        const auto i = ord[k];
        w_left += w_[i];
        if (y_[i]) p_left += w_[i];
        const double v = x_(i, f);
        const double next = x_(ord[k + 1], f);
        if (!(next > v)) continue;

        const double w_right = total - w_left;
        if (w_right <= 0.0) continue;
        const double g_left = binary_gini(std::clamp(p_left / w_left, 0.0, 1.0));
        const double g_right = binary_gini(std::clamp((positive - p_left) / w_right, 0.0, 1.0));
        const double child = w_left * g_left + w_right * g_right;
        if (child < best - tol) {
          best = child;
          double mid = v + (next - v) / 2.0;
          if (!(mid < next)) mid = v;
          choice = {true, f, mid};
        }
      }
    }
    return choice;
  }

  const Matrix& x_;
  const Labels& y_;
  std::span<const double> w_;
  std::size_t max_depth_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<TreeNode> nodes_;
};

void check_training_inputs(const Matrix& x, const Labels& y, std::span<const double> w) {
  if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("fit_tree: empty input");
  if (y.size() != x.rows() || w.size() != x.rows()) {
    throw std::invalid_argument("fit_tree: x, y and w lengths differ");
  }
}

}  // namespace

DecisionTree fit_tree(const Matrix& x, const SortedColumns& sorted, const Labels& y,
                      std::span<const double> w, std::size_t max_depth) {
  check_training_inputs(x, y, w);
  if (sorted.n_features() != x.cols()) throw std::invalid_argument("fit_tree: stale column orders");
  std::vector<std::span<const std::uint32_t>> orders;
  for (std::size_t f = 0; f < x.cols(); ++f) orders.push_back(sorted.order(f));
  return TreeGrower(x, y, w, max_depth).grow(std::move(orders));
}

DecisionTree fit_tree(const Matrix& x, const Labels& y, std::span<const double> w,
                      std::size_t max_depth) {
  check_training_inputs(x, y, w);
  return fit_tree(x, SortedColumns(x), y, w, max_depth);
}

BoostedModel fit_adaboost(const Matrix& x, const Labels& y, std::size_t n_estimators,
                          std::size_t max_depth) {
  if (x.rows() == 0 || y.size() != x.rows()) {
    throw std::invalid_argument("fit_adaboost: x and y lengths differ or are empty");
  }
  const auto n_pos = std::count(y.begin(), y.end(), std::uint8_t{1});
  if (n_pos == 0 || static_cast<std::size_t>(n_pos) == y.size()) {
    throw std::invalid_argument("fit_adaboost: training data holds a single class");
  }
  if (n_estimators == 0 || max_depth == 0) {
    throw std::invalid_argument("fit_adaboost: n_estimators and max_depth must be positive");
  }

  BoostedModel model;
  model.n_series = x.cols();
  model.max_depth = max_depth;
  model.n_estimators = n_estimators;

  const std::size_t n = x.rows();
  const SortedColumns sorted(x);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<std::uint8_t> wrong(n);

  for (std::size_t round = 0; round < n_estimators; ++round) {
    DecisionTree tree = fit_tree(x, sorted, y, w, max_depth);

    double error = 0.0;
    std::size_t n_wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
      wrong[i] = tree.predict_label(x.row(i)) != y[i];
      if (wrong[i]) {
        error += w[i];
        ++n_wrong;
      }
    }

    if (error >= 0.5) {
      if (model.estimators.empty()) {
        model.estimators.push_back(std::move(tree));
        model.alphas.push_back(1.0);
      }
      break;
    }
    const double clamped = std::clamp(error, 1e-10, 1.0 - 1e-10);
    const double alpha = 0.5 * std::log((1.0 - clamped) / clamped);
    model.estimators.push_back(std::move(tree));
    model.alphas.push_back(alpha);
    if (n_wrong == 0) break;

    const double up = std::exp(alpha);
    const double down = std::exp(-alpha);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= wrong[i] ? up : down;
      total += w[i];
    }
    for (double& wi : w) wi /= total;
  }
  return model;
}

BoostedModel fit_adaboost(const LabeledSplit& split, std::size_t n_estimators, std::size_t max_depth) {
  return fit_adaboost(split.train_x, split.train_y, n_estimators, max_depth);
}

double predict_score(const BoostedModel& model, std::span<const double> row) {
  double vote = 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < model.estimators.size(); ++t) {
    vote += model.alphas[t] * model.estimators[t].predict_score(row);
    total += model.alphas[t];
  }
  if (!(total > 0.0)) throw std::invalid_argument("predict_score: model has no weighted estimators");
  return std::clamp(vote / total, 0.0, 1.0);
}

std::vector<double> predict_scores(const BoostedModel& model, const Matrix& x) {
  std::vector<double> scores(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) scores[i] = predict_score(model, x.row(i));
  return scores;
}

double predict_vote(const BoostedModel& model, std::span<const double> row) {
  double vote = 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < model.estimators.size(); ++t) {
    if (model.estimators[t].predict_label(row)) vote += model.alphas[t];
    total += model.alphas[t];
  }
  if (!(total > 0.0)) throw std::invalid_argument("predict_vote: model has no weighted estimators");
  return std::clamp(vote / total, 0.0, 1.0);
}

std::vector<double> predict_votes(const BoostedModel& model, const Matrix& x) {
  std::vector<double> votes(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) votes[i] = predict_vote(model, x.row(i));
  return votes;
}

std::vector<double> feature_importances(const BoostedModel& model) {
  std::vector<double> importance(model.n_series, 0.0);
  double alpha_total = 0.0;
  std::vector<double> decrease(model.n_series);
  for (std::size_t t = 0; t < model.estimators.size(); ++t) {
    alpha_total += std::abs(model.alphas[t]);
    std::fill(decrease.begin(), decrease.end(), 0.0);
    double tree_total = 0.0;
    const auto& nodes = model.estimators[t].nodes();
    for (const auto& node : nodes) {
      if (node.is_leaf()) continue;
      const auto& l = nodes[node.left];
      const auto& r = nodes[node.right];
      const double gain =
          std::max(0.0, node.weight * node.impurity - l.weight * l.impurity - r.weight * r.impurity);
      decrease.at(node.feature) += gain;
      tree_total += gain;
    }
    if (tree_total <= 0.0) continue;
    for (std::size_t f = 0; f < decrease.size(); ++f) {
      importance[f] += model.alphas[t] * decrease[f] / tree_total;
    }
  }
  if (!(alpha_total > 0.0)) throw std::invalid_argument("feature_importances: all alphas are zero");
  const double sum = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (!(sum > 0.0)) throw std::invalid_argument("feature_importances: no estimator splits");
  for (double& v : importance) v /= sum;
  return importance;
}

std::string dump_model(const BoostedModel& model, std::span<const std::string> feature_names) {
  std::string out;
  char buf[256];
  auto name = [&](std::size_t f) {
    return f < feature_names.size() ? feature_names[f] : "feature " + std::to_string(f);
  };
  for (std::size_t t = 0; t < model.estimators.size(); ++t) {
    std::snprintf(buf, sizeof buf, "estimator %zu  alpha = %.6g\n", t, model.alphas[t]);
    out += buf;
    const auto& nodes = model.estimators[t].nodes();
    std::function<void(std::size_t, int)> walk = [&](std::size_t i, int indent) {
      const auto& n = nodes[i];
      out.append(static_cast<std::size_t>(indent) * 2, ' ');
      if (n.is_leaf()) {
        std::snprintf(buf, sizeof buf, "leaf  gini = %.4g  weight = %.4g  score = %.4g\n",
                      n.impurity, n.weight, n.class_score);
        out += buf;
        return;
      }
      std::snprintf(buf, sizeof buf, "%s <= %.6g  gini = %.4g  weight = %.4g\n",
                    name(n.feature).c_str(), n.threshold, n.impurity, n.weight);
      out += buf;
      walk(n.left, indent + 2);
      walk(n.right, indent + 2);
    };
    walk(0, 1);
  }
  return out;
}

}  // namespace netanom
