#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "classifier_detail.hpp"
#include "msig/errors.hpp"
#include "msig/rng.hpp"

namespace msig {

namespace {

struct TreeBuilder {
  const TrainingSet& ts;
  std::size_t d;
  std::size_t m_try;
  Rng& rng;
  DecisionTree tree;

  // Work buffers reused across nodes.
  std::vector<std::size_t> feature_pool;
  std::vector<std::pair<double, std::uint8_t>> sorted;  // (value, is_genuine)

  TreeBuilder(const TrainingSet& ts_, Rng& rng_)
      : ts(ts_),
        d(ts_.width()),
        m_try(static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(ts_.width()))))),
        rng(rng_) {}

  std::uint8_t majority(const std::vector<std::size_t>& idx) const {
    std::size_t genuine = 0;
    for (std::size_t i : idx) {
      if (ts.instances[i].label == ClassLabel::Genuine) ++genuine;
    }
    return genuine * 2 >= idx.size() ? 1 : 0;  // tie goes to GENUINE
  }

  std::uint32_t make_leaf(const std::vector<std::size_t>& idx) {
    TreeNode node;
    node.leaf_genuine = majority(idx);
    tree.nodes.push_back(node);
    return static_cast<std::uint32_t>(tree.nodes.size() - 1);
  }

  // Gini impurity of a (genuine, total) count pair, times total; summing the
  // weighted impurity of both children lets us compare splits directly.
  static double weighted_gini(double genuine, double total) {
    if (total == 0.0) return 0.0;
    const double pg = genuine / total;
    return total * 2.0 * pg * (1.0 - pg);
  }

  std::uint32_t build(std::vector<std::size_t> idx) {
    std::size_t genuine = 0;
    for (std::size_t i : idx) {
      if (ts.instances[i].label == ClassLabel::Genuine) ++genuine;
    }
    if (genuine == 0 || genuine == idx.size()) return make_leaf(idx);

    // Draw m_try distinct features (partial Fisher-Yates over 0..d-1).
    feature_pool.resize(d);
    for (std::size_t j = 0; j < d; ++j) feature_pool[j] = j;
    const std::size_t picks = std::min(m_try, d);
    for (std::size_t j = 0; j < picks; ++j) {
      const std::size_t swap_with = j + static_cast<std::size_t>(
                                            rng.below(static_cast<std::uint64_t>(d - j)));
      std::swap(feature_pool[j], feature_pool[swap_with]);
    }

    double best_impurity = std::numeric_limits<double>::infinity();
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    bool found = false;

    for (std::size_t fj = 0; fj < picks; ++fj) {
      const std::size_t f = feature_pool[fj];
      sorted.clear();
      sorted.reserve(idx.size());
      for (std::size_t i : idx) {
        sorted.emplace_back(ts.instances[i].values[f],
                            ts.instances[i].label == ClassLabel::Genuine ? 1 : 0);
      }
      std::sort(sorted.begin(), sorted.end());

      double left_genuine = 0.0, left_total = 0.0;
      const double all_genuine = static_cast<double>(genuine);
      const double all_total = static_cast<double>(idx.size());
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left_genuine += sorted[i].second;
        left_total += 1.0;
        if (sorted[i].first == sorted[i + 1].first) continue;  // no boundary
        const double impurity =
            weighted_gini(left_genuine, left_total) +
            weighted_gini(all_genuine - left_genuine, all_total - left_total);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = f;
          best_threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
          found = true;
        }
      }
    }

    // All sampled features constant on this node: can't split.
    if (!found) return make_leaf(idx);

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      if (ts.instances[i].values[best_feature] < best_threshold) {
        left_idx.push_back(i);
      } else {
        right_idx.push_back(i);
      }
    }
    if (left_idx.empty() || right_idx.empty()) return make_leaf(idx);

    TreeNode node;
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = best_threshold;
    tree.nodes.push_back(node);
    const std::uint32_t self = static_cast<std::uint32_t>(tree.nodes.size() - 1);
    const std::uint32_t left = build(std::move(left_idx));
    const std::uint32_t right = build(std::move(right_idx));
    tree.nodes[self].left = left;
    tree.nodes[self].right = right;
    return self;
  }
};

}  // namespace

VerificationModel train_random_forest(const TrainingSet& ts,
                                      const ForestConfig& config) {
  detail::check_training_set(ts);
  if (config.n_trees == 0) throw InvalidParams("forest needs at least one tree");
  const std::size_t n = ts.instances.size();

  RandomForestModel forest;
  forest.seed = config.seed;
  forest.trees.reserve(config.n_trees);

  for (std::size_t t = 0; t < config.n_trees; ++t) {
    Rng rng = keyed_rng(config.seed, {static_cast<std::uint64_t>(t)});
    std::vector<std::size_t> bootstrap(n);
    for (std::size_t i = 0; i < n; ++i) {
      bootstrap[i] = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
    }
    TreeBuilder builder(ts, rng);
    // Bootstrap resamples may hold one class only; that is a valid stump.
    builder.build(std::move(bootstrap));
    forest.trees.push_back(std::move(builder.tree));
  }

  VerificationModel model;
  model.kind = ModelKind::RandomForest;
  model.feature_mask = ts.feature_mask;
  model.metadata = detail::make_metadata(ts, config.seed);
  model.params = std::move(forest);
  return model;
}

}  // namespace msig
