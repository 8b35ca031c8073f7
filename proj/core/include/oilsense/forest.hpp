#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "oilsense/model.hpp"

namespace oilsense {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 32;          // <= 0 means unlimited
  int min_leaf = 1;
  int features_per_split = 0;  // <= 0 means ceil(sqrt(feature_count))
  bool bootstrap = true;
};

double gini_impurity(const std::vector<std::size_t>& class_counts);

struct SplitCandidate {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child Gini
};

// Exhaustive scan over midpoints of sorted unique values of each candidate
// feature, honoring min_leaf on both children.  Ties on impurity go to the
// lower feature index, then the lower threshold.  Exposed for the oracle
// suite, which re-derives the same answer by brute force.
SplitCandidate best_split(const FeatureMatrix& data,
                          const std::vector<std::uint32_t>& row_indices,
                          const std::vector<int>& features, int min_leaf,
                          int class_count);

class ForestModel final : public Model {
 public:
  // Flat node storage shared by all trees: internal nodes carry a feature and
  // threshold plus child node ids; leaves carry feature = -1 and an offset
  // into the class-count pool.
  struct Nodes {
    std::vector<std::uint32_t> tree_roots;
    std::vector<std::int32_t> feature;
    std::vector<double> threshold;
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    std::vector<std::uint32_t> leaf_counts;  // class_count per leaf
  };

  ForestModel(ModelManifest manifest, Nodes nodes);

  std::vector<double> score(const FeatureMatrix& features) const override;
  void write_payload(BinarySink& sink) const override;

  std::size_t tree_count() const { return nodes_.tree_roots.size(); }
  std::size_t node_count() const { return nodes_.feature.size(); }
  const Nodes& nodes() const { return nodes_; }

  void set_threads(unsigned threads) { threads_ = threads; }

 private:
  Nodes nodes_;
  std::vector<double> leaf_probs_;  // derived from leaf_counts
  unsigned threads_ = 0;
};

// CART with Gini impurity; each tree sees a bootstrap resample of the full
// row count (or the identity sample when bootstrap is off) and draws
// features_per_split candidate features without replacement at every node.
// Forest score = mean of the per-tree leaf distributions.
std::unique_ptr<Model> train_forest(const FeatureMatrix& data,
                                    const ForestParams& params,
                                    std::uint64_t seed, unsigned threads = 0);

std::unique_ptr<Model> load_forest(ModelManifest manifest,
                                   BinarySource& source);

}  // namespace oilsense
