#include "oilsense/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "oilsense/parallel.hpp"
#include "oilsense/rng.hpp"

namespace oilsense {

namespace {

double gini_from_counts(const std::size_t* counts, int k, double n) {
  double acc = 0.0;
  for (int c = 0; c < k; ++c) {
    double p = static_cast<double>(counts[c]) / n;
    acc += p * p;
  }
  return 1.0 - acc;
}

// Shared by the reference splitter and the tree builder so both produce
// bit-identical impurities for the same count tables.
double weighted_child_gini(const std::size_t* left, const std::size_t* right,
                           int k, std::size_t nl, std::size_t nr) {
  double dl = static_cast<double>(nl);
  double dr = static_cast<double>(nr);
  double g = dl * gini_from_counts(left, k, dl) +
             dr * gini_from_counts(right, k, dr);
  return g / (dl + dr);
}

}  // namespace

double gini_impurity(const std::vector<std::size_t>& class_counts) {
  std::size_t total = 0;
  for (std::size_t c : class_counts) total += c;
  if (total == 0) return 0.0;
  return gini_from_counts(class_counts.data(),
                          static_cast<int>(class_counts.size()),
                          static_cast<double>(total));
}

SplitCandidate best_split(const FeatureMatrix& data,
                          const std::vector<std::uint32_t>& row_indices,
                          const std::vector<int>& features, int min_leaf,
                          int class_count) {
  SplitCandidate best;
  best.impurity = std::numeric_limits<double>::max();
  if (row_indices.size() < 2 * static_cast<std::size_t>(min_leaf)) return best;

  std::vector<int> order(features);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  const std::size_t n = row_indices.size();
  std::vector<std::pair<double, int>> vals(n);
  std::vector<std::size_t> total(class_count), left(class_count),
      right(class_count);
  for (int f : order) {
    if (f < 0 || static_cast<std::size_t>(f) >= data.cols)
      throw ConfigError("split candidate feature index out of range");
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = row_indices[i];
      vals[i] = {data.at(r, static_cast<std::size_t>(f)), data.labels[r]};
    }
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::fill(total.begin(), total.end(), 0);
    for (const auto& v : vals) total[v.second]++;
    std::fill(left.begin(), left.end(), 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left[vals[i].second]++;
      if (vals[i].first == vals[i + 1].first) continue;
      std::size_t nl = i + 1;
      std::size_t nr = n - nl;
      if (nl < static_cast<std::size_t>(min_leaf) ||
          nr < static_cast<std::size_t>(min_leaf))
        continue;
      for (int c = 0; c < class_count; ++c) right[c] = total[c] - left[c];
      double wi =
          weighted_child_gini(left.data(), right.data(), class_count, nl, nr);
      if (!best.found || wi < best.impurity) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        best.impurity = wi;
      }
    }
  }
  return best;
}

namespace {

struct TreeBuf {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
  std::vector<std::uint32_t> leaf_counts;
};

struct NodeTask {
  std::uint32_t begin;
  std::uint32_t end;
  std::int32_t depth;
  std::int32_t parent;  // -1 for the root
  std::uint8_t right_side;
};

struct BuildInputs {
  const FeatureMatrix* data;
  const std::vector<std::vector<double>>* cols;           // per-feature values
  const std::vector<std::vector<std::uint32_t>>* order;   // per-feature argsort
  int class_count;
  int mtry;
  int min_leaf;
  int max_depth;
  bool bootstrap;
};

void build_tree(const BuildInputs& in, std::uint64_t tree_seed, TreeBuf& buf) {
  const std::size_t n = in.data->rows;
  const std::size_t d = in.data->cols;
  const int k = in.class_count;
  Rng rng(tree_seed);

  std::vector<std::uint32_t> cnt(n, 1);
  if (in.bootstrap) {
    std::fill(cnt.begin(), cnt.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      cnt[rng.below(static_cast<std::uint64_t>(n))]++;
  }

  // Rows of the (multiset) sample, one array per feature, each sorted by that
  // feature; splits stably partition every array so the order survives.
  std::vector<std::vector<std::uint32_t>> sorted(d);
  for (std::size_t j = 0; j < d; ++j) {
    sorted[j].reserve(n);
    for (std::uint32_t r : (*in.order)[j]) {
      for (std::uint32_t c = 0; c < cnt[r]; ++c) sorted[j].push_back(r);
    }
  }
  const std::size_t m = sorted[0].size();
  std::vector<std::uint32_t> scratch(m);

  std::vector<std::size_t> hist(k), left(k), right(k), best_left(k);
  std::vector<int> pool(d);

  std::vector<NodeTask> stack;
  stack.push_back({0, static_cast<std::uint32_t>(m), 0, -1, 0});
  while (!stack.empty()) {
    NodeTask task = stack.back();
    stack.pop_back();
    std::uint32_t id = static_cast<std::uint32_t>(buf.feature.size());
    if (task.parent >= 0) {
      if (task.right_side)
        buf.right[task.parent] = id;
      else
        buf.left[task.parent] = id;
    }
    buf.feature.push_back(-1);
    buf.threshold.push_back(0.0);
    buf.left.push_back(0);
    buf.right.push_back(0);

    const std::size_t seg = task.end - task.begin;
    const std::uint32_t* rows0 = sorted[0].data() + task.begin;
    std::fill(hist.begin(), hist.end(), 0);
    for (std::size_t i = 0; i < seg; ++i) hist[in.data->labels[rows0[i]]]++;

    bool pure = false;
    for (int c = 0; c < k; ++c) {
      if (hist[c] == seg) pure = true;
    }
    bool depth_capped = in.max_depth > 0 && task.depth >= in.max_depth;
    bool splittable =
        !pure && !depth_capped && seg >= 2 * static_cast<std::size_t>(in.min_leaf);

    SplitCandidate best;
    best.impurity = std::numeric_limits<double>::max();
    if (splittable) {
      for (std::size_t j = 0; j < d; ++j) pool[j] = static_cast<int>(j);
      for (int i = 0; i < in.mtry; ++i) {
        std::size_t j = i + rng.below(static_cast<std::uint64_t>(d - i));
        std::swap(pool[i], pool[j]);
      }
      std::sort(pool.begin(), pool.begin() + in.mtry);

      for (int fi = 0; fi < in.mtry; ++fi) {
        const int f = pool[fi];
        const double* col = (*in.cols)[f].data();
        const std::uint32_t* rows = sorted[f].data() + task.begin;
        std::fill(left.begin(), left.end(), 0);
        for (std::size_t i = 0; i + 1 < seg; ++i) {
          left[in.data->labels[rows[i]]]++;
          double v = col[rows[i]];
          double vn = col[rows[i + 1]];
          if (v == vn) continue;
          std::size_t nl = i + 1;
          std::size_t nr = seg - nl;
          if (nl < static_cast<std::size_t>(in.min_leaf) ||
              nr < static_cast<std::size_t>(in.min_leaf))
            continue;
          for (int c = 0; c < k; ++c) right[c] = hist[c] - left[c];
          double wi =
              weighted_child_gini(left.data(), right.data(), k, nl, nr);
          if (!best.found || wi < best.impurity) {
            best.found = true;
            best.feature = f;
            best.threshold = 0.5 * (v + vn);
            best.impurity = wi;
            std::copy(left.begin(), left.end(), best_left.begin());
          }
        }
      }
    }

    if (!best.found) {
      buf.left[id] = static_cast<std::uint32_t>(buf.leaf_counts.size());
      for (int c = 0; c < k; ++c)
        buf.leaf_counts.push_back(static_cast<std::uint32_t>(hist[c]));
      continue;
    }

    buf.feature[id] = best.feature;
    buf.threshold[id] = best.threshold;
    const double* split_col = (*in.cols)[best.feature].data();
    std::uint32_t nl = 0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
      nl += static_cast<std::uint32_t>(best_left[c]);
    for (std::size_t j = 0; j < d; ++j) {
      std::uint32_t* a = sorted[j].data() + task.begin;
      std::size_t w = 0, s = 0;
      for (std::size_t i = 0; i < seg; ++i) {
        std::uint32_t r = a[i];
        if (split_col[r] <= best.threshold)
          a[w++] = r;
        else
          scratch[s++] = r;
      }
      std::copy(scratch.begin(), scratch.begin() + s, a + w);
    }
    std::uint32_t mid = task.begin + nl;
    stack.push_back({mid, task.end, task.depth + 1,
                     static_cast<std::int32_t>(id), 1});
    stack.push_back({task.begin, mid, task.depth + 1,
                     static_cast<std::int32_t>(id), 0});
  }
}

}  // namespace

ForestModel::ForestModel(ModelManifest manifest, Nodes nodes)
    : nodes_(std::move(nodes)) {
  manifest_ = std::move(manifest);
  const int k = manifest_.class_count;
  const std::size_t count = nodes_.feature.size();
  if (nodes_.threshold.size() != count || nodes_.left.size() != count ||
      nodes_.right.size() != count || nodes_.tree_roots.empty() ||
      nodes_.leaf_counts.size() % static_cast<std::size_t>(k) != 0)
    throw SchemaError("forest node arrays are inconsistent");
  for (std::uint32_t root : nodes_.tree_roots) {
    if (root >= count) throw SchemaError("forest tree root out of range");
  }
  leaf_probs_.assign(nodes_.leaf_counts.size(), 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    if (nodes_.feature[i] >= 0) {
      if (static_cast<std::size_t>(nodes_.feature[i]) >=
          manifest_.feature_count)
        throw SchemaError("forest split feature out of range");
      if (nodes_.left[i] <= i || nodes_.right[i] <= i ||
          nodes_.left[i] >= count || nodes_.right[i] >= count)
        throw SchemaError("forest child links out of order");
      continue;
    }
    std::size_t off = nodes_.left[i];
    if (off + k > nodes_.leaf_counts.size() ||
        off % static_cast<std::size_t>(k) != 0)
      throw SchemaError("forest leaf offset out of range");
    double sum = 0.0;
    for (int c = 0; c < k; ++c) sum += nodes_.leaf_counts[off + c];
    if (sum <= 0.0) throw SchemaError("forest leaf with empty class counts");
    for (int c = 0; c < k; ++c)
      leaf_probs_[off + c] = nodes_.leaf_counts[off + c] / sum;
  }
}

std::vector<double> ForestModel::score(const FeatureMatrix& features) const {
  check_columns(features);
  const int k = class_count();
  std::vector<double> out(features.rows * k, 0.0);
  // Trees outer, queries inner: one tree's nodes stay hot across all rows.
  for (std::uint32_t root : nodes_.tree_roots) {
    parallel_for(0, features.rows, threads_, [&](std::size_t i) {
      const double* x = features.row(i);
      std::uint32_t nid = root;
      while (nodes_.feature[nid] >= 0) {
        nid = x[nodes_.feature[nid]] <= nodes_.threshold[nid]
                  ? nodes_.left[nid]
                  : nodes_.right[nid];
      }
      const double* p = leaf_probs_.data() + nodes_.left[nid];
      double* s = out.data() + i * k;
      for (int c = 0; c < k; ++c) s[c] += p[c];
    });
  }
  const double scale = 1.0 / static_cast<double>(nodes_.tree_roots.size());
  for (double& v : out) v *= scale;
  return out;
}

void ForestModel::write_payload(BinarySink& sink) const {
  sink.put_u32_array(nodes_.tree_roots);
  sink.put_i32_array(nodes_.feature);
  sink.put_f64_array(nodes_.threshold);
  sink.put_u32_array(nodes_.left);
  sink.put_u32_array(nodes_.right);
  sink.put_u32_array(nodes_.leaf_counts);
}

std::unique_ptr<Model> train_forest(const FeatureMatrix& data,
                                    const ForestParams& params,
                                    std::uint64_t seed, unsigned threads) {
  data.validate_for_training();
  if (params.n_trees < 1) throw ConfigError("forest n_trees must be >= 1");
  if (params.min_leaf < 1) throw ConfigError("forest min_leaf must be >= 1");
  if (params.features_per_split > static_cast<int>(data.cols))
    throw ConfigError("forest features_per_split exceeds the feature count");

  const std::size_t d = data.cols;
  const int mtry =
      params.features_per_split > 0
          ? params.features_per_split
          : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  std::vector<std::vector<double>> cols(d, std::vector<double>(data.rows));
  for (std::size_t i = 0; i < data.rows; ++i) {
    const double* row = data.row(i);
    for (std::size_t j = 0; j < d; ++j) cols[j][i] = row[j];
  }
  std::vector<std::vector<std::uint32_t>> order(d);
  for (std::size_t j = 0; j < d; ++j) {
    order[j].resize(data.rows);
    for (std::size_t i = 0; i < data.rows; ++i)
      order[j][i] = static_cast<std::uint32_t>(i);
    const double* col = cols[j].data();
    std::sort(order[j].begin(), order[j].end(),
              [col](std::uint32_t a, std::uint32_t b) {
                if (col[a] != col[b]) return col[a] < col[b];
                return a < b;
              });
  }

  BuildInputs in;
  in.data = &data;
  in.cols = &cols;
  in.order = &order;
  in.class_count = data.class_count();
  in.mtry = mtry;
  in.min_leaf = params.min_leaf;
  in.max_depth = params.max_depth;
  in.bootstrap = params.bootstrap;

  std::vector<TreeBuf> trees(params.n_trees);
  parallel_for(0, static_cast<std::size_t>(params.n_trees), threads,
               [&](std::size_t t) {
                 build_tree(in, derive_seed(seed, "tree", t), trees[t]);
               });

  ForestModel::Nodes nodes;
  for (const TreeBuf& t : trees) {
    std::uint32_t off = static_cast<std::uint32_t>(nodes.feature.size());
    std::uint32_t pool = static_cast<std::uint32_t>(nodes.leaf_counts.size());
    nodes.tree_roots.push_back(off);
    for (std::size_t i = 0; i < t.feature.size(); ++i) {
      nodes.feature.push_back(t.feature[i]);
      nodes.threshold.push_back(t.threshold[i]);
      if (t.feature[i] >= 0) {
        nodes.left.push_back(off + t.left[i]);
        nodes.right.push_back(off + t.right[i]);
      } else {
        nodes.left.push_back(pool + t.left[i]);
        nodes.right.push_back(0);
      }
    }
    nodes.leaf_counts.insert(nodes.leaf_counts.end(), t.leaf_counts.begin(),
                             t.leaf_counts.end());
  }

  ModelManifest manifest;
  manifest.kind = "forest";
  manifest.class_count = data.class_count();
  manifest.feature_count = data.cols;
  manifest.feature_names = data.feature_names;
  manifest.seed = seed;
  nlohmann::json hp;
  hp["bootstrap"] = params.bootstrap;
  hp["features_per_split"] = mtry;
  hp["max_depth"] = params.max_depth;
  hp["min_leaf"] = params.min_leaf;
  hp["n_trees"] = params.n_trees;
  manifest.hyperparameters_json = hp.dump();

  auto model =
      std::make_unique<ForestModel>(std::move(manifest), std::move(nodes));
  model->set_threads(threads);
  return model;
}

std::unique_ptr<Model> load_forest(ModelManifest manifest,
                                   BinarySource& source) {
  ForestModel::Nodes nodes;
  nodes.tree_roots = source.get_u32_array();
  nodes.feature = source.get_i32_array();
  nodes.threshold = source.get_f64_array();
  nodes.left = source.get_u32_array();
  nodes.right = source.get_u32_array();
  nodes.leaf_counts = source.get_u32_array();
  return std::make_unique<ForestModel>(std::move(manifest), std::move(nodes));
}

}  // namespace oilsense
