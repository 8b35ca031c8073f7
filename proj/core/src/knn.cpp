#include "oilsense/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "oilsense/parallel.hpp"

namespace oilsense {

namespace {

constexpr std::size_t kRefBlock = 1024;
constexpr std::size_t kQueryBlock = 16;

// Fixed-capacity best list ordered by (distance, row index).  Scanning rows
// in index order plus strict-less insertion gives distance ties to the lower
// row index.
struct BestList {
  int k = 0;
  int count = 0;
  std::vector<double> dist;
  std::vector<std::size_t> index;

  explicit BestList(int kk) : k(kk), dist(kk), index(kk) {}

  double worst() const {
    return count == k ? dist[count - 1] : std::numeric_limits<double>::max();
  }

  void offer(double d, std::size_t idx) {
    if (count == k && d >= dist[count - 1]) return;
    int pos = count < k ? count : k - 1;
    while (pos > 0 && dist[pos - 1] > d) {
      dist[pos] = dist[pos - 1];
      index[pos] = index[pos - 1];
      --pos;
    }
    dist[pos] = d;
    index[pos] = idx;
    if (count < k) ++count;
  }
};

}  // namespace

KnnModel::KnnModel(ModelManifest manifest, int k,
                   std::vector<double> train_values,
                   std::vector<std::int32_t> train_labels)
    : k_(k),
      columns_(std::move(train_values)),
      train_labels_(std::move(train_labels)) {
  manifest_ = std::move(manifest);
}

std::vector<std::size_t> KnnModel::neighbors(const double* query) const {
  const std::size_t rows = train_labels_.size();
  const std::size_t cols = manifest_.feature_count;
  BestList best(k_);
  double buf[kRefBlock];
  for (std::size_t base = 0; base < rows; base += kRefBlock) {
    const std::size_t len = std::min(kRefBlock, rows - base);
    {
      const double* col = columns_.data() + base;
      const double q = query[0];
      for (std::size_t j = 0; j < len; ++j) {
        double d = q - col[j];
        buf[j] = d * d;
      }
    }
    for (std::size_t c = 1; c < cols; ++c) {
      const double* col = columns_.data() + c * rows + base;
      const double q = query[c];
      for (std::size_t j = 0; j < len; ++j) {
        double d = q - col[j];
        buf[j] += d * d;
      }
    }
    double block_min = buf[0];
    for (std::size_t j = 1; j < len; ++j) block_min = std::min(block_min, buf[j]);
    if (block_min >= best.worst()) continue;
    for (std::size_t j = 0; j < len; ++j) {
      if (buf[j] < best.worst()) best.offer(buf[j], base + j);
    }
  }
  return std::vector<std::size_t>(best.index.begin(),
                                  best.index.begin() + best.count);
}

std::vector<double> KnnModel::score(const FeatureMatrix& features) const {
  check_columns(features);
  const int k = class_count();
  const std::size_t rows = train_labels_.size();
  const std::size_t cols = manifest_.feature_count;
  std::vector<double> out(features.rows * k, 0.0);
  const std::size_t blocks = (features.rows + kQueryBlock - 1) / kQueryBlock;
  // Reference blocks are the outer loop so each block of training columns
  // stays cache-resident while all queries in the group scan it.
  parallel_for(0, blocks, threads_, [&](std::size_t b) {
    const std::size_t begin = b * kQueryBlock;
    const std::size_t end = std::min(begin + kQueryBlock, features.rows);
    std::vector<BestList> best(end - begin, BestList(k_));
    double buf[kRefBlock];
    for (std::size_t base = 0; base < rows; base += kRefBlock) {
      const std::size_t len = std::min(kRefBlock, rows - base);
      for (std::size_t q = begin; q < end; ++q) {
        const double* query = features.row(q);
        {
          const double* col = columns_.data() + base;
          const double qv = query[0];
          for (std::size_t j = 0; j < len; ++j) {
            double d = qv - col[j];
            buf[j] = d * d;
          }
        }
        for (std::size_t c = 1; c < cols; ++c) {
          const double* col = columns_.data() + c * rows + base;
          const double qv = query[c];
          for (std::size_t j = 0; j < len; ++j) {
            double d = qv - col[j];
            buf[j] += d * d;
          }
        }
        BestList& list = best[q - begin];
        double block_min = buf[0];
        for (std::size_t j = 1; j < len; ++j)
          block_min = std::min(block_min, buf[j]);
        if (block_min >= list.worst()) continue;
        for (std::size_t j = 0; j < len; ++j) {
          if (buf[j] < list.worst()) list.offer(buf[j], base + j);
        }
      }
    }
    for (std::size_t q = begin; q < end; ++q) {
      const BestList& list = best[q - begin];
      double* s = out.data() + q * k;
      for (int r = 0; r < list.count; ++r)
        s[train_labels_[list.index[r]]] += 1.0 / static_cast<double>(k_);
    }
  });
  return out;
}

void KnnModel::write_payload(BinarySink& sink) const {
  sink.put_i32(k_);
  sink.put_i32_array(train_labels_);
  sink.put_f64_array(columns_);
}

std::unique_ptr<Model> train_knn(const FeatureMatrix& data,
                                 const KnnParams& params, std::uint64_t seed) {
  data.validate_for_training();
  if (params.k < 1) throw ConfigError("knn k must be >= 1");
  if (static_cast<std::size_t>(params.k) > data.rows)
    throw ConfigError("knn k (" + std::to_string(params.k) +
                      ") exceeds the number of training rows (" +
                      std::to_string(data.rows) + ")");

  std::vector<double> columns(data.rows * data.cols);
  for (std::size_t i = 0; i < data.rows; ++i) {
    const double* row = data.row(i);
    for (std::size_t c = 0; c < data.cols; ++c)
      columns[c * data.rows + i] = row[c];
  }
  std::vector<std::int32_t> labels(data.labels.begin(), data.labels.end());

  ModelManifest manifest;
  manifest.kind = "knn";
  manifest.class_count = data.class_count();
  manifest.feature_count = data.cols;
  manifest.feature_names = data.feature_names;
  manifest.seed = seed;
  nlohmann::json hp;
  hp["k"] = params.k;
  manifest.hyperparameters_json = hp.dump();

  return std::make_unique<KnnModel>(std::move(manifest), params.k,
                                    std::move(columns), std::move(labels));
}

std::unique_ptr<Model> load_knn(ModelManifest manifest, BinarySource& source) {
  int k = source.get_i32();
  std::vector<std::int32_t> labels = source.get_i32_array();
  std::vector<double> columns = source.get_f64_array();
  if (k < 1 || labels.empty() ||
      columns.size() != labels.size() * manifest.feature_count)
    throw SchemaError("knn payload is inconsistent");
  for (std::int32_t lab : labels) {
    if (lab < 0 || lab >= manifest.class_count)
      throw SchemaError("knn payload has a label outside the class range");
  }
  return std::make_unique<KnnModel>(std::move(manifest), k, std::move(columns),
                                    std::move(labels));
}

}  // namespace oilsense
