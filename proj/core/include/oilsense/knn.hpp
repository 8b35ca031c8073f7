#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "oilsense/model.hpp"

namespace oilsense {

struct KnnParams {
  int k = 5;
};

class KnnModel final : public Model {
 public:
  KnnModel(ModelManifest manifest, int k, std::vector<double> train_values,
           std::vector<std::int32_t> train_labels);

  std::vector<double> score(const FeatureMatrix& features) const override;
  void write_payload(BinarySink& sink) const override;

  // The k nearest training rows in rank order — Euclidean distance, distance
  // ties to the lower row index.  Exposed for the brute-force oracle.
  std::vector<std::size_t> neighbors(const double* query) const;

  int k() const { return k_; }
  std::size_t train_rows() const { return train_labels_.size(); }

  void set_threads(unsigned threads) { threads_ = threads; }

 private:
  int k_ = 0;
  // Column-major copy of the training features, one contiguous run per
  // feature, so the distance kernel streams sequentially.
  std::vector<double> columns_;
  std::vector<std::int32_t> train_labels_;
  unsigned threads_ = 0;
};

// Stores the training set; scores are vote fractions over the k nearest
// rows.  Throws ConfigError when k < 1 or k > rows.
std::unique_ptr<Model> train_knn(const FeatureMatrix& data,
                                 const KnnParams& params, std::uint64_t seed);

std::unique_ptr<Model> load_knn(ModelManifest manifest, BinarySource& source);

}  // namespace oilsense
