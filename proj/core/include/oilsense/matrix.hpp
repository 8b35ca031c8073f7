#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "oilsense/common.hpp"

namespace oilsense {

// Dense row-major feature table with integer class labels.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows * cols, row-major
  std::vector<int> labels;     // one class index per row
  std::vector<std::string> feature_names;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }

  int class_count() const {
    int k = 0;
    for (int label : labels) {
      if (label + 1 > k) k = label + 1;
    }
    return k;
  }

  // Training-data contract: finite values, labels in {0..K-1}, K >= 2.
  void validate_for_training() const {
    if (rows == 0 || cols == 0) throw SchemaError("feature matrix is empty");
    if (values.size() != rows * cols)
      throw SchemaError("feature matrix storage does not match rows*cols");
    if (labels.size() != rows)
      throw SchemaError("feature matrix has " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(rows) + " rows");
    for (double v : values) {
      if (!std::isfinite(v))
        throw SchemaError("feature matrix contains a non-finite value");
    }
    for (int label : labels) {
      if (label < 0) throw SchemaError("feature matrix has a negative label");
    }
    if (class_count() < 2)
      throw SchemaError("training data must contain at least two classes");
  }
};

}  // namespace oilsense
