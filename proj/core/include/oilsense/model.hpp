#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "oilsense/matrix.hpp"

namespace oilsense {

struct ModelManifest {
  std::string kind;  // logistic | knn | forest | svm
  int class_count = 0;
  std::size_t feature_count = 0;
  std::vector<std::string> feature_names;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;  // 0 when trained outside the pipeline
  std::string hyperparameters_json;  // canonical (sorted keys)
  std::vector<std::string> warnings;
};

class Model {
 public:
  virtual ~Model() = default;

  const ModelManifest& manifest() const { return manifest_; }
  const std::string& kind() const { return manifest_.kind; }
  int class_count() const { return manifest_.class_count; }
  std::size_t feature_count() const { return manifest_.feature_count; }

  void add_warning(const std::string& warning) {
    manifest_.warnings.push_back(warning);
  }
  void set_config_hash(std::uint64_t hash) { manifest_.config_hash = hash; }

  // Row-major rows x class_count scores.
  virtual std::vector<double> score(const FeatureMatrix& features) const = 0;

  std::vector<int> predict(const FeatureMatrix& features) const;

  // Kind-specific fitted state for persistence.
  virtual void write_payload(class BinarySink& sink) const = 0;

 protected:
  void check_columns(const FeatureMatrix& features) const;

  ModelManifest manifest_;
};

// Argmax with ties resolved to the lower class index.
int argmax_lowest(const double* scores, int count);

// Little-endian byte stream helpers for model payloads.
class BinarySink {
 public:
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_i32(std::int32_t v);
  void put_f64(double v);
  void put_f64_array(const std::vector<double>& v);
  void put_i32_array(const std::vector<std::int32_t>& v);
  void put_u32_array(const std::vector<std::uint32_t>& v);
  const std::string& bytes() const { return buffer_; }

 private:
  std::string buffer_;
};

class BinarySource {
 public:
  explicit BinarySource(std::string bytes) : buffer_(std::move(bytes)) {}
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  std::int32_t get_i32();
  double get_f64();
  std::vector<double> get_f64_array();
  std::vector<std::int32_t> get_i32_array();
  std::vector<std::uint32_t> get_u32_array();
  bool exhausted() const { return offset_ == buffer_.size(); }

 private:
  void need(std::size_t n) const;
  std::string buffer_;
  std::size_t offset_ = 0;
};

// Self-describing container: magic, format version, manifest header, binary
// payload.  Loading a file whose format version differs fails loudly.
void save_model(const Model& model, const std::string& path);
std::unique_ptr<Model> load_model(const std::string& path);

}  // namespace oilsense
