#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oilsense/dielectric.hpp"
#include "oilsense/forest.hpp"
#include "oilsense/knn.hpp"
#include "oilsense/logistic.hpp"
#include "oilsense/resonator.hpp"
#include "oilsense/svm.hpp"

namespace oilsense {

struct GridConfig {
  std::string kind;  // geometric | uniform
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  std::vector<double> materialize() const;
};

struct SplitOptions {
  double train_fraction = 0.8;
  bool stratified = true;
  bool trace_grouped = false;
};

struct RunConfig {
  std::vector<MaterialModel> materials;  // alphabetical
  ResonatorModel resonator;
  GridConfig z_grid{"geometric", 0.001, 8.0, 100};
  GridConfig f_grid{"uniform", 1.0e9, 2.8e9, 1801};
  double noise_sigma_db = 5e-4;
  std::string feature_mode = "raw";  // raw | resonance
  SplitOptions split;
  LogisticParams logistic;
  KnnParams knn;
  ForestParams forest;
  SvmParams svm;
  std::size_t svm_subsample = 32000;  // 0 = no cap
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  unsigned threads = 0;  // 0 = all hardware threads

  // Materials restricted to these names (alphabetical order preserved).
  std::vector<MaterialModel> selected_materials() const;
  std::vector<std::string> oils;  // empty = every material

  void validate() const;
};

RunConfig default_config();

// Strict JSON: unknown keys anywhere are a config error; every field falls
// back to its default when absent.
RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text);

// Canonical serialization (sorted keys, shortest round-trip numbers).
std::string config_to_json(const RunConfig& config);

// Hash of the canonical serialization minus fields that do not affect the
// science (out_dir, threads), so artifacts match across output locations.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace oilsense
