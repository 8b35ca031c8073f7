#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "oilsense/config.hpp"
#include "oilsense/metrics.hpp"

namespace oilsense {

// Fixed artifact names inside the configured output directory.
namespace artifact {
inline constexpr const char* dataset_csv = "dataset.csv";
inline constexpr const char* dataset_manifest = "dataset.manifest.json";
inline constexpr const char* features_csv = "features.csv";
inline constexpr const char* split_manifest = "split.manifest.json";
inline constexpr const char* report_txt = "report.txt";
inline constexpr const char* metrics_json = "metrics.json";
inline constexpr const char* roc_csv = "roc.csv";
inline constexpr const char* roc_svg = "roc.svg";
inline constexpr const char* metrics_svg = "metrics.svg";
inline constexpr const char* summary_txt = "summary.txt";
std::string model_file(const std::string& kind);  // "<kind>.model"
}  // namespace artifact

struct GenerateResult {
  std::string csv_path;
  std::string manifest_path;
  std::size_t rows = 0;
  std::vector<std::size_t> per_class;
  std::uint64_t dataset_fnv = 0;
};

GenerateResult run_generate(const RunConfig& config, std::ostream& log);

struct TrainResult {
  std::vector<std::string> model_paths;
  std::string split_manifest_path;
  std::vector<std::string> warnings;
};

// Trains the requested kinds (empty = all four) on the dataset at
// dataset_csv, writing one model file each plus the split manifest the
// evaluator needs to rebuild the identical test subset.
TrainResult run_train(const RunConfig& config, const std::string& dataset_csv,
                      const std::vector<std::string>& kinds,
                      std::ostream& log);

struct EvaluateResult {
  std::vector<EvalReport> reports;
  ComparisonTable table;
  std::string report_path;
  std::string metrics_json_path;
  std::string roc_csv_path;
  std::string roc_svg_path;
  std::string metrics_svg_path;
};

// Verifies config/dataset hashes recorded in the split manifest and the
// model manifests (unless force), rebuilds the test split, scores every
// model, and writes the report, metrics JSON, ROC CSV and both SVGs.
EvaluateResult run_evaluate(const RunConfig& config,
                            const std::vector<std::string>& model_paths,
                            const std::string& split_manifest_path, bool force,
                            std::ostream& log);

struct ReproduceResult {
  GenerateResult generate;
  TrainResult train;
  EvaluateResult evaluate;
  std::string summary_path;
};

// generate -> train -> evaluate -> summary against the reference targets.
ReproduceResult run_reproduce(const RunConfig& config, std::ostream& log);

}  // namespace oilsense
