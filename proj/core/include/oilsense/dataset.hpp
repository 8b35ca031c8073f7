#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oilsense/dielectric.hpp"
#include "oilsense/matrix.hpp"
#include "oilsense/resonator.hpp"

namespace oilsense {

struct SweepRecord {
  double height_mm = 0.0;
  double frequency_hz = 0.0;
  double s21_db = 0.0;
  int label = -1;  // class index, alphabetical over oil names; -1 = missing

  bool complete() const;  // all fields present and finite
};

// Everything needed to regenerate the record stream bit-identically.
struct GenerationManifest {
  std::string schema_version;
  std::uint64_t seed = 0;
  double noise_sigma_db = 0.0;
  std::vector<MaterialModel> materials;  // in label order
  ResonatorModel resonator;
  std::vector<double> z_grid_mm;
  std::vector<double> f_grid_hz;
};

std::string manifest_to_json(const GenerationManifest& manifest);
GenerationManifest manifest_from_json(const std::string& text);

struct Dataset {
  std::vector<SweepRecord> records;
  std::string schema_version;
  GenerationManifest manifest;

  std::vector<std::size_t> per_class_counts() const;
};

std::vector<double> geometric_grid(double min, double max, std::size_t count);
std::vector<double> uniform_grid(double min, double max, std::size_t count);

// One record per (oil, z, f), oils in the given order (callers pass them
// alphabetically sorted so labels follow the library contract), z then f
// ascending.  Per-trace noise seeds derive from the master seed, so the
// record stream is identical no matter how generation is scheduled.
Dataset generate(const ResonatorModel& resonator,
                 const std::vector<MaterialModel>& materials,
                 const std::vector<double>& z_grid_mm,
                 const std::vector<double>& f_grid_hz, double noise_sigma_db,
                 std::uint64_t seed, unsigned threads = 0);

// Drops records with missing fields, then exact duplicates (all four fields)
// keeping the first occurrence; order otherwise preserved.  Idempotent.
Dataset clean(const Dataset& dataset);

struct Scaler {
  std::vector<std::string> feature_names;
  std::vector<double> mean;
  std::vector<double> stddev;  // population convention (1/n)
};

// Fits mean/stddev per column; zero variance is an error naming the feature.
Scaler fit_scaler(const FeatureMatrix& data);
void apply_scaler(const Scaler& scaler, FeatureMatrix& data);

struct SplitDataset {
  Dataset train;
  Dataset test;
  Scaler scaler;  // fitted on train (height, frequency, s21)
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Shuffle split on row indices.  When stratified, per-class train counts hit
// round(n_class * train_fraction) exactly.  When group ids are given, whole
// groups stay on one side (quota counted in groups per class).
SplitIndices split_indices(const std::vector<int>& labels,
                           double train_fraction, bool stratified,
                           std::uint64_t seed,
                           const std::vector<std::size_t>* group_ids = nullptr);

SplitDataset split_standardize(const Dataset& dataset, double train_fraction,
                               bool stratified, std::uint64_t seed,
                               bool trace_grouped = false);

// Header exactly `height_mm,frequency_hz,s21_db,label`; shortest round-trip
// number formatting so import(export(d)) is value-identical.
void export_csv(const Dataset& dataset, const std::string& path);
Dataset import_csv(const std::string& path);

std::string dataset_csv_bytes(const Dataset& dataset);
std::uint64_t dataset_hash(const Dataset& dataset);  // FNV-1a over CSV bytes

// Three feature columns (height_mm, frequency_hz, s21_db) plus labels.
FeatureMatrix to_matrix(const Dataset& dataset);

// Group ids for trace-grouped splitting: consecutive runs of (label, height).
std::vector<std::size_t> trace_group_ids(const Dataset& dataset);

}  // namespace oilsense
