#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "oilsense/common.hpp"
#include "oilsense/dataset.hpp"
#include "oilsense/resonator.hpp"

namespace oilsense {

struct ModeFeatures {
  double f_res_hz = 0.0;
  double normalized_shift = 0.0;  // (f_res - f0) / f0, <= 0 under oil load
  double depth_db = 0.0;          // baseline minus interpolated minimum
  double q_factor = 0.0;
};

struct ResonanceFeatures {
  std::array<ModeFeatures, 2> modes{};
};

struct ExtractOptions {
  double prominence_db = 3.0;  // a dip qualifies if this far below baseline
  int refine_passes = 3;       // alternating two-mode refinement rounds
};

struct ExtractionError : NumericError {
  ExtractionError(const std::string& what, int count)
      : NumericError(what), dip_count(count) {}
  int dip_count;
};

struct BandEdgeError : NumericError {
  using NumericError::NumericError;
};

// Per qualifying dip: parabolic f_res through the minimum sample and its two
// neighbours; depth relative to the trace's own baseline; q from the width
// 3 dB above the interpolated minimum, corrected for dip depth so the value
// matches the underlying Lorentzian q at any depth.  Dips are assigned to
// modes by proximity to the unloaded f0s.  Throws ExtractionError (with the
// observed count) unless exactly two dips qualify; BandEdgeError when a width
// crossing falls outside the trace.
ResonanceFeatures extract(const Trace& trace,
                          const std::array<double, 2>& unloaded_f0s_hz,
                          const ExtractOptions& options = {});

struct FeatureRecord {
  double height_mm = 0.0;
  ResonanceFeatures features;
  int label = -1;
};

struct FeatureDataset {
  std::vector<FeatureRecord> records;
  std::string schema_version;
};

// One row per (oil, z) trace of the cleaned raw dataset.
FeatureDataset extract_features(const Dataset& dataset,
                                const ResonatorModel& resonator,
                                const ExtractOptions& options = {},
                                unsigned threads = 0);

// Header exactly
// `height_mm,f1_hz,shift1,depth1_db,q1,f2_hz,shift2,depth2_db,q2,label`.
void export_features_csv(const FeatureDataset& dataset,
                         const std::string& path);
FeatureDataset import_features_csv(const std::string& path);

struct SplitFeatureDataset {
  FeatureDataset train;
  FeatureDataset test;
  Scaler scaler;  // fitted on the eight mode features of train
};

SplitFeatureDataset split_standardize(const FeatureDataset& dataset,
                                      double train_fraction, bool stratified,
                                      std::uint64_t seed);

// Eight feature columns (f1_hz, shift1, depth1_db, q1, f2_hz, shift2,
// depth2_db, q2) plus labels; height_mm is carried in the CSV only.
FeatureMatrix to_matrix(const FeatureDataset& dataset);

}  // namespace oilsense
