#pragma once

namespace oilsense {

inline constexpr const char* version_string = "1.0.0";

// Bumped whenever a persisted artifact layout changes; loaders refuse
// mismatches loudly instead of misreading bytes.
inline constexpr int model_format_version = 1;
inline constexpr const char* dataset_schema_version = "oilsense.dataset.v1";
inline constexpr const char* feature_schema_version = "oilsense.features.v1";

}  // namespace oilsense
