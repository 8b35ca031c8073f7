#pragma once

#include <string>
#include <vector>

#include "oilsense/metrics.hpp"

namespace oilsense {

// One panel per class, one ROC curve per model, chance diagonal, legend with
// AUC values.  Output is deterministic: fixed-precision coordinates, no
// timestamps.
std::string render_roc_svg(const std::vector<EvalReport>& reports);

// Grouped bars: accuracy and macro precision/recall/F1 per model.
std::string render_metrics_svg(const ComparisonTable& table);

}  // namespace oilsense
