#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "oilsense/model.hpp"

namespace oilsense {

struct ConfusionMatrix {
  int class_count = 0;
  std::vector<std::size_t> counts;  // row = true class, column = predicted

  std::size_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * class_count + predicted];
  }
  std::size_t total() const;
  std::size_t diagonal() const;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // 0/0 cases are reported as 0 with the flag cleared.
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
  std::size_t support = 0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct EvalReport {
  std::string model_name;
  std::vector<std::string> class_names;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;
  std::vector<std::vector<RocPoint>> roc_curves;  // one per class
  std::vector<double> auc;                        // one per class
  double macro_auc = 0.0;
};

// One-vs-rest ROC by descending-score threshold sweep; rows with equal scores
// collapse into a single step, so ties contribute diagonal segments.  Points
// run from (0,0) to (1,1) with both coordinates non-decreasing.
std::vector<RocPoint> roc_curve(const std::vector<char>& positive,
                                const std::vector<double>& scores);

double auc_trapezoid(const std::vector<RocPoint>& curve);

EvalReport evaluate_scores(const std::vector<int>& truth,
                           const std::vector<double>& scores, int class_count,
                           const std::vector<std::string>& class_names,
                           const std::string& model_name);

// Scores the model on the test set and computes every reported metric.
// Throws ConfigError on an empty test set.
EvalReport evaluate(const Model& model, const FeatureMatrix& test,
                    const std::vector<std::string>& class_names,
                    const std::string& model_name);

struct ComparisonRow {
  std::string name;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double macro_auc = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // accuracy descending, ties by name
};

ComparisonTable compare(const std::vector<EvalReport>& reports);

std::string render_report_text(const EvalReport& report);
std::string render_comparison_text(const ComparisonTable& table);

// `model,class,fpr,tpr,threshold` rows; long curves are thinned to at most
// max_points (first and last kept) — AUC always uses the full curve.
std::string render_roc_csv(const std::vector<EvalReport>& reports,
                           std::size_t max_points = 2001);

}  // namespace oilsense
