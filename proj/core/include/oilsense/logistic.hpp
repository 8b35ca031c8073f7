#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "oilsense/model.hpp"

namespace oilsense {

struct LogisticParams {
  double learning_rate = 0.1;
  double l2_penalty = 1e-4;
  int epochs = 500;
};

// Mean cross-entropy plus (l2/2)*|W|^2 over the non-bias weights, and its
// gradient, at the given weights.  W is class-major, (cols+1) per class with
// the bias last.  Exposed so the finite-difference oracle can probe the same
// objective the trainer descends.
double logistic_loss(const FeatureMatrix& data, const std::vector<double>& w,
                     double l2_penalty);
std::vector<double> logistic_gradient(const FeatureMatrix& data,
                                      const std::vector<double>& w,
                                      double l2_penalty);

class LogisticModel final : public Model {
 public:
  LogisticModel(ModelManifest manifest, std::vector<double> weights);

  std::vector<double> score(const FeatureMatrix& features) const override;
  void write_payload(BinarySink& sink) const override;

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& loss_history() const { return loss_history_; }
  void set_loss_history(std::vector<double> history);

 private:
  std::vector<double> weights_;  // class_count x (feature_count + 1)
  std::vector<double> loss_history_;
};

// Full-batch gradient descent from zero weights; softmax scores.  Throws
// NumericError naming the epoch if the loss turns non-finite.
std::unique_ptr<Model> train_logistic(const FeatureMatrix& data,
                                      const LogisticParams& params,
                                      std::uint64_t seed);

std::unique_ptr<Model> load_logistic(ModelManifest manifest,
                                     BinarySource& source);

}  // namespace oilsense
