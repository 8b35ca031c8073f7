#include "oilsense/logistic.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

namespace oilsense {

namespace {

// One full pass: mean cross-entropy with the L2 term, and optionally the
// gradient.  Weights are class-major, feature_count + 1 per class, bias last.
double loss_and_gradient(const FeatureMatrix& data,
                         const std::vector<double>& w, double l2_penalty,
                         std::vector<double>* grad) {
  const std::size_t cols = data.cols;
  const std::size_t stride = cols + 1;
  const int k = static_cast<int>(w.size() / stride);
  const std::size_t n = data.rows;

  if (grad) grad->assign(w.size(), 0.0);
  std::vector<double> logits(k);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = data.row(i);
    double zmax = -1.0e300;
    for (int c = 0; c < k; ++c) {
      const double* wc = w.data() + c * stride;
      double z = wc[cols];
      for (std::size_t j = 0; j < cols; ++j) z += wc[j] * x[j];
      logits[c] = z;
      if (z > zmax) zmax = z;
    }
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      logits[c] = std::exp(logits[c] - zmax);
      sum += logits[c];
    }
    loss += std::log(sum) + zmax;
    int y = data.labels[i];
    const double* wy = w.data() + y * stride;
    double zy = wy[cols];
    for (std::size_t j = 0; j < cols; ++j) zy += wy[j] * x[j];
    loss -= zy;
    if (grad) {
      for (int c = 0; c < k; ++c) {
        double p = logits[c] / sum;
        double coeff = p - (c == y ? 1.0 : 0.0);
        double* gc = grad->data() + c * stride;
        for (std::size_t j = 0; j < cols; ++j) gc[j] += coeff * x[j];
        gc[cols] += coeff;
      }
    }
  }
  loss /= static_cast<double>(n);
  double reg = 0.0;
  for (int c = 0; c < k; ++c) {
    const double* wc = w.data() + c * stride;
    for (std::size_t j = 0; j < cols; ++j) reg += wc[j] * wc[j];
  }
  loss += 0.5 * l2_penalty * reg;
  if (grad) {
    for (auto& g : *grad) g /= static_cast<double>(n);
    for (int c = 0; c < k; ++c) {
      double* gc = grad->data() + c * stride;
      const double* wc = w.data() + c * stride;
      for (std::size_t j = 0; j < cols; ++j) gc[j] += l2_penalty * wc[j];
    }
  }
  return loss;
}

}  // namespace

double logistic_loss(const FeatureMatrix& data, const std::vector<double>& w,
                     double l2_penalty) {
  return loss_and_gradient(data, w, l2_penalty, nullptr);
}

std::vector<double> logistic_gradient(const FeatureMatrix& data,
                                      const std::vector<double>& w,
                                      double l2_penalty) {
  std::vector<double> grad;
  loss_and_gradient(data, w, l2_penalty, &grad);
  return grad;
}

LogisticModel::LogisticModel(ModelManifest manifest,
                             std::vector<double> weights)
    : weights_(std::move(weights)) {
  manifest_ = std::move(manifest);
}

void LogisticModel::set_loss_history(std::vector<double> history) {
  loss_history_ = std::move(history);
}

std::vector<double> LogisticModel::score(const FeatureMatrix& features) const {
  check_columns(features);
  const std::size_t cols = features.cols;
  const std::size_t stride = cols + 1;
  const int k = class_count();
  std::vector<double> out(features.rows * k);
  for (std::size_t i = 0; i < features.rows; ++i) {
    const double* x = features.row(i);
    double* s = out.data() + i * k;
    double zmax = -1.0e300;
    for (int c = 0; c < k; ++c) {
      const double* wc = weights_.data() + c * stride;
      double z = wc[cols];
      for (std::size_t j = 0; j < cols; ++j) z += wc[j] * x[j];
      s[c] = z;
      if (z > zmax) zmax = z;
    }
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      s[c] = std::exp(s[c] - zmax);
      sum += s[c];
    }
    for (int c = 0; c < k; ++c) s[c] /= sum;
  }
  return out;
}

void LogisticModel::write_payload(BinarySink& sink) const {
  sink.put_f64_array(weights_);
  sink.put_f64_array(loss_history_);
}

std::unique_ptr<Model> train_logistic(const FeatureMatrix& data,
                                      const LogisticParams& params,
                                      std::uint64_t seed) {
  data.validate_for_training();
  if (!(params.learning_rate > 0.0))
    throw ConfigError("logistic learning_rate must be positive");
  if (params.l2_penalty < 0.0)
    throw ConfigError("logistic l2_penalty must be non-negative");
  if (params.epochs < 1) throw ConfigError("logistic epochs must be >= 1");

  const int k = data.class_count();
  const std::size_t stride = data.cols + 1;
  std::vector<double> w(static_cast<std::size_t>(k) * stride, 0.0);
  std::vector<double> grad;
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(params.epochs) + 1);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double loss = loss_and_gradient(data, w, params.l2_penalty, &grad);
    if (!std::isfinite(loss))
      throw NumericError("logistic loss became non-finite at epoch " +
                         std::to_string(epoch));
    history.push_back(loss);
    for (std::size_t j = 0; j < w.size(); ++j)
      w[j] -= params.learning_rate * grad[j];
  }
  double final_loss = logistic_loss(data, w, params.l2_penalty);
  if (!std::isfinite(final_loss))
    throw NumericError("logistic loss became non-finite at epoch " +
                       std::to_string(params.epochs));
  history.push_back(final_loss);

  ModelManifest manifest;
  manifest.kind = "logistic";
  manifest.class_count = k;
  manifest.feature_count = data.cols;
  manifest.feature_names = data.feature_names;
  manifest.seed = seed;
  nlohmann::json hp;
  hp["epochs"] = params.epochs;
  hp["l2_penalty"] = params.l2_penalty;
  hp["learning_rate"] = params.learning_rate;
  manifest.hyperparameters_json = hp.dump();

  auto model = std::make_unique<LogisticModel>(std::move(manifest),
                                               std::move(w));
  model->set_loss_history(std::move(history));
  return model;
}

std::unique_ptr<Model> load_logistic(ModelManifest manifest,
                                     BinarySource& source) {
  std::vector<double> w = source.get_f64_array();
  std::vector<double> history = source.get_f64_array();
  std::size_t expected = static_cast<std::size_t>(manifest.class_count) *
                         (manifest.feature_count + 1);
  if (w.size() != expected)
    throw SchemaError("logistic payload has " + std::to_string(w.size()) +
                      " weights, expected " + std::to_string(expected));
  auto model = std::make_unique<LogisticModel>(std::move(manifest),
                                               std::move(w));
  model->set_loss_history(std::move(history));
  return model;
}

}  // namespace oilsense
