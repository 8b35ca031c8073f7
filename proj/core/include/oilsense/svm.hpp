#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "oilsense/model.hpp"

namespace oilsense {

struct SvmParams {
  double c = 1000.0;
  std::string kernel = "rbf";  // rbf | linear
  double gamma = 32.0;         // rbf width
  double tolerance = 1e-3;     // KKT violation tolerance
  int max_passes = 10;         // cap on full sweeps over the training rows
};

class SvmModel final : public Model {
 public:
  // One-vs-rest duals over a support matrix shared by every class, so a
  // prediction evaluates each kernel row once.
  struct Fit {
    std::vector<double> support;          // rows x cols, row-major
    std::vector<std::int32_t> labels;     // class label per support row
    std::vector<double> alpha;            // class-major, >= 0 per row
    std::vector<double> bias;             // per class
    std::vector<std::uint8_t> converged;  // per class
    std::string kernel;
    double gamma = 0.0;
    double c = 0.0;
  };

  SvmModel(ModelManifest manifest, Fit fit);

  std::vector<double> score(const FeatureMatrix& features) const override;
  void write_payload(BinarySink& sink) const override;

  // Dual state for the feasibility checks: alpha in [0, C] and
  // sum(alpha_i * y_i) = 0 per binary machine.
  std::size_t support_rows() const { return fit_.labels.size(); }
  double alpha(int cls, std::size_t row) const;
  double binary_label(int cls, std::size_t row) const;  // +1 / -1
  double c_penalty() const { return fit_.c; }
  bool converged(int cls) const { return fit_.converged[cls] != 0; }

  void set_threads(unsigned threads) { threads_ = threads; }

 private:
  Fit fit_;
  std::vector<double> alpha_y_;  // class-major, derived for scoring
  unsigned threads_ = 0;
};

// Simplified SMO per one-vs-rest machine: sweep the rows, pick KKT violators,
// pair each with the best-gap non-bound partner (seeded ring scans as the
// fallback), update the pair and the error cache.  max_passes caps the full
// sweeps; after each one the non-bound set gets a few round-robin polish
// rounds.
// A machine still holding violations when the sweep budget runs out gets a
// convergence warning in the manifest instead of an error.
std::unique_ptr<Model> train_svm(const FeatureMatrix& data,
                                 const SvmParams& params, std::uint64_t seed,
                                 unsigned threads = 0);

std::unique_ptr<Model> load_svm(ModelManifest manifest, BinarySource& source);

}  // namespace oilsense
