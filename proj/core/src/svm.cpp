#include "oilsense/svm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>

#include <nlohmann/json.hpp>

#include "oilsense/parallel.hpp"
#include "oilsense/rng.hpp"

namespace oilsense {

namespace {

// Lazily computed kernel rows in float, slot-mapped by row index so repeat
// visits to the active set are cheap.  Values are identical whether a row is
// cached or recomputed, so the cache never affects results, only speed.
// Callers flag rows unlikely to be revisited (alphas at a box bound); those
// are computed into side buffers instead of evicting the resident hot set.
struct KernelCache {
  std::size_t n = 0;
  std::size_t capacity = 0;
  bool rbf = true;
  double gamma = 0.0;
  const std::vector<std::vector<double>>* cols = nullptr;
  std::vector<float> rows;
  std::vector<std::uint32_t> tag;
  std::vector<double> scratch;
  std::vector<float> side[2];

  KernelCache(std::size_t n_rows, bool is_rbf, double g,
              const std::vector<std::vector<double>>* columns)
      : n(n_rows), rbf(is_rbf), gamma(g), cols(columns) {
    const std::size_t budget_bytes = std::size_t(2048) << 20;
    capacity = std::max<std::size_t>(16, budget_bytes / (n * sizeof(float)));
    capacity = std::min(capacity, n);
    rows.assign(capacity * n, 0.0f);
    tag.assign(capacity, std::numeric_limits<std::uint32_t>::max());
    scratch.resize(n);
    side[0].resize(n);
    side[1].resize(n);
  }

  const float* row(std::size_t i, bool keep, int side_slot) {
    std::size_t slot = i % capacity;
    float* cached = rows.data() + slot * n;
    if (tag[slot] == i) return cached;
    float* out = keep ? cached : side[side_slot].data();
    const std::size_t d = cols->size();
    if (rbf) {
      {
        const double* col = (*cols)[0].data();
        const double xi = col[i];
        for (std::size_t j = 0; j < n; ++j) {
          double diff = xi - col[j];
          scratch[j] = diff * diff;
        }
      }
      for (std::size_t c = 1; c < d; ++c) {
        const double* col = (*cols)[c].data();
        const double xi = col[i];
        for (std::size_t j = 0; j < n; ++j) {
          double diff = xi - col[j];
          scratch[j] += diff * diff;
        }
      }
      for (std::size_t j = 0; j < n; ++j)
        out[j] = static_cast<float>(std::exp(-gamma * scratch[j]));
    } else {
      {
        const double* col = (*cols)[0].data();
        const double xi = col[i];
        for (std::size_t j = 0; j < n; ++j) scratch[j] = xi * col[j];
      }
      for (std::size_t c = 1; c < d; ++c) {
        const double* col = (*cols)[c].data();
        const double xi = col[i];
        for (std::size_t j = 0; j < n; ++j) scratch[j] += xi * col[j];
      }
      for (std::size_t j = 0; j < n; ++j)
        out[j] = static_cast<float>(scratch[j]);
    }
    if (keep) tag[slot] = static_cast<std::uint32_t>(i);
    return out;
  }
};

struct MachineResult {
  std::vector<double> alpha;
  double bias = 0.0;
  bool converged = true;
  int sweeps = 0;
};

// Simplified SMO for one binary machine.  Each pass makes one full sweep over
// every row, stepping each KKT violator once, then runs a few round-robin
// polish rounds over the non-bound set; the partner for each step is the
// best-gap non-bound row, with seeded ring scans as the fallback so a
// stubborn partner can never stall progress.  max_passes caps the passes,
// and a row whose every partner fails is parked until the next pass.
MachineResult run_machine(KernelCache& cache, const std::vector<double>& y,
                          double c_penalty, double tol, int max_passes,
                          std::uint64_t seed) {
  const std::size_t n = y.size();
  MachineResult res;
  res.alpha.assign(n, 0.0);
  std::vector<double> err(n);
  for (std::size_t i = 0; i < n; ++i) err[i] = -y[i];
  double bias = 0.0;
  const double min_step = 1e-10 * c_penalty;
  Rng rng(seed);

  const std::vector<std::vector<double>>& cols = *cache.cols;
  const std::size_t d = cols.size();
  std::vector<double> diag(n, 1.0);  // rbf: K(x,x) = 1
  if (!cache.rbf) {
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += cols[c][i] * cols[c][i];
      diag[i] = dot;
    }
  }
  auto kernel_entry = [&](std::size_t i, std::size_t j) {
    if (cache.rbf) {
      double dist = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        double diff = cols[c][i] - cols[c][j];
        dist += diff * diff;
      }
      return std::exp(-cache.gamma * dist);
    }
    double dot = 0.0;
    for (std::size_t c = 0; c < d; ++c) dot += cols[c][i] * cols[c][j];
    return dot;
  };

  // One pairwise update.  Trial arithmetic costs O(d); the error cache is
  // only touched (and kernel rows only materialized) once the step is known
  // to move.
  auto try_step = [&](std::size_t i, std::size_t j) {
    if (i == j) return false;
    double ai_old = res.alpha[i];
    double aj_old = res.alpha[j];
    double lo, hi;
    if (y[i] != y[j]) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(c_penalty, c_penalty + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - c_penalty);
      hi = std::min(c_penalty, ai_old + aj_old);
    }
    if (lo >= hi) return false;

    double kij = kernel_entry(i, j);
    double eta = diag[i] + diag[j] - 2.0 * kij;
    if (eta <= 0.0) return false;

    double ei = err[i];
    double ej = err[j];
    double aj_new = aj_old + y[j] * (ei - ej) / eta;
    aj_new = std::min(hi, std::max(lo, aj_new));
    if (std::fabs(aj_new - aj_old) < min_step) return false;
    double ai_new = ai_old + y[i] * y[j] * (aj_old - aj_new);
    // Rounding can push ai a few ulp outside the box; snap it back so a row
    // whose weight cancels exactly really ends at zero.
    ai_new = std::min(c_penalty, std::max(0.0, ai_new));

    double di = y[i] * (ai_new - ai_old);
    double dj = y[j] * (aj_new - aj_old);
    double b1 = bias - ei - di * diag[i] - dj * kij;
    double b2 = bias - ej - di * kij - dj * diag[j];
    double bias_new;
    if (ai_new > 0.0 && ai_new < c_penalty) {
      bias_new = b1;
    } else if (aj_new > 0.0 && aj_new < c_penalty) {
      bias_new = b2;
    } else {
      bias_new = 0.5 * (b1 + b2);
    }
    double db = bias_new - bias;
    // Rows ending strictly inside the box belong to the active set and stay
    // resident; rows ending at a bound go to side buffers.  When both rows
    // map to the same cache slot the second must not overwrite the first
    // mid-use, whether the first was a hit or a fresh insert.
    bool keep_i = ai_new > 0.0 && ai_new < c_penalty;
    bool keep_j = aj_new > 0.0 && aj_new < c_penalty;
    if ((i % cache.capacity) == (j % cache.capacity)) keep_j = false;
    const float* row_i = cache.row(i, keep_i, 0);
    const float* row_j = cache.row(j, keep_j, 1);
    for (std::size_t t = 0; t < n; ++t)
      err[t] += di * row_i[t] + dj * row_j[t] + db;

    res.alpha[i] = ai_new;
    res.alpha[j] = aj_new;
    bias = bias_new;
    return true;
  };

  auto violates = [&](std::size_t i) {
    double r = err[i] * y[i];
    return (r < -tol && res.alpha[i] < c_penalty) ||
           (r > tol && res.alpha[i] > 0.0);
  };

  // Rows whose alpha sits strictly inside the box, tracked incrementally so
  // the second-choice heuristic scans only them.
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> nb_list;
  std::vector<std::size_t> nb_pos(n, npos);
  auto refresh_membership = [&](std::size_t t) {
    bool inside = res.alpha[t] > 0.0 && res.alpha[t] < c_penalty;
    if (inside && nb_pos[t] == npos) {
      nb_pos[t] = nb_list.size();
      nb_list.push_back(t);
    } else if (!inside && nb_pos[t] != npos) {
      std::size_t hole = nb_pos[t];
      std::size_t moved = nb_list.back();
      nb_list[hole] = moved;
      nb_pos[moved] = hole;
      nb_list.pop_back();
      nb_pos[t] = npos;
    }
  };

  // A row that exhausts every fallback partner cannot progress until some
  // other update shifts the landscape; flag it and retry no sooner than the
  // next full sweep, otherwise the hopeless ring scans dominate the runtime.
  std::vector<std::uint8_t> stuck(n, 0);

  auto examine = [&](std::size_t i) {
    if (stuck[i] || !violates(i)) return false;
    // First choice: the non-bound row with the largest error gap gives the
    // biggest unconstrained step.
    if (!nb_list.empty()) {
      double ei = err[i];
      std::size_t j = npos;
      double best_gap = -1.0;
      for (std::size_t t : nb_list) {
        if (t == i) continue;
        double gap = std::fabs(ei - err[t]);
        if (gap > best_gap) {
          best_gap = gap;
          j = t;
        }
      }
      if (j != npos && try_step(i, j)) {
        refresh_membership(i);
        refresh_membership(j);
        return true;
      }
    }
    // Fall back to ring scans, non-bound rows first, then everything.
    if (!nb_list.empty()) {
      std::size_t start = rng.below(nb_list.size());
      for (std::size_t off = 0; off < nb_list.size(); ++off) {
        std::size_t j = nb_list[(start + off) % nb_list.size()];
        if (try_step(i, j)) {
          refresh_membership(i);
          refresh_membership(j);
          return true;
        }
      }
    }
    std::size_t start = rng.below(n);
    for (std::size_t off = 0; off < n; ++off) {
      std::size_t j = (start + off) % n;
      if (try_step(i, j)) {
        refresh_membership(i);
        refresh_membership(j);
        return true;
      }
    }
    stuck[i] = 1;
    return false;
  };

  // How far a row sits outside its KKT condition; the selection key.
  auto violation_amount = [&](std::size_t i) {
    double r = err[i] * y[i];
    if (r < -tol && res.alpha[i] < c_penalty) return -r;
    if (r > tol && res.alpha[i] > 0.0) return r;
    return 0.0;
  };

  const char* trace = std::getenv("OILSENSE_SVM_TRACE");
  std::vector<std::uint32_t> batch;
  for (int pass = 0; pass < max_passes; ++pass) {
    ++res.sweeps;
    std::fill(stuck.begin(), stuck.end(), std::uint8_t(0));
    auto t_sweep = std::chrono::steady_clock::now();
    std::size_t sweep_steps = 0;
    for (std::size_t i = 0; i < n; ++i) sweep_steps += examine(i) ? 1 : 0;
    auto t_polish = std::chrono::steady_clock::now();
    // Polish the non-bound set with round-robin rounds until a round stops
    // paying for itself.  Stepping rows in order matters: chasing the worst
    // violator instead zigzags on near-duplicate opposite-label rows and the
    // bias oscillation it causes poisons the error cache for everyone else.
    std::size_t polish_steps = 0;
    int rounds = 0;
    for (; rounds < 8; ++rounds) {
      batch.assign(nb_list.begin(), nb_list.end());
      std::size_t changed = 0;
      for (std::uint32_t i : batch) changed += examine(i) ? 1 : 0;
      polish_steps += changed;
      if (changed < std::max<std::size_t>(batch.size() / 100, 8)) break;
    }
    if (trace) {
      auto t_end = std::chrono::steady_clock::now();
      double resid = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        resid = std::max(resid, violation_amount(i));
      std::cerr << "pass " << pass << " sweep_steps " << sweep_steps
                << " sweep_s "
                << std::chrono::duration<double>(t_polish - t_sweep).count()
                << " polish_steps " << polish_steps << " rounds " << rounds
                << " polish_s "
                << std::chrono::duration<double>(t_end - t_polish).count()
                << " nb " << nb_list.size() << " resid " << resid << "\n";
    }
    if (sweep_steps == 0 && polish_steps == 0) break;
  }

  // The per-step bias rule wanders when both rows sit at a box bound, so fix
  // the final bias from the KKT condition instead: rows strictly inside the
  // box must score exactly on the margin, i.e. their cached errors average 0.
  if (!nb_list.empty()) {
    double mean_err = 0.0;
    for (std::uint32_t i : nb_list) mean_err += err[i];
    mean_err /= static_cast<double>(nb_list.size());
    bias -= mean_err;
    for (std::size_t i = 0; i < n; ++i) err[i] -= mean_err;
  }

  res.bias = bias;
  for (std::size_t i = 0; i < n; ++i) {
    if (violates(i)) {
      res.converged = false;
      break;
    }
  }
  return res;
}

}  // namespace

SvmModel::SvmModel(ModelManifest manifest, Fit fit) : fit_(std::move(fit)) {
  manifest_ = std::move(manifest);
  const std::size_t rows = fit_.labels.size();
  const int k = manifest_.class_count;
  if (fit_.support.size() != rows * manifest_.feature_count ||
      fit_.alpha.size() != rows * static_cast<std::size_t>(k) ||
      fit_.bias.size() != static_cast<std::size_t>(k) ||
      fit_.converged.size() != static_cast<std::size_t>(k))
    throw SchemaError("svm fit arrays are inconsistent");
  if (fit_.kernel != "rbf" && fit_.kernel != "linear")
    throw SchemaError("svm payload has unknown kernel '" + fit_.kernel + "'");
  for (std::int32_t lab : fit_.labels) {
    if (lab < 0 || lab >= k)
      throw SchemaError("svm payload has a label outside the class range");
  }
  alpha_y_.resize(fit_.alpha.size());
  for (int cls = 0; cls < k; ++cls) {
    for (std::size_t i = 0; i < rows; ++i) {
      double yi = fit_.labels[i] == cls ? 1.0 : -1.0;
      alpha_y_[cls * rows + i] = fit_.alpha[cls * rows + i] * yi;
    }
  }
}

double SvmModel::alpha(int cls, std::size_t row) const {
  return fit_.alpha[static_cast<std::size_t>(cls) * fit_.labels.size() + row];
}

double SvmModel::binary_label(int cls, std::size_t row) const {
  return fit_.labels[row] == cls ? 1.0 : -1.0;
}

std::vector<double> SvmModel::score(const FeatureMatrix& features) const {
  check_columns(features);
  const int k = class_count();
  const std::size_t rows = fit_.labels.size();
  const std::size_t cols = manifest_.feature_count;
  const bool rbf = fit_.kernel == "rbf";
  std::vector<double> out(features.rows * k, 0.0);
  parallel_for(0, features.rows, threads_, [&](std::size_t q) {
    const double* x = features.row(q);
    double* s = out.data() + q * k;
    for (int c = 0; c < k; ++c) s[c] = fit_.bias[c];
    const double* sup = fit_.support.data();
    for (std::size_t t = 0; t < rows; ++t, sup += cols) {
      double kv;
      if (rbf) {
        double dist = 0.0;
        for (std::size_t d = 0; d < cols; ++d) {
          double diff = x[d] - sup[d];
          dist += diff * diff;
        }
        kv = std::exp(-fit_.gamma * dist);
      } else {
        kv = 0.0;
        for (std::size_t d = 0; d < cols; ++d) kv += x[d] * sup[d];
      }
      for (int c = 0; c < k; ++c) s[c] += alpha_y_[c * rows + t] * kv;
    }
  });
  return out;
}

void SvmModel::write_payload(BinarySink& sink) const {
  sink.put_u32(fit_.kernel == "rbf" ? 0u : 1u);
  sink.put_f64(fit_.gamma);
  sink.put_f64(fit_.c);
  sink.put_f64_array(fit_.support);
  sink.put_i32_array(fit_.labels);
  sink.put_f64_array(fit_.alpha);
  sink.put_f64_array(fit_.bias);
  std::vector<std::uint32_t> conv(fit_.converged.begin(),
                                  fit_.converged.end());
  sink.put_u32_array(conv);
}

std::unique_ptr<Model> train_svm(const FeatureMatrix& data,
                                 const SvmParams& params, std::uint64_t seed,
                                 unsigned threads) {
  data.validate_for_training();
  if (!(params.c > 0.0)) throw ConfigError("svm c must be positive");
  if (!(params.tolerance > 0.0))
    throw ConfigError("svm tolerance must be positive");
  if (params.max_passes < 1) throw ConfigError("svm max_passes must be >= 1");
  const bool rbf = params.kernel == "rbf";
  if (!rbf && params.kernel != "linear")
    throw ConfigError("svm kernel must be 'rbf' or 'linear'");
  if (rbf && !(params.gamma > 0.0))
    throw ConfigError("svm gamma must be positive for the rbf kernel");

  const std::size_t n = data.rows;
  const std::size_t d = data.cols;
  const int k = data.class_count();

  std::vector<std::vector<double>> cols(d, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = data.row(i);
    for (std::size_t c = 0; c < d; ++c) cols[c][i] = row[c];
  }
  KernelCache cache(n, rbf, params.gamma, &cols);

  std::vector<MachineResult> machines(k);
  std::vector<double> y(n);
  for (int cls = 0; cls < k; ++cls) {
    for (std::size_t i = 0; i < n; ++i)
      y[i] = data.labels[i] == cls ? 1.0 : -1.0;
    machines[cls] =
        run_machine(cache, y, params.c, params.tolerance, params.max_passes,
                    derive_seed(seed, "svm_machine", cls));
  }

  // Rows with zero alpha in every machine contribute nothing; drop them so
  // prediction only touches actual support vectors.
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    bool used = false;
    for (int cls = 0; cls < k; ++cls)
      if (machines[cls].alpha[i] != 0.0) used = true;
    if (used) keep.push_back(i);
  }

  SvmModel::Fit fit;
  fit.kernel = params.kernel;
  fit.gamma = params.gamma;
  fit.c = params.c;
  fit.support.reserve(keep.size() * d);
  fit.labels.reserve(keep.size());
  for (std::size_t i : keep) {
    const double* row = data.row(i);
    fit.support.insert(fit.support.end(), row, row + d);
    fit.labels.push_back(static_cast<std::int32_t>(data.labels[i]));
  }
  fit.alpha.resize(keep.size() * static_cast<std::size_t>(k));
  for (int cls = 0; cls < k; ++cls) {
    for (std::size_t t = 0; t < keep.size(); ++t)
      fit.alpha[cls * keep.size() + t] = machines[cls].alpha[keep[t]];
    fit.bias.push_back(machines[cls].bias);
    fit.converged.push_back(machines[cls].converged ? 1 : 0);
  }

  ModelManifest manifest;
  manifest.kind = "svm";
  manifest.class_count = k;
  manifest.feature_count = d;
  manifest.feature_names = data.feature_names;
  manifest.seed = seed;
  nlohmann::json hp;
  hp["c"] = params.c;
  hp["gamma"] = params.gamma;
  hp["kernel"] = params.kernel;
  hp["max_passes"] = params.max_passes;
  hp["tolerance"] = params.tolerance;
  manifest.hyperparameters_json = hp.dump();
  for (int cls = 0; cls < k; ++cls) {
    if (!machines[cls].converged) {
      manifest.warnings.push_back(
          "svm: one-vs-rest machine for class " + std::to_string(cls) +
          " still had KKT violations after " +
          std::to_string(machines[cls].sweeps) + " sweeps");
    }
  }

  auto model = std::make_unique<SvmModel>(std::move(manifest), std::move(fit));
  model->set_threads(threads);
  return model;
}

std::unique_ptr<Model> load_svm(ModelManifest manifest, BinarySource& source) {
  SvmModel::Fit fit;
  std::uint32_t kernel = source.get_u32();
  if (kernel > 1) throw SchemaError("svm payload has an unknown kernel code");
  fit.kernel = kernel == 0 ? "rbf" : "linear";
  fit.gamma = source.get_f64();
  fit.c = source.get_f64();
  fit.support = source.get_f64_array();
  fit.labels = source.get_i32_array();
  fit.alpha = source.get_f64_array();
  fit.bias = source.get_f64_array();
  std::vector<std::uint32_t> conv = source.get_u32_array();
  fit.converged.assign(conv.begin(), conv.end());
  return std::make_unique<SvmModel>(std::move(manifest), std::move(fit));
}

}  // namespace oilsense
