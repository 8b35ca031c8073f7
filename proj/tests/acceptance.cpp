// Release gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
// usage: acceptance <cli-binary> <work-dir>
//
// Criteria 2-5 exercise the library directly; 1 and 6 drive the installed
// CLI the way a user would.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oilsense/common.hpp"
#include "oilsense/config.hpp"
#include "oilsense/csvio.hpp"
#include "oilsense/dataset.hpp"
#include "oilsense/features.hpp"
#include "oilsense/forest.hpp"
#include "oilsense/knn.hpp"
#include "oilsense/logistic.hpp"
#include "oilsense/metrics.hpp"
#include "oilsense/resonator.hpp"
#include "oilsense/rng.hpp"
#include "oilsense/svm.hpp"

using namespace oilsense;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Criterion {
  int number;
  std::string title;
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void require(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

int run_cli(const std::string& cli, const std::string& args,
            const std::string& log_path) {
  std::string cmd = "\"" + cli + "\" " + args + " > \"" + log_path +
                    "\" 2>&1";
  return std::system(cmd.c_str());
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<unreadable:" + path + ">";
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, int classes,
                            std::uint64_t seed) {
  FeatureMatrix m;
  m.rows = rows;
  m.cols = cols;
  for (std::size_t c = 0; c < cols; ++c)
    m.feature_names.push_back("f" + std::to_string(c));
  Rng rng(seed);
  for (std::size_t i = 0; i < rows * cols; ++i)
    m.values.push_back(rng.gaussian(1.0));
  for (std::size_t i = 0; i < rows; ++i)
    m.labels.push_back(static_cast<int>(rng.below(classes)));
  for (int c = 0; c < classes; ++c) m.labels[c] = c;
  return m;
}

// ---------------------------------------------------------------- criterion 1

void check_reproduction(Criterion& c, const std::string& cli,
                        const std::string& dir) {
  auto t0 = std::chrono::steady_clock::now();
  int rc = run_cli(cli, "reproduce --out \"" + dir + "\"", dir + ".log");
  double wall = seconds_since(t0);
  if (rc != 0) {
    c.fail("reproduce exited with status " + std::to_string(rc) +
           ", see " + dir + ".log");
    return;
  }
  c.require(wall < 600.0,
            "reproduce took " + fmt(wall) + " s, budget is 600 s");

  json mj;
  try {
    mj = json::parse(read_bytes((fs::path(dir) / "metrics.json").string()));
  } catch (const std::exception& e) {
    c.fail(std::string("metrics.json unreadable: ") + e.what());
    return;
  }
  auto acc = [&](const char* kind) {
    return mj.at("models").at(kind).at("accuracy").get<double>();
  };
  auto auc = [&](const char* kind) {
    return mj.at("models").at(kind).at("macro_auc").get<double>();
  };

  double forest = acc("forest"), knn = acc("knn"), svm = acc("svm"),
         logistic = acc("logistic");
  c.require(forest >= 0.95,
            "forest accuracy " + fmt(forest) + " below 0.95");
  c.require(knn >= 0.90, "knn accuracy " + fmt(knn) + " below 0.90");
  c.require(svm >= 0.90, "svm accuracy " + fmt(svm) + " below 0.90");
  c.require(logistic <= forest - 0.15,
            "logistic accuracy " + fmt(logistic) +
                " not clearly below forest " + fmt(forest));

  double fa = auc("forest"), ka = auc("knn"), sa = auc("svm"),
         la = auc("logistic");
  c.require(fa >= ka, "forest macro AUC " + fmt(fa) + " below knn " + fmt(ka));
  c.require(fa >= sa, "forest macro AUC " + fmt(fa) + " below svm " + fmt(sa));
  c.require(std::min(ka, sa) > la,
            "knn/svm macro AUC " + fmt(std::min(ka, sa)) +
                " not above logistic " + fmt(la));
  c.detail = "wall " + fmt(wall) + " s; accuracy forest " + fmt(forest) +
             ", knn " + fmt(knn) + ", svm " + fmt(svm) + ", logistic " +
             fmt(logistic);
}

// ---------------------------------------------------------------- criterion 2

void check_physics(Criterion& c) {
  auto resonator = default_resonator();
  auto lib = default_material_library();
  auto grid = uniform_grid(1.0e9, 2.8e9, 1801);
  const double step = grid[1] - grid[0];

  // Empty sensor: both notches sit at their design frequencies.
  Trace air_trace = s21_response(resonator, air(), 0.0, grid, 0.0, 1);
  auto argmin_in = [&](double lo, double hi) {
    double best_v = 1e30, best_f = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] < lo || grid[i] > hi) continue;
      if (air_trace[i].s21_db < best_v) {
        best_v = air_trace[i].s21_db;
        best_f = grid[i];
      }
    }
    return best_f;
  };
  double m1 = argmin_in(1.0e9, 2.0e9), m2 = argmin_in(2.0e9, 2.8e9);
  c.require(std::abs(m1 - 1.45e9) <= step + 1e-6,
            "mode 1 air dip at " + fmt(m1 / 1e9) + " GHz, expected 1.45");
  c.require(std::abs(m2 - 2.80e9) <= step + 1e-6,
            "mode 2 air dip at " + fmt(m2 / 1e9) + " GHz, expected 2.80");

  // Less oil gap -> stronger coupling -> lower resonance, for every oil and
  // both modes, across a descending height ladder.
  for (const auto& material : lib) {
    for (int m = 0; m < 2; ++m) {
      double prev = -1.0;
      for (double z : {16.0, 8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 0.0}) {
        double f = loaded_resonance(resonator.modes[m], material, z).f_res_hz;
        if (prev > 0.0 && f >= prev)
          c.fail("resonance failed to drop from z ladder for " +
                 material.name + " mode " + std::to_string(m));
        prev = f;
      }
    }
  }

  // Permittivity ranking must be mirrored (reversed) by the resonances.
  std::vector<std::pair<double, std::string>> by_eps, by_f;
  for (const auto& material : lib) {
    double eps = permittivity_at(material, 1.45e9).eps_real;
    double f = loaded_resonance(resonator.modes[0], material, 1.0).f_res_hz;
    by_eps.push_back({eps, material.name});
    by_f.push_back({f, material.name});
  }
  std::sort(by_eps.begin(), by_eps.end());
  std::sort(by_f.begin(), by_f.end());
  for (std::size_t i = 0; i < by_eps.size(); ++i) {
    if (by_eps[i].second != by_f[by_f.size() - 1 - i].second) {
      c.fail("permittivity order is not anti-correlated with resonance order");
      break;
    }
  }

  // Oil far above the board must look like no oil at all.
  double worst = 0.0;
  for (const auto& material : lib) {
    Trace far = s21_response(resonator, material, 50.0, grid, 0.0, 1);
    for (std::size_t i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::abs(far[i].s21_db - air_trace[i].s21_db));
  }
  c.require(worst <= 0.01, "trace at z=50 mm deviates from unloaded by " +
                               fmt(worst) + " dB (allowed 0.01)");
  c.detail = "worst unloaded deviation " + fmt(worst) + " dB";
}

// ---------------------------------------------------------------- criterion 3

void check_features(Criterion& c) {
  auto resonator = default_resonator();
  auto lib = default_material_library();
  auto grid = uniform_grid(1.0e9, 2.8e9, 1801);
  auto z_grid = geometric_grid(0.02, 10.0, 25);
  const std::array<double, 2> f0s = {resonator.modes[0].f0_hz,
                                     resonator.modes[1].f0_hz};

  int traces = 0;
  double worst_f = 0.0, worst_q = 0.0, worst_d = 0.0;
  for (const auto& material : lib) {
    for (double z : z_grid) {
      Trace trace = s21_response(resonator, material, z, grid, 0.0, 1);
      ResonanceFeatures feats;
      try {
        feats = extract(trace, f0s);
      } catch (const std::exception& e) {
        c.fail(material.name + " z=" + fmt(z) + ": " + e.what());
        continue;
      }
      ++traces;
      for (int m = 0; m < 2; ++m) {
        auto truth = loaded_resonance(resonator.modes[m], material, z);
        double depth_truth = resonator.modes[m].depth0_db * truth.q_loaded /
                             resonator.modes[m].q0;
        double df = std::abs(feats.modes[m].f_res_hz - truth.f_res_hz);
        double dq = std::abs(feats.modes[m].q_factor - truth.q_loaded) /
                    truth.q_loaded;
        double dd = std::abs(feats.modes[m].depth_db - depth_truth);
        worst_f = std::max(worst_f, df);
        worst_q = std::max(worst_q, dq);
        worst_d = std::max(worst_d, dd);
        if (df > 1e5)
          c.fail(material.name + " z=" + fmt(z) + " mode " +
                 std::to_string(m) + ": resonance off by " + fmt(df / 1e3) +
                 " kHz");
        if (dq > 0.02)
          c.fail(material.name + " z=" + fmt(z) + " mode " +
                 std::to_string(m) + ": Q off by " + fmt(dq * 100.0) + "%");
        if (dd > 0.2)
          c.fail(material.name + " z=" + fmt(z) + " mode " +
                 std::to_string(m) + ": depth off by " + fmt(dd) + " dB");
      }
    }
  }
  c.require(traces == 100, "expected 100 traces, extracted " +
                               std::to_string(traces));
  if (c.pass)
    c.detail = "100 traces; worst |df| " + fmt(worst_f / 1e3) +
               " kHz, dq/q " + fmt(worst_q * 100.0) + "%, |dd| " +
               fmt(worst_d) + " dB";
}

// ---------------------------------------------------------------- criterion 4

void check_logistic_oracle(Criterion& c) {
  for (double l2 : {0.0, 0.01}) {
    FeatureMatrix data = random_matrix(60, 5, 4, 1234 + (l2 > 0));
    Rng rng(77);
    std::vector<double> w(4 * (data.cols + 1));
    for (double& v : w) v = rng.gaussian(0.6);

    std::vector<double> analytic = logistic_gradient(data, w, l2);
    double scale = 1.0;
    for (double g : analytic) scale = std::max(scale, std::abs(g));
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      double keep = w[i];
      w[i] = keep + h;
      double up = logistic_loss(data, w, l2);
      w[i] = keep - h;
      double down = logistic_loss(data, w, l2);
      w[i] = keep;
      worst = std::max(
          worst, std::abs((up - down) / (2.0 * h) - analytic[i]) / scale);
    }
    if (worst > 1e-5)
      c.fail("logistic gradient off by rel " + fmt(worst) + " at l2=" +
             fmt(l2));
  }
}

void check_knn_oracle(Criterion& c) {
  FeatureMatrix train = random_matrix(3000, 8, 4, 5150);
  FeatureMatrix queries = random_matrix(200, 8, 4, 5151);
  auto model = train_knn(train, KnnParams{7}, 1);
  auto* knn = dynamic_cast<KnnModel*>(model.get());
  if (knn == nullptr) {
    c.fail("knn model has the wrong concrete type");
    return;
  }

  std::vector<double> scores = model->score(queries);
  int bad_lists = 0, bad_scores = 0;
  for (std::size_t q = 0; q < queries.rows; ++q) {
    const double* query = queries.row(q);
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t r = 0; r < train.rows; ++r) {
      double acc = 0.0;
      for (std::size_t col = 0; col < train.cols; ++col) {
        double d = train.at(r, col) - query[col];
        acc += d * d;
      }
      dist.push_back({acc, r});
    }
    std::sort(dist.begin(), dist.end());

    std::vector<std::size_t> want;
    std::vector<double> votes(4, 0.0);
    for (int i = 0; i < 7; ++i) {
      want.push_back(dist[i].second);
      votes[train.labels[dist[i].second]] += 1.0 / 7.0;
    }
    if (knn->neighbors(query) != want) ++bad_lists;
    for (int cls = 0; cls < 4; ++cls) {
      if (scores[q * 4 + cls] != votes[cls]) ++bad_scores;
    }
  }
  if (bad_lists > 0)
    c.fail(std::to_string(bad_lists) +
           " of 200 neighbor lists differ from brute force");
  if (bad_scores > 0)
    c.fail(std::to_string(bad_scores) + " vote entries differ");
}

void check_cart_oracle(Criterion& c) {
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t rows = 25 + rng.below(36);
    std::size_t cols = 3 + rng.below(4);
    int classes = 2 + static_cast<int>(rng.below(3));
    int min_leaf = 1 + static_cast<int>(rng.below(3));
    FeatureMatrix data =
        random_matrix(rows, cols, classes, 9000 + trial);
    // Quantize one feature so threshold ties show up.
    for (std::size_t r = 0; r < rows; ++r)
      data.values[r * cols] = std::floor(data.values[r * cols] * 2.0) / 2.0;

    std::vector<std::uint32_t> row_idx;
    for (std::uint32_t r = 0; r < rows; ++r) row_idx.push_back(r);
    std::vector<int> feats;
    for (int f = 0; f < static_cast<int>(cols); ++f) feats.push_back(f);

    SplitCandidate got =
        best_split(data, row_idx, feats, min_leaf, classes);

    // Exhaustive re-derivation.
    SplitCandidate want;
    for (int f : feats) {
      std::vector<double> vals;
      for (std::uint32_t r : row_idx) vals.push_back(data.at(r, f));
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        double thr = 0.5 * (vals[i] + vals[i + 1]);
        std::vector<std::size_t> lc(classes, 0), rc(classes, 0);
        for (std::uint32_t r : row_idx) {
          if (data.at(r, f) <= thr) lc[data.labels[r]]++;
          else rc[data.labels[r]]++;
        }
        std::size_t nl = 0, nr = 0;
        for (auto v : lc) nl += v;
        for (auto v : rc) nr += v;
        if (nl < static_cast<std::size_t>(min_leaf) ||
            nr < static_cast<std::size_t>(min_leaf))
          continue;
        double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
        double imp =
            (dl * gini_impurity(lc) + dr * gini_impurity(rc)) / (dl + dr);
        if (!want.found || imp < want.impurity) {
          want.found = true;
          want.feature = f;
          want.threshold = thr;
          want.impurity = imp;
        }
      }
    }

    if (got.found != want.found || got.feature != want.feature ||
        got.threshold != want.threshold ||
        std::abs(got.impurity - want.impurity) > 1e-12) {
      c.fail("split mismatch on trial " + std::to_string(trial) +
             " (got feature " + std::to_string(got.feature) + " thr " +
             fmt(got.threshold) + ", want feature " +
             std::to_string(want.feature) + " thr " + fmt(want.threshold) +
             ")");
    }
  }
}

void check_svm_oracle(Criterion& c) {
  struct Fixture {
    std::size_t per_class;
    int classes;
    double spread;
    SvmParams params;
    std::uint64_t seed;
  };
  std::vector<Fixture> fixtures = {
      {30, 4, 0.5, SvmParams{10.0, "rbf", 0.5, 1e-3, 50}, 42},
      {25, 3, 2.5, SvmParams{0.01, "rbf", 1.0, 1e-3, 30}, 5},
      {25, 3, 2.5, SvmParams{1000.0, "rbf", 8.0, 1e-3, 30}, 6},
      {40, 2, 0.6, SvmParams{1.0, "linear", 0.0, 1e-3, 60}, 7},
      {20, 3, 3.0, SvmParams{100.0, "linear", 0.0, 1e-4, 5}, 8},
      {15, 2, 1.0, SvmParams{1e6, "rbf", 16.0, 1e-3, 40}, 9},
  };
  int index = 0;
  for (const auto& fx : fixtures) {
    FeatureMatrix data;
    data.cols = 2;
    data.feature_names = {"x", "y"};
    Rng rng(fx.seed);
    for (int cls = 0; cls < fx.classes; ++cls) {
      double cx = 4.0 * (cls % 2), cy = 4.0 * (cls / 2);
      for (std::size_t i = 0; i < fx.per_class; ++i) {
        data.values.push_back(cx + rng.gaussian(fx.spread));
        data.values.push_back(cy + rng.gaussian(fx.spread));
        data.labels.push_back(cls);
      }
    }
    data.rows = data.labels.size();

    auto model = train_svm(data, fx.params, fx.seed);
    auto* svm = dynamic_cast<SvmModel*>(model.get());
    for (int cls = 0; cls < fx.classes; ++cls) {
      double balance = 0.0;
      for (std::size_t r = 0; r < svm->support_rows(); ++r) {
        double a = svm->alpha(cls, r);
        if (a < -1e-8 || a > svm->c_penalty() + 1e-8)
          c.fail("fixture " + std::to_string(index) + " class " +
                 std::to_string(cls) + ": alpha " + fmt(a) +
                 " outside [0, C]");
        balance += a * svm->binary_label(cls, r);
      }
      if (std::abs(balance) > 1e-8)
        c.fail("fixture " + std::to_string(index) + " class " +
               std::to_string(cls) + ": dual balance " + fmt(balance));
    }
    ++index;
  }
}

// ---------------------------------------------------------------- criterion 5

void check_metric_oracles(Criterion& c) {
  // Trapezoid AUC against pairwise concordance on tie-heavy score sets.
  Rng rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 80 && compared < 50; ++trial) {
    std::size_t n = 10 + rng.below(191);
    std::vector<char> pos;
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      pos.push_back(rng.uniform() < 0.5 ? 1 : 0);
      scores.push_back(std::floor(rng.uniform() * 10.0) / 10.0);
    }
    std::size_t p = 0, ng = 0;
    for (char v : pos) (v ? p : ng)++;
    if (p == 0 || ng == 0) continue;
    ++compared;

    double wins = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pos[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (pos[j]) continue;
        if (scores[i] > scores[j]) wins += 1.0;
        else if (scores[i] == scores[j]) wins += 0.5;
      }
    }
    double concordance = wins / (static_cast<double>(p) * ng);
    double trapezoid = auc_trapezoid(roc_curve(pos, scores));
    if (std::abs(trapezoid - concordance) > 1e-12)
      c.fail("AUC mismatch " + fmt(trapezoid) + " vs " + fmt(concordance) +
             " on trial " + std::to_string(trial));
  }
  c.require(compared == 50,
            "only " + std::to_string(compared) + " usable AUC trials");

  // Accuracy must equal the confusion trace over its total.
  Rng srng(7);
  std::vector<int> truth;
  std::vector<double> scores;
  for (int i = 0; i < 500; ++i) {
    truth.push_back(static_cast<int>(srng.below(4)));
    for (int k = 0; k < 4; ++k) scores.push_back(srng.uniform());
  }
  EvalReport rep = evaluate_scores(truth, scores, 4, {"a", "b", "c", "d"},
                                   "random");
  double from_confusion = static_cast<double>(rep.confusion.diagonal()) /
                          static_cast<double>(rep.confusion.total());
  c.require(rep.accuracy == from_confusion,
            "accuracy disagrees with the confusion matrix");
  std::size_t hand_diag = 0;
  for (int i = 0; i < 500; ++i) {
    int pred = argmax_lowest(&scores[static_cast<std::size_t>(i) * 4], 4);
    if (pred == truth[i]) ++hand_diag;
  }
  c.require(hand_diag == rep.confusion.diagonal(),
            "confusion diagonal disagrees with a hand count");

  // Standardization: train columns sit at mean 0, stddev 1 to 1e-9.
  auto lib = default_material_library();
  Dataset ds = generate(default_resonator(), lib, geometric_grid(0.1, 6.0, 6),
                        uniform_grid(1.0e9, 2.8e9, 301), 5e-4, 11);
  SplitDataset split = split_standardize(ds, 0.8, true, 42);
  FeatureMatrix train = to_matrix(split.train);
  for (std::size_t col = 0; col < train.cols; ++col) {
    double mean = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) mean += train.at(r, col);
    mean /= static_cast<double>(train.rows);
    double var = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) {
      double d = train.at(r, col) - mean;
      var += d * d;
    }
    double sd = std::sqrt(var / static_cast<double>(train.rows));
    if (std::abs(mean) > 1e-9)
      c.fail("train column " + train.feature_names[col] + " mean " +
             fmt(mean));
    if (std::abs(sd - 1.0) > 1e-9)
      c.fail("train column " + train.feature_names[col] + " stddev " +
             fmt(sd));
  }

  // Stratified split counts stay within one row of the per-class target.
  Rng lrng(99);
  for (int trial = 0; trial < 10; ++trial) {
    int classes = 2 + static_cast<int>(lrng.below(4));
    std::vector<int> labels;
    std::vector<std::size_t> totals(classes, 0);
    for (int cls = 0; cls < classes; ++cls) {
      std::size_t n = 7 + lrng.below(200);
      totals[cls] = n;
      for (std::size_t i = 0; i < n; ++i) labels.push_back(cls);
    }
    Rng shuffler(trial);
    shuffler.shuffle(labels);
    double fraction = 0.5 + 0.4 * lrng.uniform();
    SplitIndices idx = split_indices(labels, fraction, true, 1000 + trial);
    std::vector<std::size_t> got(classes, 0);
    for (std::size_t i : idx.train) got[labels[i]]++;
    std::vector<std::size_t> tot(classes, 0);
    for (int l : labels) tot[l]++;
    for (int cls = 0; cls < classes; ++cls) {
      double target = fraction * static_cast<double>(tot[cls]);
      if (std::abs(static_cast<double>(got[cls]) - target) > 1.0)
        c.fail("class " + std::to_string(cls) + " train count " +
               std::to_string(got[cls]) + " vs target " + fmt(target));
    }
  }
}

// ---------------------------------------------------------------- criterion 6

void check_determinism(Criterion& c, const std::string& cli,
                       const std::string& run1, const std::string& run2) {
  int rc = run_cli(cli, "reproduce --out \"" + run2 + "\"", run2 + ".log");
  if (rc != 0) {
    c.fail("second reproduce exited with status " + std::to_string(rc));
    return;
  }
  const char* files[] = {
      "dataset.csv", "dataset.manifest.json", "split.manifest.json",
      "forest.model", "knn.model",            "logistic.model",
      "svm.model",   "report.txt",            "metrics.json",
      "roc.csv",     "roc.svg",               "metrics.svg",
      "summary.txt",
  };
  for (const char* name : files) {
    std::string a = read_bytes((fs::path(run1) / name).string());
    std::string b = read_bytes((fs::path(run2) / name).string());
    if (a != b)
      c.fail(std::string(name) + " differs between runs");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <cli-binary> <work-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argv[2];
  std::error_code ec;
  fs::remove_all(work, ec);
  fs::create_directories(work, ec);
  if (ec) {
    std::cerr << "cannot create work dir " << work << ": " << ec.message()
              << "\n";
    return 2;
  }

  std::vector<Criterion> criteria = {
      {1, "full reproduction meets the published ordering in ten minutes"},
      {2, "simulated physics behaves like the instrument"},
      {3, "feature extraction recovers the generator's ground truth"},
      {4, "classifiers agree with their independent oracles"},
      {5, "metrics agree with their independent oracles"},
      {6, "identical runs produce byte-identical artifacts"},
  };
  struct Budget {
    int number;
    double seconds;
  };
  const Budget budgets[] = {{2, 30.0}, {3, 30.0}, {4, 120.0}, {5, 30.0}};

  // Fast library-level criteria first, then the two CLI runs.
  for (const Budget& b : budgets) {
    Criterion& c = criteria[b.number - 1];
    auto t0 = std::chrono::steady_clock::now();
    try {
      switch (b.number) {
        case 2: check_physics(c); break;
        case 3: check_features(c); break;
        case 4:
          check_logistic_oracle(c);
          check_knn_oracle(c);
          check_cart_oracle(c);
          check_svm_oracle(c);
          break;
        case 5: check_metric_oracles(c); break;
      }
    } catch (const std::exception& e) {
      c.fail(std::string("unexpected exception: ") + e.what());
    }
    double wall = seconds_since(t0);
    c.require(wall < b.seconds, "took " + fmt(wall) + " s, budget " +
                                    fmt(b.seconds) + " s");
  }

  const std::string run1 = (work / "run1").string();
  const std::string run2 = (work / "run2").string();
  try {
    check_reproduction(criteria[0], cli, run1);
  } catch (const std::exception& e) {
    criteria[0].fail(std::string("unexpected exception: ") + e.what());
  }
  if (criteria[0].pass) {
    try {
      check_determinism(criteria[5], cli, run1, run2);
    } catch (const std::exception& e) {
      criteria[5].fail(std::string("unexpected exception: ") + e.what());
    }
  } else {
    criteria[5].fail("skipped: the first reproduction run already failed");
  }

  bool all_pass = true;
  for (const Criterion& c : criteria) {
    all_pass = all_pass && c.pass;
    std::cout << (c.pass ? "PASS" : "FAIL") << ": criterion " << c.number
              << " — " << c.title;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
  }
  return all_pass ? 0 : 1;
}
