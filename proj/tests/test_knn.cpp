#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oilsense/common.hpp"
#include "oilsense/knn.hpp"
#include "oilsense/rng.hpp"

using namespace oilsense;

namespace {

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
  // Guarantee every class shows up.
  for (int c = 0; c < classes; ++c) m.labels[c] = c;
  return m;
}

// Straightforward reference: full distance list, stable sort on (d, index).
std::vector<std::size_t> naive_neighbors(const FeatureMatrix& train,
                                         const double* query, int k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t r = 0; r < train.rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < train.cols; ++c) {
      double diff = train.at(r, c) - query[c];
      acc += diff * diff;
    }
    d.push_back({acc, r});
  }
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (int i = 0; i < k; ++i) out.push_back(d[i].second);
  return out;
}

}  // namespace

TEST_CASE("neighbors match the brute-force reference") {
  FeatureMatrix train = random_matrix(500, 6, 3, 42);
  FeatureMatrix queries = random_matrix(60, 6, 3, 43);
  auto model = train_knn(train, KnnParams{7}, 1);
  auto* knn = dynamic_cast<KnnModel*>(model.get());
  REQUIRE(knn != nullptr);

  for (std::size_t q = 0; q < queries.rows; ++q) {
    auto got = knn->neighbors(queries.row(q));
    auto want = naive_neighbors(train, queries.row(q), 7);
    CHECK(got == want);
  }
}

TEST_CASE("distance ties go to the lower training row") {
  // Two identical points with different labels; both are tied for any query.
  FeatureMatrix train;
  train.rows = 3;
  train.cols = 1;
  train.feature_names = {"x"};
  train.values = {1.0, 1.0, 5.0};
  train.labels = {1, 0, 2};
  auto model = train_knn(train, KnnParams{1}, 1);
  auto* knn = dynamic_cast<KnnModel*>(model.get());

  double query = 1.0;
  auto nn = knn->neighbors(&query);
  REQUIRE(nn.size() == 1);
  CHECK(nn[0] == 0);

  FeatureMatrix probe = train;
  probe.rows = 1;
  probe.values = {1.0};
  probe.labels = {0};
  CHECK(model->predict(probe)[0] == 1);  // label of row 0
}

TEST_CASE("k equal to one memorizes distinct training points") {
  FeatureMatrix train = random_matrix(120, 4, 4, 9);
  auto model = train_knn(train, KnnParams{1}, 1);
  std::vector<int> pred = model->predict(train);
  for (std::size_t i = 0; i < train.rows; ++i) CHECK(pred[i] == train.labels[i]);
}

TEST_CASE("scores are vote fractions") {
  FeatureMatrix train = random_matrix(50, 3, 3, 17);
  auto model = train_knn(train, KnnParams{5}, 1);
  FeatureMatrix queries = random_matrix(20, 3, 3, 18);
  std::vector<double> s = model->score(queries);
  REQUIRE(s.size() == queries.rows * 3);
  for (std::size_t r = 0; r < queries.rows; ++r) {
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
      double v = s[r * 3 + c];
      CHECK(v >= 0.0);
      // Multiples of 1/k only.
      CHECK(std::abs(v * 5.0 - std::round(v * 5.0)) < 1e-12);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("threaded scoring matches single-threaded") {
  FeatureMatrix train = random_matrix(400, 5, 4, 3);
  FeatureMatrix queries = random_matrix(97, 5, 4, 4);
  auto model = train_knn(train, KnnParams{9}, 1);
  auto* knn = dynamic_cast<KnnModel*>(model.get());
  knn->set_threads(1);
  std::vector<double> one = model->score(queries);
  knn->set_threads(4);
  std::vector<double> four = model->score(queries);
  CHECK(one == four);
}

TEST_CASE("k bounds are validated") {
  FeatureMatrix train = random_matrix(10, 2, 2, 1);
  CHECK_THROWS_AS(train_knn(train, KnnParams{0}, 1), ConfigError);
  CHECK_THROWS_AS(train_knn(train, KnnParams{11}, 1), ConfigError);
  CHECK_NOTHROW(train_knn(train, KnnParams{10}, 1));
}

TEST_CASE("column mismatch at scoring time is a schema error") {
  FeatureMatrix train = random_matrix(20, 3, 2, 6);
  auto model = train_knn(train, KnnParams{3}, 1);
  FeatureMatrix wrong = random_matrix(5, 4, 2, 7);
  CHECK_THROWS_AS(model->score(wrong), SchemaError);
}
