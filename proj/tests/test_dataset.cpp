#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <vector>

#include "doctest.h"
#include "oilsense/common.hpp"
#include "oilsense/csvio.hpp"
#include "oilsense/dataset.hpp"

using namespace oilsense;

namespace {

Dataset tiny_dataset(double noise = 0.0, std::uint64_t seed = 42) {
  auto lib = default_material_library();
  std::vector<MaterialModel> mats = {lib[0], lib[1]};
  auto z = geometric_grid(0.5, 4.0, 3);
  auto f = uniform_grid(1.2e9, 2.6e9, 41);
  return generate(default_resonator(), mats, z, f, noise, seed);
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("grids hit their endpoints with the right law") {
  auto g = geometric_grid(0.001, 8.0, 100);
  REQUIRE(g.size() == 100);
  CHECK(g.front() == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(g.back() == doctest::Approx(8.0).epsilon(1e-12));
  double ratio = g[1] / g[0];
  for (std::size_t i = 2; i < g.size(); ++i)
    CHECK(g[i] / g[i - 1] == doctest::Approx(ratio).epsilon(1e-9));

  auto u = uniform_grid(1.0e9, 2.8e9, 1801);
  REQUIRE(u.size() == 1801);
  CHECK(u.front() == 1.0e9);
  CHECK(u.back() == 2.8e9);
  CHECK(u[1] - u[0] == doctest::Approx(1e6).epsilon(1e-9));
  CHECK(std::is_sorted(u.begin(), u.end()));
}

TEST_CASE("generation order is oil-major, then height, then frequency") {
  Dataset ds = tiny_dataset();
  REQUIRE(ds.records.size() == 2 * 3 * 41);
  auto z = geometric_grid(0.5, 4.0, 3);
  auto f = uniform_grid(1.2e9, 2.6e9, 41);
  std::size_t i = 0;
  for (int label = 0; label < 2; ++label) {
    for (double height : z) {
      for (double freq : f) {
        CHECK(ds.records[i].label == label);
        CHECK(ds.records[i].height_mm == height);
        CHECK(ds.records[i].frequency_hz == freq);
        ++i;
      }
    }
  }
  CHECK(ds.per_class_counts() == std::vector<std::size_t>{123, 123});
  CHECK(ds.manifest.seed == 42);
  CHECK(ds.manifest.materials.size() == 2);
}

TEST_CASE("generation is deterministic per seed") {
  Dataset a = tiny_dataset(0.01, 42);
  Dataset b = tiny_dataset(0.01, 42);
  Dataset c = tiny_dataset(0.01, 43);
  CHECK(dataset_hash(a) == dataset_hash(b));
  CHECK(dataset_hash(a) != dataset_hash(c));
}

TEST_CASE("clean drops incomplete rows and exact duplicates") {
  Dataset ds = tiny_dataset();
  std::size_t n = ds.records.size();

  SweepRecord broken = ds.records[5];
  broken.s21_db = std::nan("");
  ds.records.push_back(broken);
  ds.records.push_back(ds.records[10]);  // exact duplicate
  SweepRecord unlabeled = ds.records[7];
  unlabeled.label = -1;
  ds.records.push_back(unlabeled);

  Dataset cleaned = clean(ds);
  CHECK(cleaned.records.size() == n);
  // Idempotent.
  CHECK(dataset_hash(clean(cleaned)) == dataset_hash(cleaned));
  // Original order preserved.
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(cleaned.records[i].frequency_hz == ds.records[i].frequency_hz);
    CHECK(cleaned.records[i].label == ds.records[i].label);
  }
}

TEST_CASE("csv round trip preserves every value") {
  Dataset ds = tiny_dataset(0.01);
  std::string path = temp_path("oilsense_test_dataset.csv");
  export_csv(ds, path);
  Dataset back = import_csv(path);
  REQUIRE(back.records.size() == ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    CHECK(back.records[i].height_mm == ds.records[i].height_mm);
    CHECK(back.records[i].frequency_hz == ds.records[i].frequency_hz);
    CHECK(back.records[i].s21_db == ds.records[i].s21_db);
    CHECK(back.records[i].label == ds.records[i].label);
  }
  CHECK(dataset_csv_bytes(back) == dataset_csv_bytes(ds));
  std::remove(path.c_str());
}

TEST_CASE("csv import rejects unknown columns") {
  std::string path = temp_path("oilsense_test_badcols.csv");
  write_text_file(path, "height_mm,frequency_hz,s21_db,label,extra\n");
  CHECK_THROWS_WITH_AS(import_csv(path), doctest::Contains("extra"),
                       SchemaError);
  std::remove(path.c_str());
}

TEST_CASE("manifest round trips through json") {
  Dataset ds = tiny_dataset(0.005);
  std::string text = manifest_to_json(ds.manifest);
  GenerationManifest back = manifest_from_json(text);
  CHECK(manifest_to_json(back) == text);
  CHECK(back.seed == ds.manifest.seed);
  CHECK(back.materials.size() == 2);
  CHECK(back.z_grid_mm == ds.manifest.z_grid_mm);
  CHECK(back.f_grid_hz == ds.manifest.f_grid_hz);
}

TEST_CASE("stratified split counts are exact and deterministic") {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 101 + 10 * c; ++i) labels.push_back(c);

  SplitIndices idx = split_indices(labels, 0.8, true, 42);
  SplitIndices again = split_indices(labels, 0.8, true, 42);
  CHECK(idx.train == again.train);
  CHECK(idx.test == again.test);
  CHECK(idx.train.size() + idx.test.size() == labels.size());

  std::set<std::size_t> seen(idx.train.begin(), idx.train.end());
  for (std::size_t t : idx.test) CHECK(seen.insert(t).second);
  CHECK(seen.size() == labels.size());

  std::vector<std::size_t> train_per_class(3, 0), total(3, 0);
  for (std::size_t i : idx.train) train_per_class[labels[i]]++;
  for (int l : labels) total[l]++;
  for (int c = 0; c < 3; ++c) {
    double want = std::round(0.8 * static_cast<double>(total[c]));
    CHECK(std::abs(static_cast<double>(train_per_class[c]) - want) <= 0.5);
  }
}

TEST_CASE("grouped split keeps whole traces together") {
  Dataset ds = tiny_dataset();
  auto groups = trace_group_ids(ds);
  REQUIRE(groups.size() == ds.records.size());
  // 2 oils x 3 heights = 6 trace groups of 41 rows each.
  CHECK(*std::max_element(groups.begin(), groups.end()) == 5);

  std::vector<int> labels;
  for (const auto& r : ds.records) labels.push_back(r.label);
  SplitIndices idx = split_indices(labels, 0.67, true, 42, &groups);
  std::set<std::size_t> train_groups, test_groups;
  for (std::size_t i : idx.train) train_groups.insert(groups[i]);
  for (std::size_t i : idx.test) test_groups.insert(groups[i]);
  for (std::size_t g : test_groups) CHECK(train_groups.count(g) == 0);
}

TEST_CASE("scaler standardizes the training block") {
  Dataset ds = tiny_dataset(0.01);
  SplitDataset split = split_standardize(ds, 0.8, true, 42);
  CHECK(split.train.records.size() + split.test.records.size() ==
        ds.records.size());

  FeatureMatrix train = to_matrix(split.train);
  REQUIRE(train.cols == 3);
  CHECK(train.feature_names ==
        std::vector<std::string>{"height_mm", "frequency_hz", "s21_db"});
  for (std::size_t c = 0; c < train.cols; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) mean += train.at(r, c);
    mean /= static_cast<double>(train.rows);
    double var = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) {
      double d = train.at(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(train.rows);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }

  // Test rows use the train-fitted scaler: reverse it and recover raw values.
  FeatureMatrix test = to_matrix(split.test);
  REQUIRE(split.scaler.mean.size() == 3);
  for (std::size_t r = 0; r < std::min<std::size_t>(test.rows, 20); ++r) {
    double raw = test.at(r, 0) * split.scaler.stddev[0] + split.scaler.mean[0];
    CHECK(raw == doctest::Approx(split.test.records[r].height_mm).epsilon(1e-12));
  }
}

TEST_CASE("zero variance column is an error naming the feature") {
  FeatureMatrix m;
  m.rows = 3;
  m.cols = 2;
  m.feature_names = {"good", "stuck"};
  m.values = {1.0, 5.0, 2.0, 5.0, 3.0, 5.0};
  m.labels = {0, 1, 0};
  CHECK_THROWS_WITH_AS(fit_scaler(m), doctest::Contains("stuck"), NumericError);
}
