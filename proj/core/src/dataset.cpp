#include "oilsense/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "json_util.hpp"
#include "oilsense/common.hpp"
#include "oilsense/csvio.hpp"
#include "oilsense/parallel.hpp"
#include "oilsense/rng.hpp"
#include "oilsense/version.hpp"

namespace oilsense {

bool SweepRecord::complete() const {
  return std::isfinite(height_mm) && std::isfinite(frequency_hz) &&
         std::isfinite(s21_db) && label >= 0;
}

std::vector<std::size_t> Dataset::per_class_counts() const {
  std::vector<std::size_t> counts;
  for (const auto& r : records) {
    if (r.label < 0) continue;
    if (static_cast<std::size_t>(r.label) >= counts.size())
      counts.resize(r.label + 1, 0);
    ++counts[r.label];
  }
  return counts;
}

std::vector<double> geometric_grid(double min, double max, std::size_t count) {
  if (count == 0) throw ConfigError("grid count must be positive");
  if (!(min > 0.0) || !(max > min))
    throw ConfigError("geometric grid needs 0 < min < max");
  std::vector<double> grid(count);
  grid.front() = min;
  if (count == 1) return grid;
  double ratio = max / min;
  for (std::size_t i = 1; i + 1 < count; ++i) {
    grid[i] = min * std::pow(ratio, static_cast<double>(i) /
                                        static_cast<double>(count - 1));
  }
  grid.back() = max;
  return grid;
}

std::vector<double> uniform_grid(double min, double max, std::size_t count) {
  if (count == 0) throw ConfigError("grid count must be positive");
  if (!(max > min)) throw ConfigError("uniform grid needs min < max");
  std::vector<double> grid(count);
  grid.front() = min;
  if (count == 1) return grid;
  double span = max - min;
  for (std::size_t i = 1; i + 1 < count; ++i) {
    grid[i] = min + span * (static_cast<double>(i) /
                            static_cast<double>(count - 1));
  }
  grid.back() = max;
  return grid;
}

Dataset generate(const ResonatorModel& resonator,
                 const std::vector<MaterialModel>& materials,
                 const std::vector<double>& z_grid_mm,
                 const std::vector<double>& f_grid_hz, double noise_sigma_db,
                 std::uint64_t seed, unsigned threads) {
  resonator.validate();
  if (materials.empty()) throw ConfigError("material set is empty");
  for (const auto& m : materials) m.validate();
  if (z_grid_mm.empty()) throw ConfigError("z grid is empty");
  for (double z : z_grid_mm) {
    if (z < 0.0) throw ConfigError("z grid values must be >= 0");
  }
  if (f_grid_hz.empty()) throw ConfigError("frequency grid is empty");
  if (noise_sigma_db < 0.0) throw ConfigError("noise sigma must be >= 0");

  const std::size_t nz = z_grid_mm.size();
  const std::size_t nf = f_grid_hz.size();
  const std::size_t tasks = materials.size() * nz;

  Dataset ds;
  ds.schema_version = dataset_schema_version;
  ds.manifest = {dataset_schema_version, seed,     noise_sigma_db,
                 materials,              resonator, z_grid_mm,
                 f_grid_hz};
  ds.records.resize(tasks * nf);

  parallel_for(0, tasks, threads, [&](std::size_t t) {
    std::size_t oil = t / nz;
    std::size_t zi = t % nz;
    double z = z_grid_mm[zi];
    Trace trace = s21_response(resonator, materials[oil], z, f_grid_hz,
                               noise_sigma_db, derive_seed(seed, "trace", t));
    SweepRecord* out = ds.records.data() + t * nf;
    for (std::size_t i = 0; i < nf; ++i) {
      out[i] = {z, trace[i].frequency_hz, trace[i].s21_db,
                static_cast<int>(oil)};
    }
  });
  return ds;
}

namespace {

std::uint64_t canonical_bits(double v) {
  if (v == 0.0) v = 0.0;  // fold -0.0 into +0.0 for value identity
  return std::bit_cast<std::uint64_t>(v);
}

struct RecordKey {
  std::uint64_t h, f, s;
  int label;
  bool operator==(const RecordKey&) const = default;
};

struct RecordKeyHash {
  std::size_t operator()(const RecordKey& k) const {
    SplitMix64 mix{k.h};
    mix.state += k.f;
    std::uint64_t a = mix.next();
    mix.state += k.s;
    std::uint64_t b = mix.next();
    mix.state += static_cast<std::uint64_t>(k.label);
    return static_cast<std::size_t>(a ^ b ^ mix.next());
  }
};

}  // namespace

Dataset clean(const Dataset& dataset) {
  Dataset out;
  out.schema_version = dataset.schema_version;
  out.manifest = dataset.manifest;
  out.records.reserve(dataset.records.size());
  std::unordered_set<RecordKey, RecordKeyHash> seen;
  seen.reserve(dataset.records.size() * 2);
  for (const auto& r : dataset.records) {
    if (!r.complete()) continue;
    RecordKey key{canonical_bits(r.height_mm), canonical_bits(r.frequency_hz),
                  canonical_bits(r.s21_db), r.label};
    if (seen.insert(key).second) out.records.push_back(r);
  }
  return out;
}

Scaler fit_scaler(const FeatureMatrix& data) {
  if (data.rows == 0) throw ConfigError("cannot fit a scaler on no rows");
  Scaler scaler;
  scaler.feature_names = data.feature_names;
  scaler.mean.resize(data.cols);
  scaler.stddev.resize(data.cols);
  for (std::size_t c = 0; c < data.cols; ++c) {
    double lo = data.at(0, c), hi = lo;
    long double sum = 0.0L;
    for (std::size_t r = 0; r < data.rows; ++r) {
      double v = data.at(r, c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    if (lo == hi) {
      std::string name = c < data.feature_names.size()
                             ? data.feature_names[c]
                             : "column " + std::to_string(c);
      throw NumericError("feature '" + name +
                         "' has zero variance in the training subset; "
                         "standardization is undefined");
    }
    double mean = static_cast<double>(sum / data.rows);
    long double ss = 0.0L;
    for (std::size_t r = 0; r < data.rows; ++r) {
      double d = data.at(r, c) - mean;
      ss += static_cast<long double>(d) * d;
    }
    scaler.mean[c] = mean;
    scaler.stddev[c] = std::sqrt(static_cast<double>(ss / data.rows));
  }
  return scaler;
}

void apply_scaler(const Scaler& scaler, FeatureMatrix& data) {
  if (scaler.mean.size() != data.cols)
    throw SchemaError("scaler was fitted on a different column count");
  for (std::size_t r = 0; r < data.rows; ++r) {
    double* row = data.values.data() + r * data.cols;
    for (std::size_t c = 0; c < data.cols; ++c)
      row[c] = (row[c] - scaler.mean[c]) / scaler.stddev[c];
  }
}

SplitIndices split_indices(const std::vector<int>& labels,
                           double train_fraction, bool stratified,
                           std::uint64_t seed,
                           const std::vector<std::size_t>* group_ids) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1)");
  const std::size_t n = labels.size();
  if (n == 0) throw ConfigError("cannot split an empty dataset");
  int class_count = 0;
  for (int l : labels) {
    if (l < 0) throw SchemaError("split input has an unlabeled row");
    class_count = std::max(class_count, l + 1);
  }

  Rng rng(derive_seed(seed, "split"));
  SplitIndices out;

  if (group_ids == nullptr) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    if (!stratified) {
      std::size_t train_total = static_cast<std::size_t>(
          std::llround(static_cast<double>(n) * train_fraction));
      std::size_t test_total = n - train_total;
      for (std::size_t i = 0; i < n; ++i) {
        (i < test_total ? out.test : out.train).push_back(order[i]);
      }
      return out;
    }

    std::vector<std::size_t> class_n(class_count, 0);
    for (int l : labels) ++class_n[l];
    std::vector<std::size_t> test_quota(class_count);
    for (int c = 0; c < class_count; ++c) {
      if (class_n[c] < 2)
        throw ConfigError("stratified split needs >= 2 records in class " +
                          std::to_string(c));
      std::size_t train_c = static_cast<std::size_t>(std::llround(
          static_cast<double>(class_n[c]) * train_fraction));
      test_quota[c] = class_n[c] - train_c;
    }
    std::vector<std::size_t> taken(class_count, 0);
    for (std::size_t idx : order) {
      int c = labels[idx];
      if (taken[c] < test_quota[c]) {
        ++taken[c];
        out.test.push_back(idx);
      } else {
        out.train.push_back(idx);
      }
    }
    return out;
  }

  // Grouped: whole groups stay on one side; quotas count groups per class.
  if (group_ids->size() != n)
    throw SchemaError("group id list does not match the row count");
  std::vector<std::size_t> group_first;  // first row of each group
  std::vector<int> group_class;
  std::vector<std::size_t> group_of(n);
  {
    std::size_t current = static_cast<std::size_t>(-1);
    std::size_t gid_prev = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t gid = (*group_ids)[i];
      if (current == static_cast<std::size_t>(-1) || gid != gid_prev) {
        group_first.push_back(i);
        group_class.push_back(labels[i]);
        current = group_first.size() - 1;
        gid_prev = gid;
      } else if (labels[i] != group_class[current]) {
        throw SchemaError("a split group mixes class labels");
      }
      group_of[i] = current;
    }
  }
  const std::size_t g = group_first.size();
  std::vector<std::size_t> order(g);
  for (std::size_t i = 0; i < g; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<std::size_t> class_g(class_count, 0);
  for (int c : group_class) ++class_g[c];
  std::vector<std::size_t> test_quota(class_count, 0);
  for (int c = 0; c < class_count; ++c) {
    if (!stratified) continue;
    if (class_g[c] < 2)
      throw ConfigError("grouped stratified split needs >= 2 groups in class " +
                        std::to_string(c));
    std::size_t train_c = static_cast<std::size_t>(
        std::llround(static_cast<double>(class_g[c]) * train_fraction));
    test_quota[c] = class_g[c] - train_c;
  }
  if (!stratified) {
    std::size_t train_total = static_cast<std::size_t>(
        std::llround(static_cast<double>(g) * train_fraction));
    std::size_t test_total = g - train_total;
    // Reuse the quota walk with a single pooled quota.
    std::vector<char> to_test(g, 0);
    for (std::size_t i = 0; i < g; ++i) to_test[order[i]] = i < test_total;
    for (std::size_t i = 0; i < n; ++i)
      (to_test[group_of[i]] ? out.test : out.train).push_back(i);
    return out;
  }
  std::vector<char> to_test(g, 0);
  std::vector<std::size_t> taken(class_count, 0);
  for (std::size_t gi : order) {
    int c = group_class[gi];
    if (taken[c] < test_quota[c]) {
      ++taken[c];
      to_test[gi] = 1;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    (to_test[group_of[i]] ? out.test : out.train).push_back(i);
  return out;
}

namespace {

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.schema_version = dataset.schema_version;
  out.manifest = dataset.manifest;
  out.records.reserve(idx.size());
  for (std::size_t i : idx) out.records.push_back(dataset.records[i]);
  return out;
}

}  // namespace

SplitDataset split_standardize(const Dataset& dataset, double train_fraction,
                               bool stratified, std::uint64_t seed,
                               bool trace_grouped) {
  std::vector<int> labels;
  labels.reserve(dataset.records.size());
  for (const auto& r : dataset.records) labels.push_back(r.label);

  SplitIndices idx;
  if (trace_grouped) {
    auto groups = trace_group_ids(dataset);
    idx = split_indices(labels, train_fraction, stratified, seed, &groups);
  } else {
    idx = split_indices(labels, train_fraction, stratified, seed);
  }

  SplitDataset out;
  out.train = subset(dataset, idx.train);
  out.test = subset(dataset, idx.test);
  out.scaler = fit_scaler(to_matrix(out.train));
  auto standardize = [&](Dataset& ds) {
    for (auto& r : ds.records) {
      r.height_mm = (r.height_mm - out.scaler.mean[0]) / out.scaler.stddev[0];
      r.frequency_hz =
          (r.frequency_hz - out.scaler.mean[1]) / out.scaler.stddev[1];
      r.s21_db = (r.s21_db - out.scaler.mean[2]) / out.scaler.stddev[2];
    }
  };
  standardize(out.train);
  standardize(out.test);
  return out;
}

static const char* const kDatasetHeader = "height_mm,frequency_hz,s21_db,label";

std::string dataset_csv_bytes(const Dataset& dataset) {
  std::string out;
  out.reserve(dataset.records.size() * 44 + 40);
  out += kDatasetHeader;
  out += '\n';
  for (const auto& r : dataset.records) {
    out += format_double(r.height_mm);
    out += ',';
    out += format_double(r.frequency_hz);
    out += ',';
    out += format_double(r.s21_db);
    out += ',';
    out += std::to_string(r.label);
    out += '\n';
  }
  return out;
}

void export_csv(const Dataset& dataset, const std::string& path) {
  write_text_file(path, dataset_csv_bytes(dataset));
}

Dataset import_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  const std::vector<std::string> expected = {"height_mm", "frequency_hz",
                                             "s21_db", "label"};
  for (const auto& name : table.header) {
    if (std::find(expected.begin(), expected.end(), name) == expected.end())
      throw SchemaError(path + ": unknown column '" + name + "'");
  }
  if (table.header != expected)
    throw SchemaError(path + ": header must be exactly '" +
                      std::string(kDatasetHeader) + "'");

  Dataset ds;
  ds.schema_version = dataset_schema_version;
  ds.records.reserve(table.rows.size());
  const double missing = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::string ctx = path + ": line " + std::to_string(i + 2);
    SweepRecord r;
    r.height_mm =
        row[0].empty() ? missing : parse_double(row[0], ctx + " height_mm");
    r.frequency_hz =
        row[1].empty() ? missing : parse_double(row[1], ctx + " frequency_hz");
    r.s21_db = row[2].empty() ? missing : parse_double(row[2], ctx + " s21_db");
    if (row[3].empty()) {
      r.label = -1;
    } else {
      long long label = parse_int(row[3], ctx + " label");
      if (label < 0 || label > std::numeric_limits<int>::max())
        throw SchemaError(ctx + ": label out of range");
      r.label = static_cast<int>(label);
    }
    ds.records.push_back(r);
  }
  return ds;
}

std::uint64_t dataset_hash(const Dataset& dataset) {
  return fnv1a64(dataset_csv_bytes(dataset));
}

FeatureMatrix to_matrix(const Dataset& dataset) {
  FeatureMatrix m;
  m.rows = dataset.records.size();
  m.cols = 3;
  m.feature_names = {"height_mm", "frequency_hz", "s21_db"};
  m.values.resize(m.rows * 3);
  m.labels.resize(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const auto& r = dataset.records[i];
    m.values[i * 3 + 0] = r.height_mm;
    m.values[i * 3 + 1] = r.frequency_hz;
    m.values[i * 3 + 2] = r.s21_db;
    m.labels[i] = r.label;
  }
  return m;
}

std::vector<std::size_t> trace_group_ids(const Dataset& dataset) {
  std::vector<std::size_t> ids(dataset.records.size());
  std::size_t current = 0;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    if (i > 0) {
      const auto& a = dataset.records[i - 1];
      const auto& b = dataset.records[i];
      if (a.label != b.label || a.height_mm != b.height_mm) ++current;
    }
    ids[i] = current;
  }
  return ids;
}

namespace {

using detail::check_keys;
using detail::get_num;
using detail::get_str;
using detail::get_u64;
using detail::json;
using detail::material_to_json;
using detail::resonator_to_json;

MaterialModel material_from_json(const json& j, const std::string& ctx) {
  return detail::material_from_json<SchemaError>(j, ctx);
}

ResonatorModel resonator_from_json(const json& j, const std::string& ctx) {
  return detail::resonator_from_json<SchemaError>(j, ctx);
}

std::vector<double> grid_from_json(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw SchemaError(ctx + ": expected an array");
  std::vector<double> grid;
  grid.reserve(j.size());
  for (const auto& v : j) grid.push_back(get_num<SchemaError>(v, ctx));
  return grid;
}

}  // namespace

std::string manifest_to_json(const GenerationManifest& manifest) {
  json j;
  j["schema_version"] = manifest.schema_version;
  j["seed"] = manifest.seed;
  j["noise_sigma_db"] = manifest.noise_sigma_db;
  json mats = json::array();
  for (const auto& m : manifest.materials) mats.push_back(material_to_json(m));
  j["materials"] = std::move(mats);
  j["resonator"] = resonator_to_json(manifest.resonator);
  j["z_grid_mm"] = manifest.z_grid_mm;
  j["f_grid_hz"] = manifest.f_grid_hz;
  return j.dump(2);
}

GenerationManifest manifest_from_json(const std::string& text) {
  json j = detail::parse_json<SchemaError>(text, "generation manifest");
  check_keys<SchemaError>(j, "generation manifest",
                          {"schema_version", "seed", "noise_sigma_db",
                           "materials", "resonator", "z_grid_mm",
                           "f_grid_hz"});
  GenerationManifest m;
  if (!j.contains("schema_version") || !j.contains("seed") ||
      !j.contains("materials") || !j.contains("resonator") ||
      !j.contains("z_grid_mm") || !j.contains("f_grid_hz"))
    throw SchemaError("generation manifest is missing required fields");
  m.schema_version =
      get_str<SchemaError>(j.at("schema_version"), "schema_version");
  if (m.schema_version != dataset_schema_version)
    throw SchemaError("generation manifest schema '" + m.schema_version +
                      "' is not supported");
  m.seed = get_u64<SchemaError>(j.at("seed"), "seed");
  if (j.contains("noise_sigma_db"))
    m.noise_sigma_db =
        get_num<SchemaError>(j.at("noise_sigma_db"), "noise_sigma_db");
  if (!j.at("materials").is_array())
    throw SchemaError("materials: expected an array");
  for (std::size_t i = 0; i < j.at("materials").size(); ++i) {
    m.materials.push_back(material_from_json(
        j.at("materials")[i], "materials[" + std::to_string(i) + "]"));
  }
  m.resonator = resonator_from_json(j.at("resonator"), "resonator");
  m.z_grid_mm = grid_from_json(j.at("z_grid_mm"), "z_grid_mm");
  m.f_grid_hz = grid_from_json(j.at("f_grid_hz"), "f_grid_hz");
  return m;
}

}  // namespace oilsense
