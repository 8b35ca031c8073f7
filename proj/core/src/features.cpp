#include "oilsense/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oilsense/csvio.hpp"
#include "oilsense/parallel.hpp"
#include "oilsense/version.hpp"

namespace oilsense {

namespace {

struct DipModel {
  double f_res = 0.0;
  double q = 0.0;
  double depth = 0.0;
  bool valid = false;
};

double lorentz_db(const DipModel& d, double f) {
  if (!d.valid) return 0.0;
  double x = (f - d.f_res) / d.f_res;
  return -d.depth / (1.0 + 4.0 * d.q * d.q * x * x);
}

// Vertex of the parabola through (x0,y0), (x1,y1), (x2,y2); x1 is the middle
// sample.  Falls back to the middle sample when the points are collinear.
void parabola_vertex(double x0, double y0, double x1, double y1, double x2,
                     double y2, double* xv, double* yv) {
  double u0 = x0 - x1;
  double u2 = x2 - x1;
  double p = y0 - y1;
  double r = y2 - y1;
  double denom = u0 * u2 * (u0 - u2);
  double a = (p * u2 - r * u0) / denom;
  double b = (p - a * u0 * u0) / u0;
  if (!(a > 0.0)) {  // not a proper minimum; keep the sampled point
    *xv = x1;
    *yv = y1;
    return;
  }
  *xv = x1 - b / (2.0 * a);
  *yv = y1 - b * b / (4.0 * a);
}

double median_of(std::vector<double> v) {
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

// Local minima below the depth threshold, merged into one dip per valley: two
// candidates stay distinct only when the trace rises at least prominence_db
// above the shallower of them in between.
std::vector<std::size_t> qualifying_dips(const std::vector<double>& f,
                                         const std::vector<double>& s,
                                         double prominence_db) {
  const std::size_t n = s.size();
  double baseline = *std::max_element(s.begin(), s.end());
  std::vector<std::size_t> minima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (s[i] <= s[i - 1] && s[i] < s[i + 1] &&
        s[i] < baseline - prominence_db) {
      minima.push_back(i);
    }
  }
  (void)f;
  if (minima.size() < 2) return minima;
  std::vector<std::size_t> merged;
  merged.push_back(minima[0]);
  for (std::size_t k = 1; k < minima.size(); ++k) {
    std::size_t prev = merged.back();
    std::size_t cur = minima[k];
    double barrier = s[prev];
    for (std::size_t i = prev; i <= cur; ++i) barrier = std::max(barrier, s[i]);
    double shallower = std::max(s[prev], s[cur]);
    if (barrier - shallower >= prominence_db) {
      merged.push_back(cur);
    } else if (s[cur] < s[prev]) {
      merged.back() = cur;  // same valley, keep the deeper sample
    }
  }
  return merged;
}

// Fit one dip on the (other-mode-subtracted) trace t: window argmin around
// the previous center, parabolic minimum, depth against the baseline c, and
// the depth-corrected q from the width 3 dB above the minimum.
DipModel refine_dip(const std::vector<double>& f, const std::vector<double>& t,
                    double f_center_hint, double window_rel, double c) {
  const std::size_t n = f.size();
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(f[i] - f_center_hint) > window_rel * f_center_hint) continue;
    if (best == n || t[i] < t[best]) best = i;
  }
  if (best == n) throw NumericError("dip tracking window left the trace");
  if (best == 0 || best + 1 == n)
    throw BandEdgeError("resonance minimum sits at the trace edge");

  double f_res = 0.0, y_min = 0.0;
  parabola_vertex(f[best - 1], t[best - 1], f[best], t[best], f[best + 1],
                  t[best + 1], &f_res, &y_min);

  double depth = c - y_min;
  if (!(depth > 3.0))
    throw NumericError("dip too shallow for the 3 dB width convention");
  double level = y_min + 3.0;

  double f_left = 0.0, f_right = 0.0;
  bool found = false;
  for (std::size_t i = best; i-- > 0;) {
    if (t[i] >= level) {
      f_left = f[i] + (f[i + 1] - f[i]) * (level - t[i]) / (t[i + 1] - t[i]);
      found = true;
      break;
    }
  }
  if (!found)
    throw BandEdgeError("3 dB width crossing runs off the low band edge");
  found = false;
  for (std::size_t i = best + 1; i < n; ++i) {
    if (t[i] >= level) {
      f_right = f[i - 1] +
                (f[i] - f[i - 1]) * (level - t[i - 1]) / (t[i] - t[i - 1]);
      found = true;
      break;
    }
  }
  if (!found)
    throw BandEdgeError("3 dB width crossing runs off the high band edge");

  double width = f_right - f_left;
  DipModel dip;
  dip.f_res = f_res;
  dip.depth = depth;
  dip.q = (f_res / width) * std::sqrt(3.0 / (depth - 3.0));
  dip.valid = true;
  return dip;
}

}  // namespace

ResonanceFeatures extract(const Trace& trace,
                          const std::array<double, 2>& unloaded_f0s_hz,
                          const ExtractOptions& options) {
  const std::size_t n = trace.size();
  if (n < 5) throw ConfigError("trace too short for feature extraction");
  std::vector<double> f(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = trace[i].frequency_hz;
    s[i] = trace[i].s21_db;
    if (i > 0 && !(f[i] > f[i - 1]))
      throw ConfigError("trace frequencies must be strictly increasing");
  }
  if (!(unloaded_f0s_hz[0] < unloaded_f0s_hz[1]))
    throw ConfigError("unloaded f0s must be ordered");

  auto dips = qualifying_dips(f, s, options.prominence_db);
  if (dips.size() != 2)
    throw ExtractionError("expected exactly two qualifying dips, found " +
                              std::to_string(dips.size()),
                          static_cast<int>(dips.size()));

  // Dips come out in frequency order; so do the unloaded f0s.
  double c = *std::max_element(s.begin(), s.end());
  DipModel fit[2];
  for (int m = 0; m < 2; ++m)
    fit[m] = refine_dip(f, s, f[dips[m]], 0.02, c);

  std::vector<double> residual(n);
  for (int pass = 0; pass < options.refine_passes; ++pass) {
    for (std::size_t i = 0; i < n; ++i)
      residual[i] = s[i] - lorentz_db(fit[0], f[i]) - lorentz_db(fit[1], f[i]);
    c = median_of(residual);
    for (int m = 0; m < 2; ++m) {
      const DipModel& other = fit[1 - m];
      for (std::size_t i = 0; i < n; ++i)
        residual[i] = s[i] - lorentz_db(other, f[i]);
      fit[m] = refine_dip(f, residual, fit[m].f_res, 0.25, c);
    }
  }

  ResonanceFeatures out;
  for (int m = 0; m < 2; ++m) {
    out.modes[m].f_res_hz = fit[m].f_res;
    out.modes[m].normalized_shift =
        (fit[m].f_res - unloaded_f0s_hz[m]) / unloaded_f0s_hz[m];
    out.modes[m].depth_db = fit[m].depth;
    out.modes[m].q_factor = fit[m].q;
  }
  return out;
}

FeatureDataset extract_features(const Dataset& dataset,
                                const ResonatorModel& resonator,
                                const ExtractOptions& options,
                                unsigned threads) {
  auto groups = trace_group_ids(dataset);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    if (i == 0 || groups[i] != groups[i - 1]) starts.push_back(i);
  }
  std::array<double, 2> f0s{resonator.modes[0].f0_hz,
                            resonator.modes[1].f0_hz};

  FeatureDataset out;
  out.schema_version = feature_schema_version;
  out.records.resize(starts.size());
  parallel_for(0, starts.size(), threads, [&](std::size_t t) {
    std::size_t begin = starts[t];
    std::size_t end = (t + 1 < starts.size()) ? starts[t + 1]
                                              : dataset.records.size();
    Trace trace;
    trace.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i)
      trace.push_back(
          {dataset.records[i].frequency_hz, dataset.records[i].s21_db});
    FeatureRecord rec;
    rec.height_mm = dataset.records[begin].height_mm;
    rec.label = dataset.records[begin].label;
    rec.features = extract(trace, f0s, options);
    out.records[t] = rec;
  });
  return out;
}

static const char* const kFeatureHeader =
    "height_mm,f1_hz,shift1,depth1_db,q1,f2_hz,shift2,depth2_db,q2,label";

void export_features_csv(const FeatureDataset& dataset,
                         const std::string& path) {
  std::string out;
  out.reserve(dataset.records.size() * 120 + 80);
  out += kFeatureHeader;
  out += '\n';
  for (const auto& r : dataset.records) {
    out += format_double(r.height_mm);
    for (const auto& m : r.features.modes) {
      out += ',';
      out += format_double(m.f_res_hz);
      out += ',';
      out += format_double(m.normalized_shift);
      out += ',';
      out += format_double(m.depth_db);
      out += ',';
      out += format_double(m.q_factor);
    }
    out += ',';
    out += std::to_string(r.label);
    out += '\n';
  }
  write_text_file(path, out);
}

FeatureDataset import_features_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  const std::vector<std::string> expected = {
      "height_mm", "f1_hz", "shift1", "depth1_db", "q1",
      "f2_hz",     "shift2", "depth2_db", "q2", "label"};
  for (const auto& name : table.header) {
    if (std::find(expected.begin(), expected.end(), name) == expected.end())
      throw SchemaError(path + ": unknown column '" + name + "'");
  }
  if (table.header != expected)
    throw SchemaError(path + ": header must be exactly '" +
                      std::string(kFeatureHeader) + "'");
  FeatureDataset ds;
  ds.schema_version = feature_schema_version;
  ds.records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::string ctx = path + ": line " + std::to_string(i + 2);
    FeatureRecord r;
    r.height_mm = parse_double(row[0], ctx + " height_mm");
    for (int m = 0; m < 2; ++m) {
      r.features.modes[m].f_res_hz = parse_double(row[1 + m * 4], ctx);
      r.features.modes[m].normalized_shift = parse_double(row[2 + m * 4], ctx);
      r.features.modes[m].depth_db = parse_double(row[3 + m * 4], ctx);
      r.features.modes[m].q_factor = parse_double(row[4 + m * 4], ctx);
    }
    long long label = parse_int(row[9], ctx + " label");
    if (label < 0) throw SchemaError(ctx + ": label out of range");
    r.label = static_cast<int>(label);
    ds.records.push_back(r);
  }
  return ds;
}

namespace {

void standardize_feature_records(const Scaler& scaler, FeatureDataset& ds) {
  for (auto& r : ds.records) {
    double* v[8] = {&r.features.modes[0].f_res_hz,
                    &r.features.modes[0].normalized_shift,
                    &r.features.modes[0].depth_db,
                    &r.features.modes[0].q_factor,
                    &r.features.modes[1].f_res_hz,
                    &r.features.modes[1].normalized_shift,
                    &r.features.modes[1].depth_db,
                    &r.features.modes[1].q_factor};
    for (int c = 0; c < 8; ++c)
      *v[c] = (*v[c] - scaler.mean[c]) / scaler.stddev[c];
  }
}

}  // namespace

SplitFeatureDataset split_standardize(const FeatureDataset& dataset,
                                      double train_fraction, bool stratified,
                                      std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(dataset.records.size());
  for (const auto& r : dataset.records) labels.push_back(r.label);
  SplitIndices idx = split_indices(labels, train_fraction, stratified, seed);

  SplitFeatureDataset out;
  out.train.schema_version = dataset.schema_version;
  out.test.schema_version = dataset.schema_version;
  for (std::size_t i : idx.train)
    out.train.records.push_back(dataset.records[i]);
  for (std::size_t i : idx.test) out.test.records.push_back(dataset.records[i]);
  out.scaler = fit_scaler(to_matrix(out.train));
  standardize_feature_records(out.scaler, out.train);
  standardize_feature_records(out.scaler, out.test);
  return out;
}

FeatureMatrix to_matrix(const FeatureDataset& dataset) {
  FeatureMatrix m;
  m.rows = dataset.records.size();
  m.cols = 8;
  m.feature_names = {"f1_hz", "shift1", "depth1_db", "q1",
                     "f2_hz", "shift2", "depth2_db", "q2"};
  m.values.resize(m.rows * 8);
  m.labels.resize(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const auto& r = dataset.records[i];
    double* row = m.values.data() + i * 8;
    for (int mode = 0; mode < 2; ++mode) {
      row[mode * 4 + 0] = r.features.modes[mode].f_res_hz;
      row[mode * 4 + 1] = r.features.modes[mode].normalized_shift;
      row[mode * 4 + 2] = r.features.modes[mode].depth_db;
      row[mode * 4 + 3] = r.features.modes[mode].q_factor;
    }
    m.labels[i] = r.label;
  }
  return m;
}

}  // namespace oilsense
