#include "oilsense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "oilsense/csvio.hpp"

namespace oilsense {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (std::size_t c : counts) t += c;
  return t;
}

std::size_t ConfusionMatrix::diagonal() const {
  std::size_t t = 0;
  for (int c = 0; c < class_count; ++c) t += at(c, c);
  return t;
}

std::vector<RocPoint> roc_curve(const std::vector<char>& positive,
                                const std::vector<double>& scores) {
  if (positive.size() != scores.size())
    throw ConfigError("roc_curve inputs differ in length");
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (char p : positive) pos += p ? 1 : 0;
  const std::size_t neg = n - pos;
  const double inf = std::numeric_limits<double>::infinity();

  if (n == 0 || pos == 0 || neg == 0) {
    // Degenerate: only one class present.  Report the chance diagonal.
    double last = n == 0 ? -inf : *std::min_element(scores.begin(),
                                                    scores.end());
    return {{0.0, 0.0, inf}, {1.0, 1.0, last}};
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0, inf});
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    double s = scores[order[i]];
    // Whole tie group enters at one threshold, giving a single step.
    while (i < n && scores[order[i]] == s) {
      if (positive[order[i]])
        ++tp;
      else
        ++fp;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  return curve;
}

double auc_trapezoid(const std::vector<RocPoint>& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * 0.5 *
            (curve[i].tpr + curve[i - 1].tpr);
  }
  return area;
}

EvalReport evaluate_scores(const std::vector<int>& truth,
                           const std::vector<double>& scores, int class_count,
                           const std::vector<std::string>& class_names,
                           const std::string& model_name) {
  const std::size_t n = truth.size();
  if (n == 0) throw ConfigError("cannot evaluate an empty test set");
  if (class_count < 2) throw ConfigError("evaluation needs at least 2 classes");
  if (scores.size() != n * static_cast<std::size_t>(class_count))
    throw ConfigError("score matrix does not match truth length");
  if (class_names.size() != static_cast<std::size_t>(class_count))
    throw ConfigError("class name list does not match the class count");
  for (int t : truth) {
    if (t < 0 || t >= class_count)
      throw ConfigError("truth label outside the class range");
  }

  EvalReport rep;
  rep.model_name = model_name;
  rep.class_names = class_names;
  rep.confusion.class_count = class_count;
  rep.confusion.counts.assign(
      static_cast<std::size_t>(class_count) * class_count, 0);

  std::vector<int> pred(n);
  for (std::size_t i = 0; i < n; ++i) {
    pred[i] = argmax_lowest(scores.data() + i * class_count, class_count);
    rep.confusion
        .counts[static_cast<std::size_t>(truth[i]) * class_count + pred[i]]++;
  }
  rep.accuracy = static_cast<double>(rep.confusion.diagonal()) /
                 static_cast<double>(rep.confusion.total());

  rep.per_class.resize(class_count);
  for (int c = 0; c < class_count; ++c) {
    std::size_t tp = rep.confusion.at(c, c);
    std::size_t predicted = 0, actual = 0;
    for (int r = 0; r < class_count; ++r) {
      predicted += rep.confusion.at(r, c);
      actual += rep.confusion.at(c, r);
    }
    ClassMetrics& m = rep.per_class[c];
    m.support = actual;
    if (predicted == 0) {
      m.precision = 0.0;
      m.precision_defined = false;
    } else {
      m.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    }
    if (actual == 0) {
      m.recall = 0.0;
      m.recall_defined = false;
    } else {
      m.recall = static_cast<double>(tp) / static_cast<double>(actual);
    }
    double pr = m.precision + m.recall;
    if (pr == 0.0) {
      m.f1 = 0.0;
      m.f1_defined = false;
    } else {
      m.f1 = 2.0 * m.precision * m.recall / pr;
    }
    rep.macro_precision += m.precision;
    rep.macro_recall += m.recall;
    rep.macro_f1 += m.f1;
  }
  rep.macro_precision /= class_count;
  rep.macro_recall /= class_count;
  rep.macro_f1 /= class_count;

  rep.roc_curves.resize(class_count);
  rep.auc.resize(class_count);
  std::vector<char> positive(n);
  std::vector<double> col(n);
  for (int c = 0; c < class_count; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      positive[i] = truth[i] == c ? 1 : 0;
      col[i] = scores[i * class_count + c];
    }
    rep.roc_curves[c] = roc_curve(positive, col);
    rep.auc[c] = auc_trapezoid(rep.roc_curves[c]);
    rep.macro_auc += rep.auc[c];
  }
  rep.macro_auc /= class_count;
  return rep;
}

EvalReport evaluate(const Model& model, const FeatureMatrix& test,
                    const std::vector<std::string>& class_names,
                    const std::string& model_name) {
  if (test.rows == 0) throw ConfigError("cannot evaluate an empty test set");
  std::vector<double> scores = model.score(test);
  return evaluate_scores(test.labels, scores, model.class_count(), class_names,
                         model_name);
}

ComparisonTable compare(const std::vector<EvalReport>& reports) {
  ComparisonTable table;
  for (const EvalReport& r : reports) {
    table.rows.push_back({r.model_name, r.accuracy, r.macro_precision,
                          r.macro_recall, r.macro_f1, r.macro_auc});
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ComparisonRow& a, const ComparisonRow& b) {
              if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
              return a.name < b.name;
            });
  return table;
}

namespace {

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  return s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  return std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string render_report_text(const EvalReport& rep) {
  const int k = rep.confusion.class_count;
  std::size_t name_w = 8;
  for (const auto& n : rep.class_names) name_w = std::max(name_w, n.size());
  name_w += 2;

  std::string out;
  out += "model: " + rep.model_name + "\n";
  out += "accuracy: " + fmt6(rep.accuracy) + " (" +
         std::to_string(rep.confusion.diagonal()) + "/" +
         std::to_string(rep.confusion.total()) + ")\n\n";

  out += pad("class", name_w) + lpad("support", 9) + lpad("precision", 11) +
         lpad("recall", 11) + lpad("f1", 11) + lpad("auc", 11) + "\n";
  bool any_undefined = false;
  for (int c = 0; c < k; ++c) {
    const ClassMetrics& m = rep.per_class[c];
    std::string p = fmt6(m.precision) + (m.precision_defined ? " " : "*");
    std::string r = fmt6(m.recall) + (m.recall_defined ? " " : "*");
    std::string f = fmt6(m.f1) + (m.f1_defined ? " " : "*");
    any_undefined |= !m.precision_defined || !m.recall_defined ||
                     !m.f1_defined;
    out += pad(rep.class_names[c], name_w) +
           lpad(std::to_string(m.support), 9) + lpad(p, 11) + lpad(r, 11) +
           lpad(f, 11) + lpad(fmt6(rep.auc[c]) + " ", 11) + "\n";
  }
  out += pad("macro", name_w) + lpad("", 9) +
         lpad(fmt6(rep.macro_precision) + " ", 11) +
         lpad(fmt6(rep.macro_recall) + " ", 11) +
         lpad(fmt6(rep.macro_f1) + " ", 11) +
         lpad(fmt6(rep.macro_auc) + " ", 11) + "\n";
  if (any_undefined)
    out += "(* metric undefined for this class; reported as 0)\n";

  out += "\nconfusion matrix (rows = true class, columns = predicted):\n";
  out += pad("", name_w);
  for (int c = 0; c < k; ++c) out += lpad(rep.class_names[c], name_w);
  out += "\n";
  for (int r = 0; r < k; ++r) {
    out += pad(rep.class_names[r], name_w);
    for (int c = 0; c < k; ++c)
      out += lpad(std::to_string(rep.confusion.at(r, c)), name_w);
    out += "\n";
  }
  return out;
}

std::string render_comparison_text(const ComparisonTable& table) {
  std::size_t name_w = 8;
  for (const auto& r : table.rows) name_w = std::max(name_w, r.name.size());
  name_w += 2;
  std::string out;
  out += pad("model", name_w) + lpad("accuracy", 10) +
         lpad("macro_p", 10) + lpad("macro_r", 10) + lpad("macro_f1", 10) +
         lpad("macro_auc", 11) + "\n";
  for (const auto& r : table.rows) {
    out += pad(r.name, name_w) + lpad(fmt6(r.accuracy), 10) +
           lpad(fmt6(r.macro_precision), 10) + lpad(fmt6(r.macro_recall), 10) +
           lpad(fmt6(r.macro_f1), 10) + lpad(fmt6(r.macro_auc), 11) + "\n";
  }
  return out;
}

std::string render_roc_csv(const std::vector<EvalReport>& reports,
                           std::size_t max_points) {
  std::string out = "model,class,fpr,tpr,threshold\n";
  if (max_points < 2) max_points = 2;
  for (const EvalReport& rep : reports) {
    for (std::size_t c = 0; c < rep.roc_curves.size(); ++c) {
      const auto& curve = rep.roc_curves[c];
      std::vector<std::size_t> pick;
      if (curve.size() <= max_points) {
        pick.resize(curve.size());
        for (std::size_t i = 0; i < curve.size(); ++i) pick[i] = i;
      } else {
        pick.reserve(max_points);
        for (std::size_t i = 0; i < max_points; ++i) {
          std::size_t idx = i * (curve.size() - 1) / (max_points - 1);
          if (pick.empty() || idx != pick.back()) pick.push_back(idx);
        }
      }
      for (std::size_t idx : pick) {
        const RocPoint& p = curve[idx];
        out += rep.model_name;
        out += ',';
        out += rep.class_names[c];
        out += ',';
        out += format_double(p.fpr);
        out += ',';
        out += format_double(p.tpr);
        out += ',';
        out += format_double(p.threshold);
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace oilsense
