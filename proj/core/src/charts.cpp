#include "oilsense/charts.hpp"

#include <algorithm>
#include <cstdio>

namespace oilsense {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void append_text(std::string& svg, double x, double y, int size,
                 const char* anchor, const std::string& text,
                 const char* extra = "") {
  svg += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
         std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" +
         anchor + "\"" + extra + ">" + xml_escape(text) + "</text>\n";
}

}  // namespace

std::string render_roc_svg(const std::vector<EvalReport>& reports) {
  const std::size_t k = reports.empty() ? 0 : reports[0].class_names.size();
  const int cols = k >= 2 ? 2 : 1;
  const int rows = k == 0 ? 1 : static_cast<int>((k + cols - 1) / cols);
  const double plot = 300.0, ml = 58.0, mt = 34.0, mr = 22.0, mb = 46.0;
  const double cell_w = ml + plot + mr, cell_h = mt + plot + mb;
  const double width = cols * cell_w, height = rows * cell_h;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) +
         " " + num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t c = 0; c < k; ++c) {
    const double px = (c % cols) * cell_w + ml;
    const double py = (c / cols) * cell_h + mt;
    svg += "<rect x=\"" + num(px) + "\" y=\"" + num(py) + "\" width=\"" +
           num(plot) + "\" height=\"" + num(plot) +
           "\" fill=\"none\" stroke=\"#333\"/>\n";
    append_text(svg, px + plot / 2, py - 10, 13, "middle",
                reports[0].class_names[c] + " (one-vs-rest)");
    for (int t = 0; t <= 4; ++t) {
      double frac = t / 4.0;
      double x = px + frac * plot;
      double y = py + plot - frac * plot;
      svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(py + plot) +
             "\" x2=\"" + num(x) + "\" y2=\"" + num(py + plot + 4) +
             "\" stroke=\"#333\"/>\n";
      svg += "<line x1=\"" + num(px - 4) + "\" y1=\"" + num(y) + "\" x2=\"" +
             num(px) + "\" y2=\"" + num(y) + "\" stroke=\"#333\"/>\n";
      append_text(svg, x, py + plot + 16, 10, "middle", num(frac));
      append_text(svg, px - 8, y + 3, 10, "end", num(frac));
    }
    append_text(svg, px + plot / 2, py + plot + 32, 11, "middle",
                "false positive rate");
    append_text(svg, px - 40, py + plot / 2, 11, "middle",
                "true positive rate",
                (" transform=\"rotate(-90 " + num(px - 40) + " " +
                 num(py + plot / 2) + ")\"").c_str());
    svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(py + plot) + "\" x2=\"" +
           num(px + plot) + "\" y2=\"" + num(py) +
           "\" stroke=\"#999\" stroke-dasharray=\"5,4\"/>\n";

    for (std::size_t m = 0; m < reports.size(); ++m) {
      const auto& curve = reports[m].roc_curves[c];
      const std::size_t max_draw = 400;
      std::string pts;
      const std::size_t n = curve.size();
      const std::size_t step = n > max_draw ? (n - 1) / (max_draw - 1) : 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (step > 1 && i % step != 0 && i + 1 != n) continue;
        pts += num(px + curve[i].fpr * plot) + "," +
               num(py + plot - curve[i].tpr * plot) + " ";
      }
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
             kPalette[m % kPaletteSize] + "\" stroke-width=\"1.5\"/>\n";
    }

    double lx = px + plot - 150, ly = py + plot - 14.0 * reports.size() - 8;
    for (std::size_t m = 0; m < reports.size(); ++m) {
      double y = ly + 14.0 * m;
      svg += "<rect x=\"" + num(lx) + "\" y=\"" + num(y) +
             "\" width=\"10\" height=\"10\" fill=\"" +
             kPalette[m % kPaletteSize] + "\"/>\n";
      append_text(svg, lx + 14, y + 9, 10, "start",
                  reports[m].model_name + " AUC=" + fmt4(reports[m].auc[c]));
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string render_metrics_svg(const ComparisonTable& table) {
  const char* metric_names[] = {"accuracy", "macro precision", "macro recall",
                                "macro F1"};
  const int n_metrics = 4;
  const std::size_t n_models = table.rows.size();
  const double bar_w = 26.0, bar_gap = 6.0, group_gap = 40.0;
  const double group_w = n_models * (bar_w + bar_gap) - bar_gap;
  const double plot_h = 280.0, ml = 56.0, mt = 30.0, mb = 60.0, mr = 30.0;
  const double plot_w =
      n_metrics * group_w + (n_metrics - 1) * group_gap + 40.0;
  const double width = ml + plot_w + mr;
  const double height = mt + plot_h + mb + 18.0 * ((n_models + 1) / 2);

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) +
         " " + num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    double frac = t / 4.0;
    double y = mt + plot_h - frac * plot_h;
    svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(ml + plot_w) + "\" y2=\"" + num(y) +
           "\" stroke=\"#ddd\"/>\n";
    append_text(svg, ml - 8, y + 3, 10, "end", num(frac));
  }
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" +
         num(ml) + "\" y2=\"" + num(mt + plot_h) + "\" stroke=\"#333\"/>\n";
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + plot_h) +
         "\" x2=\"" + num(ml + plot_w) + "\" y2=\"" + num(mt + plot_h) +
         "\" stroke=\"#333\"/>\n";

  for (int g = 0; g < n_metrics; ++g) {
    double gx = ml + 20.0 + g * (group_w + group_gap);
    append_text(svg, gx + group_w / 2, mt + plot_h + 18, 11, "middle",
                metric_names[g]);
    for (std::size_t m = 0; m < n_models; ++m) {
      const ComparisonRow& row = table.rows[m];
      double v = 0.0;
      switch (g) {
        case 0: v = row.accuracy; break;
        case 1: v = row.macro_precision; break;
        case 2: v = row.macro_recall; break;
        case 3: v = row.macro_f1; break;
      }
      v = std::max(0.0, std::min(1.0, v));
      double x = gx + m * (bar_w + bar_gap);
      double h = v * plot_h;
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(mt + plot_h - h) +
             "\" width=\"" + num(bar_w) + "\" height=\"" + num(h) +
             "\" fill=\"" + kPalette[m % kPaletteSize] + "\"/>\n";
      append_text(svg, x + bar_w / 2, mt + plot_h - h - 4, 9, "middle",
                  fmt4(v));
    }
  }

  double ly = mt + plot_h + 40;
  for (std::size_t m = 0; m < n_models; ++m) {
    double lx = ml + (m % 2) * 220.0;
    double y = ly + (m / 2) * 18.0;
    svg += "<rect x=\"" + num(lx) + "\" y=\"" + num(y) +
           "\" width=\"12\" height=\"12\" fill=\"" +
           kPalette[m % kPaletteSize] + "\"/>\n";
    append_text(svg, lx + 17, y + 10, 11, "start", table.rows[m].name);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace oilsense
