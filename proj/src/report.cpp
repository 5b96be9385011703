#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "spdnn/harness.hpp"

namespace spdnn {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

double nice_step(double range, int target_ticks) {
  const double raw = range / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  return step * mag;
}

const char* method_color(const std::string& method) {
  return method == "SPDNN" ? "#4878a8" : "#d9823b";
}

}  // namespace

std::string render_boxplot_svg(DgpKind dgp, const std::vector<SummaryRow>& rows,
                               const std::vector<ExperimentResult>& results) {
  std::vector<SummaryRow> mine;
  for (const auto& row : rows) {
    if (row.dgp == dgp) mine.push_back(row);
  }

  const double width = 720, height = 480;
  const double ml = 80, mr = 24, mt = 56, mb = 64;
  const bool regression = task_of(dgp) == TaskKind::regression;
  const std::string y_label =
      regression ? "empirical L2 error" : "empirical excess risk";

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"18\">SPDNN vs NPDNN, "
      << to_string(dgp) << "</text>\n";

  if (mine.empty()) {
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\" fill=\"#666\">no data</text>\n</svg>\n";
    return svg.str();
  }

  // Outlier values per group, from the same statistics code path as the
  // summary rows.
  std::map<std::pair<std::size_t, std::string>, std::vector<double>> fliers;
  {
    std::map<std::pair<std::size_t, std::string>, std::vector<double>> values;
    for (const auto& rec : results) {
      if (rec.dgp != dgp) continue;
      values[{rec.n, rec.method}].push_back(rec.error);
    }
    for (auto& [key, vals] : values) {
      fliers[key] = box_stats(vals).outliers;
    }
  }

  double lo = mine.front().whisker_lo, hi = mine.front().whisker_hi;
  for (const auto& row : mine) {
    lo = std::min(lo, row.whisker_lo);
    hi = std::max(hi, row.whisker_hi);
    const auto it = fliers.find({row.n, row.method});
    if (it != fliers.end()) {
      for (double v : it->second) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (hi <= lo) {
    const double pad = std::max(1e-12, std::abs(hi) * 0.1);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = (hi - lo) * 0.06;
    lo -= pad;
    hi += pad;
  }

  const auto y_of = [&](double v) {
    return mt + (height - mt - mb) * (hi - v) / (hi - lo);
  };

  // Axis with ticks.
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  const double step = nice_step(hi - lo, 5);
  for (double tick = std::ceil(lo / step) * step; tick <= hi + 1e-12 * step;
       tick += step) {
    const double y = y_of(tick);
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << px(y) << "\" x2=\"" << ml
        << "\" y2=\"" << px(y) << "\" stroke=\"black\"/>\n";
    char label[40];
    std::snprintf(label, sizeof label, "%g", tick);
    svg << "<text x=\"" << ml - 9 << "\" y=\"" << px(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\">" << label << "</text>\n";
  }
  svg << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << (mt + height - mb) / 2 << ")\">" << y_label << "</text>\n";

  // One cluster per sample size, SPDNN then NPDNN inside it.
  std::vector<std::size_t> sizes;
  for (const auto& row : mine) {
    if (std::find(sizes.begin(), sizes.end(), row.n) == sizes.end()) {
      sizes.push_back(row.n);
    }
  }
  std::sort(sizes.begin(), sizes.end());

  const double plot_w = width - ml - mr;
  const double cluster_w = plot_w / static_cast<double>(sizes.size());
  const double box_w = std::min(36.0, cluster_w / 3.0);

  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const std::size_t n = sizes[c];
    const double center = ml + cluster_w * (static_cast<double>(c) + 0.5);
    svg << "<text x=\"" << px(center) << "\" y=\"" << height - mb + 24
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">n=" << n << "</text>\n";
    int slot = 0;
    for (const char* method : {"SPDNN", "NPDNN"}) {
      const auto it =
          std::find_if(mine.begin(), mine.end(), [&](const SummaryRow& row) {
            return row.n == n && row.method == method;
          });
      if (it == mine.end()) continue;
      const double cx = center + (slot == 0 ? -0.75 : 0.75) * box_w;
      ++slot;
      const char* color = method_color(method);
      const double yq1 = y_of(it->q1), yq3 = y_of(it->q3);
      const double ymed = y_of(it->median);
      const double ylo = y_of(it->whisker_lo), yhi = y_of(it->whisker_hi);
      svg << "<!-- box dgp=" << to_string(dgp) << " n=" << n << " method="
          << method << " whisker_lo=" << fmt17(it->whisker_lo) << " q1="
          << fmt17(it->q1) << " median=" << fmt17(it->median) << " q3="
          << fmt17(it->q3) << " whisker_hi=" << fmt17(it->whisker_hi)
          << " -->\n";
      // Whisker stem and caps.
      svg << "<line x1=\"" << px(cx) << "\" y1=\"" << px(ylo) << "\" x2=\""
          << px(cx) << "\" y2=\"" << px(yq1) << "\" stroke=\"" << color
          << "\"/>\n";
      svg << "<line x1=\"" << px(cx) << "\" y1=\"" << px(yq3) << "\" x2=\""
          << px(cx) << "\" y2=\"" << px(yhi) << "\" stroke=\"" << color
          << "\"/>\n";
      for (double wy : {ylo, yhi}) {
        svg << "<line x1=\"" << px(cx - box_w / 4) << "\" y1=\"" << px(wy)
            << "\" x2=\"" << px(cx + box_w / 4) << "\" y2=\"" << px(wy)
            << "\" stroke=\"" << color << "\"/>\n";
      }
      // Box and median.
      svg << "<rect x=\"" << px(cx - box_w / 2) << "\" y=\"" << px(yq3)
          << "\" width=\"" << px(box_w) << "\" height=\""
          << px(std::max(0.5, yq1 - yq3)) << "\" fill=\"" << color
          << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>\n";
      svg << "<line x1=\"" << px(cx - box_w / 2) << "\" y1=\"" << px(ymed)
          << "\" x2=\"" << px(cx + box_w / 2) << "\" y2=\"" << px(ymed)
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      const auto fit = fliers.find({n, method});
      if (fit != fliers.end()) {
        for (double v : fit->second) {
          svg << "<circle cx=\"" << px(cx) << "\" cy=\"" << px(y_of(v))
              << "\" r=\"2.5\" fill=\"none\" stroke=\"" << color << "\"/>\n";
        }
      }
    }
  }

  // Legend.
  double lx = width - mr - 150;
  double ly = mt - 18;
  for (const char* method : {"SPDNN", "NPDNN"}) {
    svg << "<rect x=\"" << px(lx) << "\" y=\"" << px(ly - 10)
        << "\" width=\"12\" height=\"12\" fill=\"" << method_color(method)
        << "\" fill-opacity=\"0.5\" stroke=\"" << method_color(method)
        << "\"/>\n";
    svg << "<text x=\"" << px(lx + 17) << "\" y=\"" << px(ly + 1)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << method
        << "</text>\n";
    lx += 78;
  }
  svg << "</svg>\n";
  return svg.str();
}

void report(const std::vector<ExperimentResult>& results,
            const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("report: cannot create output directory " +
                             out_dir + ": " + ec.message());
  }

  const auto write = [&](const std::string& name, const std::string& body) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path);
    if (!out) {
      throw std::runtime_error("report: cannot write " + path.string());
    }
    out << body;
  };

  write("results.tsv", results_table(results));
  const auto rows = summarize(results);
  write("summary.tsv", summary_table(rows));

  std::set<DgpKind> kinds;
  for (const auto& rec : results) kinds.insert(rec.dgp);
  for (DgpKind kind : kinds) {
    write(std::string("boxplot_") + to_string(kind) + ".svg",
          render_boxplot_svg(kind, rows, results));
  }
}

}  // namespace spdnn
