#include "dmta/plots.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <vector>

#include "dmta/errors.hpp"

namespace dmta {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 64, kRight = 180, kTop = 36, kBottom = 52;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Point {
  double x, mean, lo, hi;
};

std::optional<Point> point_of(const SummaryRow& r, PlotMetric metric) {
  switch (metric) {
    case PlotMetric::kReward:
      return Point{double(r.round), r.reward_mean, r.reward_mean - r.reward_ci95, r.reward_mean + r.reward_ci95};
    case PlotMetric::kNovelty:
      if (!r.novelty_mean) return std::nullopt;
      return Point{double(r.round), *r.novelty_mean, *r.novelty_mean - r.novelty_ci95,
                   *r.novelty_mean + r.novelty_ci95};
    case PlotMetric::kMeanOfTwo:
      if (!r.mean_of_two) return std::nullopt;
      return Point{double(r.round), *r.mean_of_two, *r.mean_of_two, *r.mean_of_two};
  }
  return std::nullopt;
}

const char* title_of(PlotMetric metric) {
  switch (metric) {
    case PlotMetric::kReward: return "Normalized cumulative reward";
    case PlotMetric::kNovelty: return "Novelty of true actives";
    case PlotMetric::kMeanOfTwo: return "Mean of reward and novelty";
  }
  return "";
}

}  // namespace

std::string render_svg(std::span<const SummaryRow> rows, PlotMetric metric) {
  std::vector<std::string> strategies;
  for (const auto& r : rows)
    if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end())
      strategies.push_back(r.strategy);

  double max_x = 1, min_y = 0, max_y = 1;
  for (const auto& r : rows) {
    if (auto p = point_of(r, metric)) {
      max_x = std::max(max_x, p->x);
      min_y = std::min(min_y, p->lo);
      max_y = std::max(max_y, p->hi);
    }
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (max_x > 1 ? (x - 1) / (max_x - 1) : 0.5) * pw; };
  auto sy = [&](double y) { return kTop + (1 - (y - min_y) / (max_y - min_y)) * ph; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft) + "\" y=\"22\" font-size=\"15\">" + title_of(metric) + "</text>\n";
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = min_y + (max_y - min_y) * i / 4.0;
    svg += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kLeft + pw) + "\" y1=\"" + num(sy(y)) + "\" y2=\"" +
           num(sy(y)) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(y) + 4) + "\" text-anchor=\"end\">" + num(y) +
           "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft) + "\" y=\"" + num(kHeight - 30) + "\">1</text>\n";
  svg += "<text x=\"" + num(kLeft + pw) + "\" y=\"" + num(kHeight - 30) + "\" text-anchor=\"end\">" +
         std::to_string(static_cast<int>(max_x)) + "</text>\n";
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\">cycle</text>\n";

  for (std::size_t s = 0; s < strategies.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    std::vector<Point> pts;
    for (const auto& r : rows)
      if (r.strategy == strategies[s])
        if (auto p = point_of(r, metric)) pts.push_back(*p);
    if (!pts.empty()) {
      if (metric != PlotMetric::kMeanOfTwo) {
        std::string band;
        for (const auto& p : pts) band += num(sx(p.x)) + "," + num(sy(p.hi)) + " ";
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) band += num(sx(it->x)) + "," + num(sy(it->lo)) + " ";
        band.pop_back();
        svg += "<polygon points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
      }
      std::string line;
      for (const auto& p : pts) line += num(sx(p.x)) + "," + num(sy(p.mean)) + " ";
      line.pop_back();
      svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\"/>\n";
    }
    const double ly = kTop + 14 + 20.0 * static_cast<double>(s);
    svg += "<line x1=\"" + num(kWidth - kRight + 14) + "\" x2=\"" + num(kWidth - kRight + 38) + "\" y1=\"" +
           num(ly - 4) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kWidth - kRight + 44) + "\" y=\"" + num(ly) + "\">" + strategies[s] + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plots(std::span<const RunResult> results, const std::filesystem::path& out_dir) {
  const auto rows = summarize(results);
  std::filesystem::create_directories(out_dir);
  const std::pair<const char*, PlotMetric> files[] = {{"reward.svg", PlotMetric::kReward},
                                                       {"novelty.svg", PlotMetric::kNovelty},
                                                       {"mean_reward_novelty.svg", PlotMetric::kMeanOfTwo}};
  for (const auto& [name, metric] : files) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (out_dir / name).string());
    out << render_svg(rows, metric);
  }
}

}  // namespace dmta
