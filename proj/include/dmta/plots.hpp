#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "dmta/harness.hpp"

namespace dmta {

enum class PlotMetric { kReward, kNovelty, kMeanOfTwo };

// Standalone SVG line chart of a per-round metric, one mean curve per
// strategy. Reward and novelty curves carry a shaded 95% band.
std::string render_svg(std::span<const SummaryRow> rows, PlotMetric metric);

// Writes reward.svg, novelty.svg and mean_reward_novelty.svg into out_dir.
// Output is byte-identical for identical inputs.
void emit_plots(std::span<const RunResult> results, const std::filesystem::path& out_dir);

}  // namespace dmta
