#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmta/bandit.hpp"
#include "dmta/config.hpp"
#include "dmta/errors.hpp"
#include "dmta/fingerprint.hpp"
#include "dmta/generator.hpp"
#include "dmta/harness.hpp"
#include "dmta/plots.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Flags {
  std::string config;
  std::string out;
  std::string seeds;
  std::vector<std::string> strategies;
  std::optional<int> cycles;
  std::optional<int> k;
  bool paper_scale = false;
  bool emit_plots = false;
  bool dump_balls = false;
  std::vector<std::string> sets;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Config file (key = value lines, or a run manifest.json)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--seeds", f.seeds, "Comma-separated replicate seeds");
  cmd->add_option("--strategy", f.strategies, "Strategy to run (repeatable)");
  cmd->add_option("--cycles", f.cycles, "Number of DMTA cycles");
  cmd->add_option("--k", f.k, "Molecules selected per cycle");
  cmd->add_flag("--paper-scale", f.paper_scale, "200 cycles, K = 100, seeds 1..10");
  cmd->add_flag("--emit-plots", f.emit_plots, "Write SVG charts next to summary.csv");
  cmd->add_flag("--dump-balls", f.dump_balls, "Write the active balls of every round");
  cmd->add_option("--set", f.sets, "Extra override as key=value (repeatable)");
}

dmta::RunConfig resolve(const Flags& f) {
  dmta::ConfigOverrides ov;
  if (f.paper_scale) ov.emplace_back("paper_scale", "true");
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw dmta::ParseError("override '" + s + "' is not key=value");
    ov.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!f.out.empty()) ov.emplace_back("out_dir", f.out);
  if (!f.seeds.empty()) ov.emplace_back("seeds", f.seeds);
  if (!f.strategies.empty()) {
    std::string joined;
    for (const auto& s : f.strategies) joined += (joined.empty() ? "" : ",") + s;
    ov.emplace_back("strategies", joined);
  }
  if (f.cycles) ov.emplace_back("cycles", std::to_string(*f.cycles));
  if (f.k) ov.emplace_back("k", std::to_string(*f.k));
  if (f.emit_plots) ov.emplace_back("emit_plots", "true");
  if (f.dump_balls) ov.emplace_back("dump_balls", "true");
  return f.config.empty() ? dmta::parse_config_text("", ov) : dmta::parse_config(f.config, ov);
}

int cmd_run(const Flags& f) {
  const dmta::RunConfig cfg = resolve(f);
  const auto results = dmta::run_experiment(cfg);
  int failed = 0;
  for (const auto& r : results) {
    if (r.error) {
      ++failed;
      std::cerr << r.strategy << " seed " << r.seed << " failed: " << *r.error << '\n';
      continue;
    }
    const auto& last = r.cycles.back();
    std::printf("%-20s seed %-4llu reward %.4f  observed actives %lld\n", r.strategy.c_str(),
                static_cast<unsigned long long>(r.seed), last.normalized_cumulative_reward,
                static_cast<long long>(last.cumulative_reward));
  }
  std::printf("wrote %s\n", cfg.out_dir.c_str());
  return failed ? kRuntimeError : 0;
}

int cmd_plot(const std::string& dir) {
  const auto results = dmta::read_results(dir);
  if (results.empty()) throw dmta::Error("no cycles.csv under " + dir);
  dmta::emit_plots(results, dir);
  std::printf("wrote 3 charts to %s\n", dir.c_str());
  return 0;
}

template <class F>
void time_it(const char* name, int reps, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  double sink = 0;
  for (int i = 0; i < reps; ++i) sink += body();
  const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%-28s %10.3f us/op  (checksum %.6g)\n", name, us / reps, sink);
}

int cmd_bench(int arms, int balls) {
  dmta::Rng rng(7);
  std::vector<dmta::Fingerprint> fps;
  for (int i = 0; i < arms; ++i) fps.push_back(dmta::morgan_fingerprint(dmta::Generator::sample_prior(rng)));
  std::vector<dmta::Ball> active;
  for (int i = 0; i < balls; ++i) {
    dmta::Ball b;
    b.center = fps[static_cast<std::size_t>(i) % fps.size()];
    b.radius = 1.0 / static_cast<double>(1 << (i % 4));
    b.n = i * 3;
    b.rew = i;
    active.push_back(b);
  }
  std::size_t i = 0;
  time_it("jaccard_distance", 200000, [&] {
    ++i;
    return dmta::jaccard_distance(fps[i % fps.size()], fps[(i * 7 + 1) % fps.size()]);
  });
  time_it("ball_index", 2000, [&] { return dmta::ball_index(++i % active.size(), active, 128); });
  time_it("assign_domains", 20, [&] { return double(dmta::assign_domains(active, fps).size()); });
  std::vector<double> scores(fps.size());
  for (auto& s : scores) s = rng.uniform();
  time_it("select_super_arm (K=20)", 2000, [&] { return double(dmta::select_super_arm(scores, 20)[0]); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zooming bandit inside a simulated design-make-test-analyze loop"};
  app.require_subcommand(1);

  Flags run_flags, check_flags;
  auto* run = app.add_subcommand("run", "Run every (strategy, seed) pair and write results");
  add_run_flags(run, run_flags);

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "Render SVG charts from an existing output directory");
  plot->add_option("dir", plot_dir, "Output directory of a previous run")->required();

  auto* validate = app.add_subcommand("validate-config", "Resolve and print a configuration");
  add_run_flags(validate, check_flags);

  int bench_arms = 500, bench_balls = 64;
  auto* bench = app.add_subcommand("bench", "Micro-benchmarks of the distance and index kernels");
  bench->add_option("--arms", bench_arms, "Candidate fingerprints")->check(CLI::PositiveNumber);
  bench->add_option("--balls", bench_balls, "Active balls")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*plot) return cmd_plot(plot_dir);
    if (*validate) {
      for (const auto& [key, value] : dmta::config_echo(resolve(check_flags)))
        std::cout << key << " = " << value << '\n';
      return 0;
    }
    if (*bench) return cmd_bench(bench_arms, bench_balls);
  } catch (const dmta::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const dmta::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
