// Copyright 2026 the auction-arena authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arena/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

arena::harness::Scenario load_scenario(const std::string& ref) {
  if (auto s = arena::harness::preset(ref); s.has_value()) return *s;
  if (fs::exists(ref)) {
    return arena::harness::scenario_from_json(read_file(ref));
  }
  std::ostringstream msg;
  msg << "unknown scenario '" << ref << "'; presets:";
  for (const std::string& name : arena::harness::preset_names()) {
    msg << ' ' << name;
  }
  throw std::runtime_error(msg.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated-auction arena: bidder training runs, metric "
               "aggregation, chart emission, and game-theory verification"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a scenario and stream metrics");
  std::string scenario_ref;
  std::uint64_t seed = 1;
  int episodes = -1;
  std::string out_dir = "runs/out";
  run->add_option("--scenario", scenario_ref, "Preset name or scenario file")
      ->required();
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--episodes", episodes, "Override episode count");
  run->add_option("--out", out_dir, "Output directory");

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Summarize one or more runs");
  std::vector<std::string> in_dirs;
  std::string agg_out = "summary.json";
  agg->add_option("--in", in_dirs, "Run directories")->required();
  agg->add_option("--out", agg_out, "Summary file");

  // plot
  auto* plot = app.add_subcommand("plot", "Emit SVG charts from a summary");
  std::string plot_in;
  std::string plot_out = "plots";
  plot->add_option("--in", plot_in, "Summary file")->required();
  plot->add_option("--out", plot_out, "Chart directory");

  // verify
  auto* verify = app.add_subcommand("verify", "Run the game-theory checks");
  std::string instances_dir = "instances";
  int trials = 200;
  std::uint64_t verify_seed = 1;
  verify->add_option("--instances", instances_dir, "Instance file directory");
  verify->add_option("--trials", trials, "Deviations per instance");
  verify->add_option("--seed", verify_seed, "Verification seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      arena::harness::Scenario scenario = load_scenario(scenario_ref);
      scenario.seed = seed;
      if (episodes > 0) scenario.episodes = episodes;
      const auto result = arena::harness::run_scenario(scenario, out_dir);
      if (result.aborted) {
        std::cerr << "run aborted: " << result.diagnostic << '\n';
        return 1;
      }
      std::cout << "completed " << result.episodes_completed
                << " episodes -> " << result.dir.string() << '\n';
      return 0;
    }
    if (agg->parsed()) {
      std::vector<fs::path> dirs(in_dirs.begin(), in_dirs.end());
      const auto summary = arena::harness::aggregate(dirs);
      std::ofstream out(agg_out, std::ios::trunc);
      out << summary.to_json() << '\n';
      std::cout << "wrote " << agg_out << " (" << summary.episodes
                << " episodes)" << '\n';
      return 0;
    }
    if (plot->parsed()) {
      const auto summary =
          arena::harness::Summary::from_json(read_file(plot_in));
      const auto files = arena::harness::emit_plots(summary, plot_out);
      for (const fs::path& f : files) std::cout << "wrote " << f.string() << '\n';
      return 0;
    }
    if (verify->parsed()) {
      const auto report =
          arena::harness::verify_appendix(instances_dir, trials, verify_seed);
      std::cout << report.text();
      return report.all_passed ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
