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

#ifndef ARENA_HARNESS_HPP_
#define ARENA_HARNESS_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arena/agent_fsp.hpp"
#include "arena/auction_engine.hpp"
#include "arena/game_theory.hpp"
#include "arena/reward_signals.hpp"

// Experiment orchestration: named scenario presets, deterministic seeding,
// JSON-lines metrics, aggregation, SVG chart emission, and the appendix
// verification entry point.

namespace arena::harness {

struct Scenario {
  std::string name;
  engine::GameKind game_kind = engine::GameKind::kFpReverse;
  std::vector<fsp::AgentKind> roster;  // one entry per bidder
  rewards::ExtrinsicKind signal = rewards::ExtrinsicKind::kPayoff;
  int episodes = 300;
  std::uint64_t seed = 1;
  double valuation_min = 1.0;
  double valuation_max = 5.0;
  engine::AuctionConfig auction;  // num_bidders is forced to roster size
  fsp::FspConfig agent;

  void validate() const;
};

std::vector<std::string> preset_names();
std::optional<Scenario> preset(const std::string& name);
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);

// One metrics record per (episode, step, bidder). Curiosity fields are
// present only for steps where a long-term agent actually learned.
struct MetricsRow {
  std::string run_id;
  int episode = 0;
  long step = 0;
  int bidder_id = 0;
  std::string agent_kind;
  double payoff = 0.0;
  double reserve = 0.0;
  std::optional<double> intrinsic_reward;
  std::optional<double> forward_loss;
  std::optional<double> inverse_loss;
  std::optional<double> epsilon_last;
  double price = 0.0;
  std::string participation;
};

struct EpisodeStats {
  std::vector<double> cumulated_payoff;  // per bidder
  double jain = 1.0;                     // over the episode's payments
  std::vector<double> extrinsic;         // signal each bidder received
};

struct RunResult {
  std::filesystem::path dir;
  int episodes_completed = 0;
  bool aborted = false;
  std::string diagnostic;
  std::vector<EpisodeStats> stats;
  // Largest accounting mismatch found when replaying the episode logs.
  double max_conservation_error = 0.0;
};

// Runs the scenario end to end, streaming metrics to <out>/metrics.jsonl and
// writing <out>/manifest.json for bit-exact replay. The ARENA_OUT_ROOT
// environment variable, when set, roots relative output paths.
RunResult run_scenario(const Scenario& scenario,
                       const std::filesystem::path& out_dir);

// Same simulation without touching the filesystem; returns per-episode stats.
RunResult run_collect(const Scenario& scenario);

struct Summary {
  int episodes = 0;
  // Mean cumulated payoff per episode, by agent kind.
  std::map<std::string, std::vector<double>> payoff_by_kind;
  std::vector<double> jain_by_episode;
  // Smoothed per-episode means over acted steps, by agent kind.
  std::map<std::string, std::vector<double>> intrinsic_by_kind;
  std::map<std::string, std::vector<double>> forward_loss_by_kind;

  std::string to_json() const;
  static Summary from_json(const std::string& text);
};

// Reads metrics.jsonl from each run directory. Malformed rows are reported
// with their line numbers via std::runtime_error.
Summary aggregate(const std::vector<std::filesystem::path>& run_dirs);

// Emits payoff-performance, fairness-performance, intrinsic-reward and
// forward-loss line charts as SVG files. Re-emission is byte-identical.
std::vector<std::filesystem::path> emit_plots(
    const Summary& summary, const std::filesystem::path& out_dir);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed = false;
  std::string text() const;  // one line per check
};

// Runs the appendix verification suite over the instance files found in
// `instances_dir` (potential_game.json, spa.json, pareto.json) plus a random
// instance sweep. Deterministic given the seed.
VerifyReport verify_appendix(const std::filesystem::path& instances_dir,
                             int trials, std::uint64_t seed);

}  // namespace arena::harness

#endif  // ARENA_HARNESS_HPP_
