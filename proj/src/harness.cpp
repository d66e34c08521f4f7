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

#include "arena/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace arena::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

inline constexpr const char* kArenaVersion = "0.1.0";
inline constexpr int kMetricsFormat = 1;

void Scenario::validate() const {
  if (roster.empty()) throw std::invalid_argument("scenario: empty roster");
  if (episodes <= 0) throw std::invalid_argument("scenario: episodes <= 0");
  if (!(valuation_min > 0.0) || valuation_max < valuation_min) {
    throw std::invalid_argument("scenario: bad valuation range");
  }
  engine::AuctionConfig cfg = auction;
  cfg.num_bidders = static_cast<int>(roster.size());
  cfg.validate();
}

namespace {

const char* to_string(engine::GameKind kind) {
  return kind == engine::GameKind::kFpReverse ? "FP" : "SP";
}

const char* to_string(rewards::ExtrinsicKind kind) {
  return kind == rewards::ExtrinsicKind::kPayoff ? "PAYOFF" : "FAIRNESS";
}

std::vector<fsp::AgentKind> hetero_roster() {
  using fsp::AgentKind;
  return {AgentKind::kSht, AgentKind::kSht, AgentKind::kCur,
          AgentKind::kCur, AgentKind::kDra, AgentKind::kDra};
}

std::vector<fsp::AgentKind> homo_roster(fsp::AgentKind kind) {
  return std::vector<fsp::AgentKind>(6, kind);
}

Scenario base_scenario(const std::string& name, engine::GameKind game,
                       std::vector<fsp::AgentKind> roster,
                       rewards::ExtrinsicKind signal, int episodes) {
  Scenario s;
  s.name = name;
  s.game_kind = game;
  s.roster = std::move(roster);
  s.signal = signal;
  s.episodes = episodes;
  s.auction.game_kind = game;
  s.auction.num_bidders = static_cast<int>(s.roster.size());
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fp-hetero-payoff", "fp-dra-payoff",  "fp-dra-fairness",
          "fp-cur-payoff",    "fp-sht-payoff",  "sp-hetero-payoff",
          "sp-dra-payoff",    "sp-dra-fairness", "sp-cur-payoff",
          "sp-sht-payoff",    "fp-smoke"};
}

std::optional<Scenario> preset(const std::string& name) {
  using engine::GameKind;
  using fsp::AgentKind;
  using rewards::ExtrinsicKind;
  if (name == "fp-hetero-payoff") {
    return base_scenario(name, GameKind::kFpReverse, hetero_roster(),
                         ExtrinsicKind::kPayoff, 300);
  }
  if (name == "fp-dra-payoff") {
    return base_scenario(name, GameKind::kFpReverse,
                         homo_roster(AgentKind::kDra), ExtrinsicKind::kPayoff,
                         300);
  }
  if (name == "fp-dra-fairness") {
    return base_scenario(name, GameKind::kFpReverse,
                         homo_roster(AgentKind::kDra),
                         ExtrinsicKind::kFairness, 300);
  }
  if (name == "fp-cur-payoff") {
    return base_scenario(name, GameKind::kFpReverse,
                         homo_roster(AgentKind::kCur), ExtrinsicKind::kPayoff,
                         300);
  }
  if (name == "fp-sht-payoff") {
    return base_scenario(name, GameKind::kFpReverse,
                         homo_roster(AgentKind::kSht), ExtrinsicKind::kPayoff,
                         300);
  }
  if (name == "sp-hetero-payoff") {
    return base_scenario(name, GameKind::kSpForward, hetero_roster(),
                         ExtrinsicKind::kPayoff, 300);
  }
  if (name == "sp-dra-payoff") {
    return base_scenario(name, GameKind::kSpForward,
                         homo_roster(AgentKind::kDra), ExtrinsicKind::kPayoff,
                         300);
  }
  if (name == "sp-dra-fairness") {
    return base_scenario(name, GameKind::kSpForward,
                         homo_roster(AgentKind::kDra),
                         ExtrinsicKind::kFairness, 300);
  }
  if (name == "sp-cur-payoff") {
    return base_scenario(name, GameKind::kSpForward,
                         homo_roster(AgentKind::kCur), ExtrinsicKind::kPayoff,
                         300);
  }
  if (name == "sp-sht-payoff") {
    return base_scenario(name, GameKind::kSpForward,
                         homo_roster(AgentKind::kSht), ExtrinsicKind::kPayoff,
                         300);
  }
  if (name == "fp-smoke") {
    return base_scenario(name, GameKind::kFpReverse, hetero_roster(),
                         ExtrinsicKind::kPayoff, 10);
  }
  return std::nullopt;
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["game"] = to_string(s.game_kind);
  json roster = json::array();
  for (fsp::AgentKind k : s.roster) roster.push_back(fsp::to_string(k));
  j["roster"] = roster;
  j["signal"] = to_string(s.signal);
  j["episodes"] = s.episodes;
  j["seed"] = s.seed;
  j["valuation_min"] = s.valuation_min;
  j["valuation_max"] = s.valuation_max;
  ordered_json a;
  a["episode_length"] = s.auction.episode_length;
  a["joining_cost"] = s.auction.joining_cost;
  a["backoff_cost"] = s.auction.backoff_cost;
  a["carrying_cost"] = s.auction.carrying_cost;
  a["initial_reserve"] = s.auction.initial_reserve;
  a["bankruptcy_penalty"] = s.auction.bankruptcy_penalty;
  a["sp_duration"] = s.auction.sp_duration;
  a["fp_duration_base"] = s.auction.fp_duration_base;
  a["fp_duration_slope"] = s.auction.fp_duration_slope;
  a["backoff_threshold"] = s.auction.backoff_threshold;
  a["backoff_scale"] = s.auction.backoff_scale;
  a["bid_floor"] = s.auction.bid_floor;
  j["auction"] = a;
  ordered_json g;
  g["window"] = s.agent.window;
  g["sl_lr"] = s.agent.sl_lr;
  g["sl_batch"] = s.agent.sl_batch;
  g["convex_mixture"] = s.agent.convex_mixture;
  g["credit_epochs"] = s.agent.credit_epochs;
  g["gamma_w"] = s.agent.ac.gamma_w;
  g["gamma_theta"] = s.agent.ac.gamma_theta;
  g["lambda"] = s.agent.ac.lambda;
  g["xi"] = s.agent.curiosity.xi;
  g["feature_dim"] = s.agent.curiosity.feature_dim;
  g["credit_lr"] = s.agent.credit.lr;
  j["agent"] = g;
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  const json j = json::parse(text);
  Scenario s;
  s.name = j.value("name", std::string("custom"));
  const std::string game = j.value("game", std::string("FP"));
  if (game == "FP") {
    s.game_kind = engine::GameKind::kFpReverse;
  } else if (game == "SP") {
    s.game_kind = engine::GameKind::kSpForward;
  } else {
    throw std::invalid_argument("scenario: game must be FP or SP");
  }
  s.auction.game_kind = s.game_kind;
  if (j.contains("roster")) {
    s.roster.clear();
    for (const auto& entry : j.at("roster")) {
      const auto kind = fsp::agent_kind_from(entry.get<std::string>());
      if (!kind.has_value()) {
        throw std::invalid_argument("scenario: unknown agent kind " +
                                    entry.get<std::string>());
      }
      s.roster.push_back(*kind);
    }
  } else {
    s.roster = hetero_roster();
  }
  const std::string signal = j.value("signal", std::string("PAYOFF"));
  if (signal == "PAYOFF") {
    s.signal = rewards::ExtrinsicKind::kPayoff;
  } else if (signal == "FAIRNESS") {
    s.signal = rewards::ExtrinsicKind::kFairness;
  } else {
    throw std::invalid_argument("scenario: signal must be PAYOFF or FAIRNESS");
  }
  s.episodes = j.value("episodes", 300);
  s.seed = j.value("seed", 1ULL);
  s.valuation_min = j.value("valuation_min", 1.0);
  s.valuation_max = j.value("valuation_max", 5.0);
  if (j.contains("auction")) {
    const json& a = j.at("auction");
    engine::AuctionConfig& c = s.auction;
    c.episode_length = a.value("episode_length", c.episode_length);
    c.joining_cost = a.value("joining_cost", c.joining_cost);
    c.backoff_cost = a.value("backoff_cost", c.backoff_cost);
    c.carrying_cost = a.value("carrying_cost", c.carrying_cost);
    c.initial_reserve = a.value("initial_reserve", c.initial_reserve);
    c.bankruptcy_penalty = a.value("bankruptcy_penalty", c.bankruptcy_penalty);
    c.sp_duration = a.value("sp_duration", c.sp_duration);
    c.fp_duration_base = a.value("fp_duration_base", c.fp_duration_base);
    c.fp_duration_slope = a.value("fp_duration_slope", c.fp_duration_slope);
    c.backoff_threshold = a.value("backoff_threshold", c.backoff_threshold);
    c.backoff_scale = a.value("backoff_scale", c.backoff_scale);
    c.bid_floor = a.value("bid_floor", c.bid_floor);
  }
  if (j.contains("agent")) {
    const json& g = j.at("agent");
    fsp::FspConfig& a = s.agent;
    a.window = g.value("window", a.window);
    a.sl_lr = g.value("sl_lr", a.sl_lr);
    a.sl_batch = g.value("sl_batch", a.sl_batch);
    a.convex_mixture = g.value("convex_mixture", a.convex_mixture);
    a.credit_epochs = g.value("credit_epochs", a.credit_epochs);
    a.ac.gamma_w = g.value("gamma_w", a.ac.gamma_w);
    a.ac.gamma_theta = g.value("gamma_theta", a.ac.gamma_theta);
    a.ac.lambda = g.value("lambda", a.ac.lambda);
    a.curiosity.xi = g.value("xi", a.curiosity.xi);
    a.curiosity.feature_dim = g.value("feature_dim", a.curiosity.feature_dim);
    a.credit.lr = g.value("credit_lr", a.credit.lr);
  }
  s.validate();
  return s;
}

namespace {

std::string run_id_of(const Scenario& s) {
  return s.name + "-s" + std::to_string(s.seed);
}

json metrics_row_to_json(const MetricsRow& row) {
  ordered_json j;
  j["run_id"] = row.run_id;
  j["episode"] = row.episode;
  j["step"] = row.step;
  j["bidder_id"] = row.bidder_id;
  j["agent_kind"] = row.agent_kind;
  j["payoff"] = row.payoff;
  j["reserve"] = row.reserve;
  j["intrinsic_reward"] =
      row.intrinsic_reward.has_value() ? json(*row.intrinsic_reward) : json();
  j["forward_loss"] =
      row.forward_loss.has_value() ? json(*row.forward_loss) : json();
  j["inverse_loss"] =
      row.inverse_loss.has_value() ? json(*row.inverse_loss) : json();
  j["epsilon_last"] =
      row.epsilon_last.has_value() ? json(*row.epsilon_last) : json();
  j["price"] = row.price;
  j["participation"] = row.participation;
  return j;
}

using RowSink = std::function<void(const MetricsRow&)>;

RunResult run_impl(const Scenario& scenario, const RowSink& sink) {
  scenario.validate();
  RunResult result;

  engine::AuctionConfig cfg = scenario.auction;
  cfg.game_kind = scenario.game_kind;
  cfg.num_bidders = static_cast<int>(scenario.roster.size());

  const std::string run_id = run_id_of(scenario);
  rng::Stream engine_rng = rng::derive(scenario.seed, "engine");
  rng::Stream valuation_rng = rng::derive(scenario.seed, "valuations");

  std::vector<std::unique_ptr<fsp::FspAgent>> agents;
  std::vector<engine::Agent*> agent_ptrs;
  std::vector<engine::BidderAccount> accounts(cfg.num_bidders);
  for (int m = 0; m < cfg.num_bidders; ++m) {
    const std::uint64_t agent_seed =
        rng::derive_seed(scenario.seed, "agent/" + std::to_string(m));
    agents.push_back(std::make_unique<fsp::FspAgent>(
        scenario.roster[m], scenario.agent, cfg, agent_seed));
    agent_ptrs.push_back(agents.back().get());
    accounts[m].bidder_id = m;
    accounts[m].reserve = cfg.initial_reserve;
    accounts[m].valuation =
        valuation_rng.uniform(scenario.valuation_min, scenario.valuation_max);
  }

  for (int ep = 0; ep < scenario.episodes; ++ep) {
    engine::StepHook hook;
    if (sink) {
      hook = [&](long step, const engine::EpisodeLog& so_far) {
        const std::size_t base = so_far.rows.size() - cfg.num_bidders;
        for (int m = 0; m < cfg.num_bidders; ++m) {
          const engine::LogRow& log_row = so_far.rows[base + m];
          MetricsRow row;
          row.run_id = run_id;
          row.episode = ep;
          row.step = step;
          row.bidder_id = m;
          row.agent_kind = agents[m]->kind();
          row.payoff = log_row.payoff;
          row.reserve = log_row.reserve_after;
          row.price = log_row.price;
          row.participation = engine::to_string(log_row.participation);
          if (log_row.participation != engine::Participation::kOccupied &&
              agents[m]->agent_kind() != fsp::AgentKind::kSht) {
            const fsp::StepMetrics& sm = agents[m]->last_metrics();
            row.intrinsic_reward = sm.intrinsic_reward;
            row.forward_loss = sm.forward_loss;
            row.inverse_loss = sm.inverse_loss;
            row.epsilon_last = sm.epsilon_last;
          }
          sink(row);
        }
      };
    }

    engine::EpisodeLog log = engine::run_episode(
        agent_ptrs, accounts, cfg, scenario.signal, engine_rng, hook);
    if (log.aborted) {
      result.aborted = true;
      result.diagnostic = log.diagnostic;
      return result;
    }
    result.max_conservation_error = std::max(
        result.max_conservation_error, engine::max_conservation_error(log, cfg));

    EpisodeStats stats;
    stats.cumulated_payoff.assign(cfg.num_bidders, 0.0);
    std::vector<double> payments(cfg.num_bidders, 0.0);
    for (const engine::LogRow& row : log.rows) {
      stats.cumulated_payoff[row.bidder_id] += row.payoff;
      if (row.participation == engine::Participation::kWon) {
        payments[row.bidder_id] += row.price;
      }
    }
    stats.jain = rewards::jain_index(payments);
    stats.extrinsic = log.extrinsic;
    result.stats.push_back(std::move(stats));
    ++result.episodes_completed;
  }
  return result;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario,
                       const std::filesystem::path& out_dir) {
  fs::path dir = out_dir;
  if (dir.is_relative()) {
    if (const char* root = std::getenv("ARENA_OUT_ROOT")) {
      dir = fs::path(root) / dir;
    }
  }
  fs::create_directories(dir);

  std::ofstream metrics(dir / "metrics.jsonl", std::ios::trunc);
  if (!metrics) {
    throw std::runtime_error("cannot open metrics file in " + dir.string());
  }
  RunResult result = run_impl(scenario, [&](const MetricsRow& row) {
    metrics << metrics_row_to_json(row).dump() << '\n';
  });
  metrics.close();

  ordered_json manifest;
  manifest["run_id"] = run_id_of(scenario);
  manifest["scenario"] = json::parse(scenario_to_json(scenario));
  manifest["versions"] = {{"arena", kArenaVersion},
                          {"metrics_format", kMetricsFormat}};
  manifest["episodes_completed"] = result.episodes_completed;
  manifest["aborted"] = result.aborted;
  if (result.aborted) manifest["diagnostic"] = result.diagnostic;
  std::ofstream mf(dir / "manifest.json", std::ios::trunc);
  mf << manifest.dump(2) << '\n';

  result.dir = dir;
  return result;
}

RunResult run_collect(const Scenario& scenario) {
  return run_impl(scenario, RowSink{});
}

namespace {

std::vector<double> smooth(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const int lo = std::max<int>(0, static_cast<int>(i) - window / 2);
    const int hi =
        std::min<int>(static_cast<int>(xs.size()) - 1,
                      static_cast<int>(i) + window / 2);
    double acc = 0.0;
    for (int k = lo; k <= hi; ++k) acc += xs[k];
    out[i] = acc / (hi - lo + 1);
  }
  return out;
}

}  // namespace

Summary aggregate(const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.empty()) {
    throw std::invalid_argument("aggregate: no run directories given");
  }

  struct Cell {
    double payoff_sum = 0.0;
    double intrinsic_sum = 0.0;
    long intrinsic_n = 0;
    double fwd_sum = 0.0;
    long fwd_n = 0;
  };
  std::map<std::string, std::map<int, Cell>> cells;  // kind -> episode
  std::map<std::string, std::set<std::string>> bidders_of_kind;
  std::map<int, std::map<std::string, double>> payments;  // episode -> bidder
  int max_episode = -1;

  for (const fs::path& dir : run_dirs) {
    const fs::path file = dir / "metrics.jsonl";
    std::ifstream in(file);
    if (!in) {
      throw std::runtime_error("aggregate: missing " + file.string());
    }
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw std::runtime_error("aggregate: " + file.string() + " line " +
                                 std::to_string(line_no) + ": " + e.what());
      }
      try {
        const int episode = j.at("episode").get<int>();
        const std::string kind = j.at("agent_kind").get<std::string>();
        const double payoff = j.at("payoff").get<double>();
        const std::string bidder_key =
            j.at("run_id").get<std::string>() + "/" +
            std::to_string(j.at("bidder_id").get<int>());
        max_episode = std::max(max_episode, episode);
        Cell& cell = cells[kind][episode];
        cell.payoff_sum += payoff;
        if (!j.at("intrinsic_reward").is_null()) {
          cell.intrinsic_sum += j.at("intrinsic_reward").get<double>();
          ++cell.intrinsic_n;
        }
        if (!j.at("forward_loss").is_null()) {
          cell.fwd_sum += j.at("forward_loss").get<double>();
          ++cell.fwd_n;
        }
        bidders_of_kind[kind].insert(bidder_key);
        double& payment = payments[episode][bidder_key];
        if (j.at("participation").get<std::string>() == "WON") {
          payment += j.at("price").get<double>();
        }
      } catch (const json::exception& e) {
        throw std::runtime_error("aggregate: " + file.string() + " line " +
                                 std::to_string(line_no) +
                                 ": bad row: " + e.what());
      }
    }
  }
  if (max_episode < 0) {
    throw std::runtime_error("aggregate: no rows found");
  }

  Summary summary;
  summary.episodes = max_episode + 1;

  for (auto& [kind, by_episode] : cells) {
    const double n_bidders =
        static_cast<double>(bidders_of_kind[kind].size());
    std::vector<double> payoff_series(summary.episodes, 0.0);
    std::vector<double> intrinsic_series(summary.episodes, 0.0);
    std::vector<double> fwd_series(summary.episodes, 0.0);
    for (auto& [episode, cell] : by_episode) {
      payoff_series[episode] = cell.payoff_sum / n_bidders;
      intrinsic_series[episode] =
          cell.intrinsic_n > 0 ? cell.intrinsic_sum / cell.intrinsic_n : 0.0;
      fwd_series[episode] = cell.fwd_n > 0 ? cell.fwd_sum / cell.fwd_n : 0.0;
    }
    summary.payoff_by_kind[kind] = payoff_series;
    summary.intrinsic_by_kind[kind] = smooth(intrinsic_series, 9);
    summary.forward_loss_by_kind[kind] = smooth(fwd_series, 9);
  }

  summary.jain_by_episode.assign(summary.episodes, 1.0);
  for (int ep = 0; ep < summary.episodes; ++ep) {
    std::vector<double> totals;
    const auto it = payments.find(ep);
    if (it != payments.end()) {
      for (const auto& [key, total] : it->second) totals.push_back(total);
    }
    summary.jain_by_episode[ep] =
        totals.empty() ? 1.0 : rewards::jain_index(totals);
  }
  return summary;
}

std::string Summary::to_json() const {
  ordered_json j;
  j["episodes"] = episodes;
  j["payoff_by_kind"] = payoff_by_kind;
  j["jain_by_episode"] = jain_by_episode;
  j["intrinsic_by_kind"] = intrinsic_by_kind;
  j["forward_loss_by_kind"] = forward_loss_by_kind;
  return j.dump(2);
}

Summary Summary::from_json(const std::string& text) {
  const json j = json::parse(text);
  Summary s;
  s.episodes = j.at("episodes").get<int>();
  s.payoff_by_kind =
      j.at("payoff_by_kind").get<std::map<std::string, std::vector<double>>>();
  s.jain_by_episode = j.at("jain_by_episode").get<std::vector<double>>();
  s.intrinsic_by_kind =
      j.at("intrinsic_by_kind")
          .get<std::map<std::string, std::vector<double>>>();
  s.forward_loss_by_kind =
      j.at("forward_loss_by_kind")
          .get<std::map<std::string, std::vector<double>>>();
  return s;
}

namespace {

// Minimal SVG line chart. Pure function of its inputs, so re-emission
// produces identical bytes.
std::string svg_chart(const std::string& title,
                      const std::map<std::string, std::vector<double>>& series) {
  const int width = 640, height = 400;
  const int mleft = 60, mright = 20, mtop = 40, mbottom = 40;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title
      << "</text>\n";

  bool has_data = false;
  double ymin = 0.0, ymax = 0.0;
  std::size_t xmax = 0;
  for (const auto& [name, values] : series) {
    if (values.empty()) continue;
    for (double v : values) {
      if (!has_data) {
        ymin = ymax = v;
        has_data = true;
      }
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
    xmax = std::max(xmax, values.size());
  }
  if (!has_data || xmax < 2) {
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\" fill=\"#888\">no data</text>\n</svg>\n";
    return svg.str();
  }
  if (ymax - ymin < 1e-12) {
    ymax += 1.0;
    ymin -= 1.0;
  }

  const double plot_w = width - mleft - mright;
  const double plot_h = height - mtop - mbottom;
  auto xpix = [&](std::size_t i) {
    return mleft + plot_w * static_cast<double>(i) /
                       static_cast<double>(xmax - 1);
  };
  auto ypix = [&](double v) {
    return mtop + plot_h * (1.0 - (v - ymin) / (ymax - ymin));
  };

  svg << "<line x1=\"" << mleft << "\" y1=\"" << mtop + plot_h << "\" x2=\""
      << mleft + plot_w << "\" y2=\"" << mtop + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << mleft << "\" y1=\"" << mtop << "\" x2=\"" << mleft
      << "\" y2=\"" << mtop + plot_h << "\" stroke=\"black\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", ymax);
  svg << "<text x=\"" << mleft - 6 << "\" y=\"" << mtop + 5
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.4g", ymin);
  svg << "<text x=\"" << mleft - 6 << "\" y=\"" << mtop + plot_h + 5
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << buf << "</text>\n";
  svg << "<text x=\"" << mleft + plot_w / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">episode</text>\n";

  const std::vector<std::string> palette{"#1f77b4", "#ff7f0e", "#2ca02c",
                                         "#d62728", "#9467bd", "#8c564b"};
  int color_idx = 0;
  int legend_y = mtop + 4;
  for (const auto& [name, values] : series) {
    if (values.empty()) continue;
    const std::string& color = palette[color_idx % palette.size()];
    ++color_idx;
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", xpix(i), ypix(values[i]));
      svg << buf;
    }
    svg << "\"/>\n";
    svg << "<rect x=\"" << mleft + plot_w - 110 << "\" y=\"" << legend_y
        << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << mleft + plot_w - 96 << "\" y=\"" << legend_y + 9
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << name
        << "</text>\n";
    legend_y += 14;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(
    const Summary& summary, const std::filesystem::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> files;

  const fs::path payoff = out_dir / "payoff_performance.svg";
  write_file(payoff, svg_chart("Payoff performance (mean cumulated payoff)",
                               summary.payoff_by_kind));
  files.push_back(payoff);

  const fs::path fairness = out_dir / "fairness_performance.svg";
  write_file(fairness,
             svg_chart("Fairness performance (J-index)",
                       {{"J-index", summary.jain_by_episode}}));
  files.push_back(fairness);

  const fs::path intrinsic = out_dir / "intrinsic_reward.svg";
  write_file(intrinsic,
             svg_chart("Intrinsic reward", summary.intrinsic_by_kind));
  files.push_back(intrinsic);

  const fs::path fwd = out_dir / "forward_loss.svg";
  write_file(fwd, svg_chart("Forward model loss", summary.forward_loss_by_kind));
  files.push_back(fwd);
  return files;
}

std::string VerifyReport::text() const {
  std::ostringstream out;
  for (const VerifyCheck& check : checks) {
    out << (check.passed ? "PASS" : "FAIL") << "  " << check.name << "  "
        << check.detail << '\n';
  }
  out << (all_passed ? "ALL CHECKS PASSED" : "SOME CHECKS FAILED") << '\n';
  return out.str();
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

VerifyReport verify_appendix(const std::filesystem::path& instances_dir,
                             int trials, std::uint64_t seed) {
  VerifyReport report;
  rng::Stream rng = rng::derive(seed, "verify");
  char detail[160];

  // Potential game: the bundled instance plus a random sweep.
  try {
    const auto inst = gametheory::potential_instance_from_json(
        read_file(instances_dir / "potential_game.json"));
    const double dev = gametheory::verify_exact_potential(inst, trials, rng);
    std::snprintf(detail, sizeof(detail), "max |du - dphi| = %.3g", dev);
    report.checks.push_back(
        {"exact-potential (bundled instance)", dev <= 1e-9, detail});
  } catch (const std::exception& e) {
    report.checks.push_back({"exact-potential (bundled instance)", false,
                             std::string("potential_game.json: ") + e.what()});
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto inst = gametheory::random_potential_instance(rng);
      worst = std::max(worst,
                       gametheory::verify_exact_potential(inst, trials, rng));
    }
    std::snprintf(detail, sizeof(detail),
                  "20 random instances, max |du - dphi| = %.3g", worst);
    report.checks.push_back(
        {"exact-potential (random sweep)", worst <= 1e-9, detail});
  }

  // Second-price best response against the bundled instance.
  try {
    const auto inst = gametheory::spa_instance_from_json(
        read_file(instances_dir / "spa.json"));
    const auto curve = gametheory::best_response_curve(inst, 161, 200, 400);
    const double tol = 2.0 * curve.bid_step;
    const auto piecewise = gametheory::check_piecewise_linear_form(
        curve, inst.f1_low, inst.f1_high, tol);
    const bool ok = piecewise.middle_branch_present &&
                    piecewise.max_residual <= tol &&
                    piecewise.anchor_low_error <= tol &&
                    piecewise.anchor_high_error <= tol &&
                    piecewise.lower_branch_ok && piecewise.upper_branch_ok;
    std::snprintf(detail, sizeof(detail),
                  "residual %.3g, anchors %.3g/%.3g, tol %.3g",
                  piecewise.max_residual, piecewise.anchor_low_error,
                  piecewise.anchor_high_error, tol);
    report.checks.push_back({"spa best-response three-branch form", ok, detail});
  } catch (const std::exception& e) {
    report.checks.push_back({"spa best-response three-branch form", false,
                             std::string("spa.json: ") + e.what()});
  }

  // Fairness-constrained allocation.
  try {
    const auto inst = gametheory::pareto_instance_from_json(
        read_file(instances_dir / "pareto.json"));
    const auto welfare = gametheory::verify_welfare_optimality(
        inst, inst.gamma, 50, 1e-3, 200000, rng);
    const bool round_trip =
        welfare.feasible &&
        std::abs(welfare.achieved_ratio - inst.gamma) <= 1e-3;
    std::snprintf(detail, sizeof(detail),
                  "lambda* = %.5f, achieved ratio %.5f (target %.3f)",
                  welfare.lambda_star, welfare.achieved_ratio, inst.gamma);
    report.checks.push_back(
        {"pareto lambda* round trip", round_trip, detail});
    const double slack = 1e-6 * std::max(1.0, std::abs(welfare.astar_welfare));
    const bool dominant =
        welfare.feasible &&
        welfare.astar_welfare >= welfare.best_rival_welfare - slack;
    std::snprintf(detail, sizeof(detail),
                  "A* welfare %.6f vs best rival %.6f (%d feasible rivals)",
                  welfare.astar_welfare, welfare.best_rival_welfare,
                  welfare.rival_rules_feasible);
    report.checks.push_back({"pareto welfare dominance", dominant, detail});
  } catch (const std::exception& e) {
    report.checks.push_back({"pareto lambda* round trip", false,
                             std::string("pareto.json: ") + e.what()});
    report.checks.push_back({"pareto welfare dominance", false,
                             std::string("pareto.json: ") + e.what()});
  }

  report.all_passed = true;
  for (const VerifyCheck& check : report.checks) {
    report.all_passed = report.all_passed && check.passed;
  }
  return report;
}

}  // namespace arena::harness
