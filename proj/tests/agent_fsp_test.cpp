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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "arena/agent_fsp.hpp"
#include "arena/rng.hpp"
#include "json.hpp"

using namespace arena;
using fsp::AgentKind;

namespace {

fsp::FspConfig small_config() {
  fsp::FspConfig cfg;
  cfg.window = 4;
  cfg.sl_hidden = {16, 16};
  cfg.ac.channels = 8;
  cfg.ac.dense_hidden = 16;
  cfg.curiosity.feature_dim = 8;
  cfg.curiosity.hidden = 16;
  cfg.credit.hidden = 8;
  cfg.credit_epochs = 2;
  return cfg;
}

engine::AuctionConfig auction_config() {
  engine::AuctionConfig cfg;
  cfg.num_bidders = 6;
  return cfg;
}

engine::Observation make_obs(long step, double reserve = 20.0,
                             double prev_price = 0.0) {
  engine::Observation obs;
  obs.bidder_id = 0;
  obs.step = step;
  obs.valuation = 2.5;
  obs.reserve = reserve;
  obs.occupied = false;
  obs.num_bidders = 6;
  obs.prev_num_bids = 3;
  obs.prev_price = prev_price;
  return obs;
}

engine::StepFeedback make_feedback(long step, double payoff,
                                   engine::Participation part,
                                   double price = 1.0) {
  engine::StepFeedback fb;
  fb.step = step;
  fb.participation = part;
  fb.acted = part != engine::Participation::kOccupied;
  fb.payoff = payoff;
  fb.price = price;
  fb.next_obs = make_obs(step + 1, 19.5, price);
  return fb;
}

// One acted step: act then feedback.
void drive_step(fsp::FspAgent& agent, long step) {
  agent.act(make_obs(step));
  agent.feedback(
      make_feedback(step, step % 3 == 0 ? 1.0 : -0.1,
                    step % 3 == 0 ? engine::Participation::kWon
                                  : engine::Participation::kLost));
}

}  // namespace

TEST_CASE("build_state pads and truncates") {
  std::deque<fsp::RLRecord> memory;
  for (int i = 0; i < 10; ++i) {
    fsp::RLRecord rec;
    rec.step = i;
    for (int f = 0; f < fsp::RLRecord::kDim; ++f) {
      rec.f[f] = 10.0 * i + f;
    }
    memory.push_back(rec);
  }

  SUBCASE("suffix of a long memory") {
    const nn::Vec window = fsp::build_state(memory, 4);
    REQUIRE(window.size() == 4 * fsp::RLRecord::kDim);
    CHECK(window[0] == doctest::Approx(60.0));  // record 6, feature 0
    CHECK(window[3 * fsp::RLRecord::kDim] == doctest::Approx(90.0));
  }
  SUBCASE("left zero padding") {
    std::deque<fsp::RLRecord> two(memory.begin(), memory.begin() + 2);
    const nn::Vec window = fsp::build_state(two, 4);
    for (int i = 0; i < 2 * fsp::RLRecord::kDim; ++i) {
      CHECK(window[i] == 0.0);
    }
    CHECK(window[2 * fsp::RLRecord::kDim] == doctest::Approx(0.0));
    CHECK(window[3 * fsp::RLRecord::kDim] == doctest::Approx(10.0));
  }
  SUBCASE("window of one keeps only the latest") {
    const nn::Vec window = fsp::build_state(memory, 1);
    REQUIRE(window.size() == fsp::RLRecord::kDim);
    CHECK(window[0] == doctest::Approx(90.0));
  }
}

TEST_CASE("mix schedule anneals as 1/t") {
  fsp::MixSchedule schedule;
  CHECK(schedule.eta() == doctest::Approx(1.0));
  double prev = 2.0;
  for (int t = 1; t <= 100; ++t) {
    CHECK(schedule.eta() == doctest::Approx(1.0 / t));
    CHECK(schedule.eta() < prev);
    prev = schedule.eta();
    schedule.advance();
  }
}

TEST_CASE("choose_action mixing") {
  const engine::BidAction psi{0.2, 1.0};
  const engine::BidAction zeta{0.8, 3.0};

  SUBCASE("eta one always plays the best response") {
    rng::Stream rng(1);
    for (int i = 0; i < 100; ++i) {
      const auto choice = fsp::choose_action(psi, zeta, 1.0, false, rng);
      CHECK(choice.used_best_response);
      CHECK(choice.action.bid == doctest::Approx(3.0));
    }
  }
  SUBCASE("eta zero always plays the behavioral strategy") {
    rng::Stream rng(2);
    for (int i = 0; i < 100; ++i) {
      const auto choice = fsp::choose_action(psi, zeta, 0.0, false, rng);
      CHECK_FALSE(choice.used_best_response);
      CHECK(choice.action.bid == doctest::Approx(1.0));
    }
  }
  SUBCASE("monte carlo frequency at eta 0.25") {
    rng::Stream rng(3);
    int best_response = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      if (fsp::choose_action(psi, zeta, 0.25, false, rng).used_best_response) {
        ++best_response;
      }
    }
    const double fraction = static_cast<double>(best_response) / n;
    CHECK(fraction > 0.24);
    CHECK(fraction < 0.26);
  }
  SUBCASE("convex mixture blends deterministically") {
    rng::Stream rng(4);
    const auto choice = fsp::choose_action(psi, zeta, 0.25, true, rng);
    CHECK(choice.action.alpha == doctest::Approx(0.75 * 0.2 + 0.25 * 0.8));
    CHECK(choice.action.bid == doctest::Approx(0.75 * 1.0 + 0.25 * 3.0));
  }
}

TEST_CASE("sl regression fits a constant action memory") {
  fsp::FspAgent agent(AgentKind::kSht, small_config(), auction_config(), 11);
  // Plant a constant-action memory through the checkpoint interface.
  agent.act(make_obs(0));
  agent.feedback(make_feedback(0, 0.5, engine::Participation::kWon, 2.0));
  auto blob = nlohmann::json::parse(agent.checkpoint(true));
  nlohmann::json memory = nlohmann::json::array();
  const std::array<double, 6> state{0.125, 1.0, 0.0, 0.6, 0.3, 0.1};
  const std::array<double, 2> action{0.7, 4.2};
  for (int i = 0; i < 64; ++i) {
    memory.push_back({{"state", state}, {"action", action}});
  }
  blob["sl_memory"] = memory;
  agent.restore(blob.dump());

  double loss = 1.0;
  for (int i = 0; i < 800; ++i) loss = agent.sl_update();
  CHECK(loss < 1e-3);
  const auto prediction = agent.sl_predict(state);
  CHECK(std::abs(prediction.alpha - 0.7) < 1e-2);
  CHECK(std::abs(prediction.bid - 4.2) < 1e-2);
}

TEST_CASE("agent bookkeeping per acted step") {
  fsp::FspAgent agent(AgentKind::kSht, small_config(), auction_config(), 12);
  CHECK(agent.step_count() == 1);
  CHECK(agent.eta() == doctest::Approx(1.0));

  const int steps = 25;
  for (int i = 0; i < steps; ++i) drive_step(agent, i);

  CHECK(agent.step_count() == 1 + steps);
  CHECK(agent.eta() == doctest::Approx(1.0 / (1 + steps)));
  CHECK(agent.sl_memory_size() == steps);
  CHECK(agent.rl_memory_size() <= steps + 1);

  SUBCASE("occupied feedback is ignored") {
    const auto before = agent.sl_memory_size();
    engine::StepFeedback fb =
        make_feedback(steps, 0.0, engine::Participation::kOccupied);
    agent.feedback(fb);
    CHECK(agent.sl_memory_size() == before);
    CHECK(agent.step_count() == 1 + steps);
  }
}

TEST_CASE("actions are clamped to the feasible box") {
  fsp::FspAgent agent(AgentKind::kSht, small_config(), auction_config(), 13);
  for (int i = 0; i < 100; ++i) {
    engine::Observation obs = make_obs(i, /*reserve=*/3.0);
    const engine::BidAction action = agent.act(obs);
    CHECK(action.alpha >= 0.0);
    CHECK(action.alpha <= 1.0);
    CHECK(action.bid >= 0.0);
    CHECK(action.bid <= 3.0);
    agent.feedback(make_feedback(i, -0.1, engine::Participation::kLost));
  }
}

TEST_CASE("dra agent emits full metrics and trains credit per episode") {
  fsp::FspAgent agent(AgentKind::kDra, small_config(), auction_config(), 14);
  for (int episode = 0; episode < 3; ++episode) {
    for (int i = 0; i < 10; ++i) drive_step(agent, episode * 10 + i);
    agent.episode_end(2.0 + episode);
    CHECK(agent.credit_training_runs() == episode + 1);
  }
  const fsp::StepMetrics& m = agent.last_metrics();
  CHECK(m.intrinsic_reward.has_value());
  CHECK(m.forward_loss.has_value());
  CHECK(m.inverse_loss.has_value());
  CHECK(m.epsilon_last.has_value());
  CHECK(*m.epsilon_last >= 0.0);
  CHECK(*m.epsilon_last <= 1.0);
}

TEST_CASE("sht agent leaves curiosity metrics empty") {
  fsp::FspAgent agent(AgentKind::kSht, small_config(), auction_config(), 15);
  for (int i = 0; i < 5; ++i) drive_step(agent, i);
  const fsp::StepMetrics& m = agent.last_metrics();
  CHECK_FALSE(m.intrinsic_reward.has_value());
  CHECK_FALSE(m.forward_loss.has_value());
  CHECK_FALSE(m.inverse_loss.has_value());
  CHECK_FALSE(m.epsilon_last.has_value());
  CHECK(agent.credit_training_runs() == 0);
}

TEST_CASE("cur agent runs on the exploration-only reward") {
  fsp::FspAgent agent(AgentKind::kCur, small_config(), auction_config(), 16);
  for (int i = 0; i < 5; ++i) drive_step(agent, i);
  const fsp::StepMetrics& m = agent.last_metrics();
  REQUIRE(m.epsilon_last.has_value());
  CHECK(*m.epsilon_last == doctest::Approx(0.0));  // payoff term switched off
  REQUIRE(m.intrinsic_reward.has_value());
  REQUIRE(m.forward_loss.has_value());
  CHECK(*m.intrinsic_reward ==
        doctest::Approx(small_config().curiosity.xi * *m.forward_loss));
  agent.episode_end(1.0);
  CHECK(agent.credit_training_runs() == 0);  // no credit model
}

TEST_CASE("agent kind names round trip") {
  CHECK(fsp::to_string(AgentKind::kSht) == std::string("SHT"));
  CHECK(*fsp::agent_kind_from("DRA") == AgentKind::kDra);
  CHECK(*fsp::agent_kind_from("CUR") == AgentKind::kCur);
  CHECK_FALSE(fsp::agent_kind_from("WAT").has_value());
}

TEST_CASE("checkpoints restore parameters") {
  fsp::FspConfig cfg = small_config();
  engine::AuctionConfig auction = auction_config();

  fsp::FspAgent donor(AgentKind::kDra, cfg, auction, 17);
  for (int i = 0; i < 12; ++i) drive_step(donor, i);
  donor.episode_end(1.5);

  const std::string blob = donor.checkpoint();

  fsp::FspAgent clone(AgentKind::kDra, cfg, auction, 999);
  std::array<double, fsp::SLRecord::kDim> probe{0.1, 0.9, 0.0,
                                                0.6, 0.3, 0.05};
  const auto before = clone.sl_predict(probe);
  clone.restore(blob);
  const auto donor_pred = donor.sl_predict(probe);
  const auto after = clone.sl_predict(probe);
  CHECK(after.alpha == doctest::Approx(donor_pred.alpha));
  CHECK(after.bid == doctest::Approx(donor_pred.bid));
  // restoring actually changed something
  CHECK((std::abs(before.alpha - after.alpha) +
         std::abs(before.bid - after.bid)) > 0.0);
  CHECK(clone.step_count() == donor.step_count());

  SUBCASE("kind mismatch is rejected") {
    fsp::FspAgent other(AgentKind::kSht, cfg, auction, 18);
    CHECK_THROWS_AS(other.restore(blob), std::invalid_argument);
  }
}

TEST_CASE("deterministic behavior under identical seeds") {
  fsp::FspConfig cfg = small_config();
  engine::AuctionConfig auction = auction_config();
  fsp::FspAgent a(AgentKind::kDra, cfg, auction, 21);
  fsp::FspAgent b(AgentKind::kDra, cfg, auction, 21);
  for (int i = 0; i < 30; ++i) {
    const auto action_a = a.act(make_obs(i));
    const auto action_b = b.act(make_obs(i));
    CHECK(action_a.alpha == action_b.alpha);
    CHECK(action_a.bid == action_b.bid);
    const auto fb = make_feedback(i, 0.3, engine::Participation::kWon, 1.2);
    a.feedback(fb);
    b.feedback(fb);
  }
}
