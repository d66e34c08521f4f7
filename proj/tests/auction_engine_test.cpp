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
#include <map>
#include <memory>
#include <stdexcept>

#include "arena/auction_engine.hpp"
#include "json.hpp"

using namespace arena;
using engine::AuctionConfig;
using engine::BidAction;
using engine::BidderAccount;
using engine::GameKind;
using engine::Participation;

namespace {

AuctionConfig base_config(GameKind kind, int bidders = 2) {
  AuctionConfig cfg;
  cfg.game_kind = kind;
  cfg.num_bidders = bidders;
  cfg.episode_length = 10;
  return cfg;
}

std::vector<BidderAccount> make_accounts(const AuctionConfig& cfg) {
  std::vector<BidderAccount> accounts(cfg.num_bidders);
  for (int i = 0; i < cfg.num_bidders; ++i) {
    accounts[i].bidder_id = i;
    accounts[i].reserve = cfg.initial_reserve;
    accounts[i].valuation = 1.0 + i;
  }
  return accounts;
}

// Uniform-random test bidder.
class RandomAgent : public engine::Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}
  BidAction act(const engine::Observation& obs) override {
    return {rng_.uniform(), rng_.uniform(0.0, obs.reserve)};
  }
  void feedback(const engine::StepFeedback&) override {}
  void episode_end(double) override {}
  std::string kind() const override { return "RANDOM"; }

 private:
  rng::Stream rng_;
};

class ThrowingAgent : public engine::Agent {
 public:
  BidAction act(const engine::Observation&) override {
    throw std::runtime_error("boom");
  }
  void feedback(const engine::StepFeedback&) override {}
  void episode_end(double) override {}
  std::string kind() const override { return "THROWING"; }
};

}  // namespace

TEST_CASE("config validation") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse, 6);
  CHECK_NOTHROW(cfg.validate());
  cfg.num_bidders = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config(GameKind::kFpReverse);
  cfg.backoff_threshold = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config(GameKind::kFpReverse);
  cfg.initial_reserve = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("backoff resolution") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse);
  cfg.backoff_threshold = 0.5;
  cfg.backoff_scale = 4.0;

  CHECK(engine::resolve_backoff(1.0, cfg).participate);
  const auto at_zero = engine::resolve_backoff(0.0, cfg);
  CHECK_FALSE(at_zero.participate);
  CHECK(at_zero.duration == 1);
  // The boundary is not strictly above the threshold: max(1, ceil(4*0.5)).
  const auto at_threshold = engine::resolve_backoff(0.5, cfg);
  CHECK_FALSE(at_threshold.participate);
  CHECK(at_threshold.duration == 2);
}

TEST_CASE("fp duration") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse);
  cfg.fp_duration_base = 1.0;
  cfg.fp_duration_slope = 0.0;
  CHECK(engine::fp_duration(0.0, cfg) == 1);
  CHECK(engine::fp_duration(100.0, cfg) == 1);

  cfg.fp_duration_slope = 0.5;
  CHECK(engine::fp_duration(4.0, cfg) == 3);

  cfg.fp_duration_base = 0.0;
  cfg.fp_duration_slope = 0.1;
  CHECK(engine::fp_duration(2.0, cfg) == 1);

  // monotone nondecreasing in b
  cfg.fp_duration_base = 1.0;
  cfg.fp_duration_slope = 0.7;
  int prev = 0;
  for (double b = 0.0; b <= 10.0; b += 0.25) {
    const int d = engine::fp_duration(b, cfg);
    CHECK(d >= prev);
    prev = d;
  }
}

TEST_CASE("fp score") {
  CHECK(*engine::fp_score(2.0, 4) == doctest::Approx(2.0));
  CHECK(*engine::fp_score(1.0, 1) == doctest::Approx(1.0));
  CHECK(*engine::fp_score(1.0, 2) == doctest::Approx(*engine::fp_score(2.0, 4)));
  CHECK_FALSE(engine::fp_score(0.0, 3).has_value());
}

TEST_CASE("second-price round mechanics") {
  AuctionConfig cfg = base_config(GameKind::kSpForward);
  cfg.sp_duration = 2;
  auto accounts = make_accounts(cfg);
  rng::Stream rng(7);

  SUBCASE("two participants") {
    std::map<int, BidAction> actions{{0, {1.0, 5.0}}, {1, {1.0, 3.0}}};
    const auto out = engine::run_round(actions, accounts, cfg, rng);
    REQUIRE(out.winner.has_value());
    CHECK(*out.winner == 0);
    CHECK(out.final_price == doctest::Approx(3.0));
    CHECK(out.payoffs[0] == doctest::Approx(4.0));  // (5 - 3) * 2
    CHECK(out.payoffs[1] == doctest::Approx(-cfg.joining_cost));
    CHECK(out.participation[0] == Participation::kWon);
    CHECK(out.participation[1] == Participation::kLost);
  }
  SUBCASE("single participant pays the bid floor") {
    std::map<int, BidAction> actions{{0, {1.0, 5.0}}, {1, {0.0, 3.0}}};
    const auto out = engine::run_round(actions, accounts, cfg, rng);
    REQUIRE(out.winner.has_value());
    CHECK(*out.winner == 0);
    CHECK(out.final_price == doctest::Approx(cfg.bid_floor));
    CHECK(out.payoffs[0] == doctest::Approx(10.0));  // (5 - 0) * 2
    CHECK(out.participation[1] == Participation::kBackedOff);
    CHECK(out.payoffs[1] == doctest::Approx(-cfg.backoff_cost));
  }
  SUBCASE("bids above the reserve are clamped and flagged") {
    accounts[0].reserve = 4.0;
    std::map<int, BidAction> actions{{0, {1.0, 50.0}}, {1, {1.0, 3.0}}};
    const auto out = engine::run_round(actions, accounts, cfg, rng);
    CHECK(out.bid_clamped[0]);
    CHECK(out.used_actions[0]->bid == doctest::Approx(4.0));
    CHECK(*out.winner == 0);
    CHECK(out.payoffs[0] == doctest::Approx((4.0 - 3.0) * 2));
  }
}

TEST_CASE("first-price reverse round mechanics") {
  // Durations chosen so the better score also carries the pinned payoff:
  // A bids 2 -> d = 1 + 1.5*2 = 4, score 2; B bids 4 -> d = 7, score 1.75.
  AuctionConfig cfg = base_config(GameKind::kFpReverse);
  cfg.fp_duration_base = 1.0;
  cfg.fp_duration_slope = 1.5;
  auto accounts = make_accounts(cfg);
  rng::Stream rng(7);

  std::map<int, BidAction> actions{{0, {1.0, 2.0}}, {1, {1.0, 4.0}}};
  const auto out = engine::run_round(actions, accounts, cfg, rng);
  REQUIRE(out.winner.has_value());
  CHECK(*out.winner == 0);
  CHECK(out.final_price == doctest::Approx(2.0));  // first price: own bid
  CHECK(out.duration == 4);
  CHECK(out.payoffs[0] == doctest::Approx(8.0));  // b * d
  CHECK(out.payoffs[1] == doctest::Approx(-cfg.joining_cost));
}

TEST_CASE("fp ties break randomly but deterministically under a seed") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse);
  auto accounts = make_accounts(cfg);
  std::map<int, BidAction> actions{{0, {1.0, 2.0}}, {1, {1.0, 2.0}}};

  int wins0 = 0;
  rng::Stream rng(42);
  for (int i = 0; i < 400; ++i) {
    const auto out = engine::run_round(actions, accounts, cfg, rng);
    REQUIRE(out.winner.has_value());
    if (*out.winner == 0) ++wins0;
  }
  CHECK(wins0 > 140);
  CHECK(wins0 < 260);

  rng::Stream rng_a(43), rng_b(43);
  for (int i = 0; i < 50; ++i) {
    const auto a = engine::run_round(actions, accounts, cfg, rng_a);
    const auto b = engine::run_round(actions, accounts, cfg, rng_b);
    CHECK(*a.winner == *b.winner);
  }
}

TEST_CASE("degenerate zero bid loses in fp") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse);
  auto accounts = make_accounts(cfg);
  rng::Stream rng(7);
  std::map<int, BidAction> actions{{0, {1.0, 0.0}}, {1, {1.0, 1.0}}};
  const auto out = engine::run_round(actions, accounts, cfg, rng);
  REQUIRE(out.winner.has_value());
  CHECK(*out.winner == 1);
  CHECK(out.participation[0] == Participation::kLost);
  CHECK(out.payoffs[0] == doctest::Approx(-cfg.joining_cost));
}

TEST_CASE("zero participants leaves the round without a winner") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse);
  auto accounts = make_accounts(cfg);
  rng::Stream rng(7);
  std::map<int, BidAction> actions{{0, {0.0, 1.0}}, {1, {0.2, 1.0}}};
  const auto out = engine::run_round(actions, accounts, cfg, rng);
  CHECK_FALSE(out.winner.has_value());
  CHECK(out.participation[0] == Participation::kBackedOff);
  CHECK(out.participation[1] == Participation::kBackedOff);
  CHECK(out.payoffs[0] == doctest::Approx(-cfg.backoff_cost));
}

TEST_CASE("settlement arithmetic") {
  AuctionConfig cfg = base_config(GameKind::kSpForward);
  cfg.carrying_cost = 1.0;

  SUBCASE("payoff and carrying cost") {
    auto accounts = make_accounts(cfg);
    accounts[0].reserve = 10.0;
    engine::RoundOutcome out;
    out.payoffs = {4.0, 0.0};
    out.participation = {Participation::kWon, Participation::kOccupied};
    out.backoff_duration = {0, 0};
    out.winner = 0;
    out.duration = 2;
    const auto events = engine::settle_step(accounts, out, cfg, 5);
    CHECK(events.empty());
    CHECK(accounts[0].reserve == doctest::Approx(13.0));
    CHECK(accounts[0].occupied_until == 7);
  }
  SUBCASE("depletion resets to the initial reserve") {
    auto accounts = make_accounts(cfg);
    accounts[0].reserve = 0.5;
    engine::RoundOutcome out;
    out.payoffs = {0.0, 0.0};
    out.participation = {Participation::kBackedOff, Participation::kOccupied};
    out.backoff_duration = {1, 0};
    const auto events = engine::settle_step(accounts, out, cfg, 5);
    REQUIRE(events.size() == 1);
    CHECK(events[0].bidder_id == 0);
    CHECK(events[0].penalty == doctest::Approx(cfg.bankruptcy_penalty));
    CHECK(accounts[0].reserve == doctest::Approx(cfg.initial_reserve));
    CHECK(accounts[0].occupied_until == 0);
    CHECK(accounts[0].games_bankrupted == 1);
  }
  SUBCASE("occupation window") {
    auto accounts = make_accounts(cfg);
    engine::RoundOutcome out;
    out.payoffs = {6.0, 0.0};
    out.participation = {Participation::kWon, Participation::kLost};
    out.backoff_duration = {0, 0};
    out.winner = 0;
    out.duration = 3;
    engine::settle_step(accounts, out, cfg, 7);
    CHECK(accounts[0].occupied_until == 10);
    CHECK(accounts[0].occupied_at(8));
    CHECK(accounts[0].occupied_at(9));
    CHECK_FALSE(accounts[0].occupied_at(10));
  }
}

TEST_CASE("episode shape and accounting") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse, 6);
  cfg.episode_length = 150;
  auto accounts = make_accounts(cfg);
  std::vector<std::unique_ptr<RandomAgent>> agents;
  std::vector<engine::Agent*> ptrs;
  for (int i = 0; i < 6; ++i) {
    agents.push_back(std::make_unique<RandomAgent>(100 + i));
    ptrs.push_back(agents.back().get());
  }
  rng::Stream rng(5);
  const auto log = engine::run_episode(ptrs, accounts, cfg,
                                       rewards::ExtrinsicKind::kPayoff, rng);
  CHECK_FALSE(log.aborted);
  CHECK(log.rows.size() == 150 * 6);
  CHECK(engine::max_conservation_error(log, cfg) <= 1e-9);
  // accounts restarted for the next episode
  for (const auto& acct : accounts) {
    CHECK(acct.reserve == doctest::Approx(cfg.initial_reserve));
    CHECK(acct.occupied_until == 0);
  }

  SUBCASE("closed-form conservation without bankruptcies") {
    // Verify against an independent resum of the log for one bidder.
    std::vector<double> final_reserve(6, cfg.initial_reserve);
    for (const auto& row : log.rows) {
      final_reserve[row.bidder_id] += row.payoff - cfg.carrying_cost;
    }
    for (int m = 0; m < 6; ++m) {
      const auto& last = log.rows[log.rows.size() - 6 + m];
      CHECK(last.reserve_after == doctest::Approx(final_reserve[m]));
    }
  }
}

TEST_CASE("occupation bars participation") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse, 4);
  cfg.episode_length = 120;
  cfg.fp_duration_slope = 1.0;  // durations long enough to matter
  auto accounts = make_accounts(cfg);
  std::vector<std::unique_ptr<RandomAgent>> agents;
  std::vector<engine::Agent*> ptrs;
  for (int i = 0; i < 4; ++i) {
    agents.push_back(std::make_unique<RandomAgent>(200 + i));
    ptrs.push_back(agents.back().get());
  }
  rng::Stream rng(6);
  const auto log = engine::run_episode(ptrs, accounts, cfg,
                                       rewards::ExtrinsicKind::kPayoff, rng);

  std::vector<long> occupied_until(4, 0);
  for (const auto& row : log.rows) {
    const bool occupied = row.step < occupied_until[row.bidder_id];
    if (occupied) {
      CHECK(row.participation == Participation::kOccupied);
      CHECK_FALSE(row.action.has_value());
    } else {
      CHECK(row.participation != Participation::kOccupied);
      CHECK(row.action.has_value());
    }
    occupied_until[row.bidder_id] = row.occupied_until;
  }
}

TEST_CASE("degenerate one-step all-backoff episode") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse);
  cfg.episode_length = 1;

  class BackoffAgent : public engine::Agent {
   public:
    BidAction act(const engine::Observation&) override { return {0.0, 1.0}; }
    void feedback(const engine::StepFeedback&) override {}
    void episode_end(double) override {}
    std::string kind() const override { return "BACKOFF"; }
  };
  BackoffAgent a, b;
  std::vector<engine::Agent*> ptrs{&a, &b};
  auto accounts = make_accounts(cfg);
  rng::Stream rng(1);
  const auto log = engine::run_episode(ptrs, accounts, cfg,
                                       rewards::ExtrinsicKind::kPayoff, rng);
  REQUIRE(log.rows.size() == 2);
  for (const auto& row : log.rows) {
    CHECK(row.payoff == doctest::Approx(-cfg.backoff_cost));
    CHECK(row.reserve_after == doctest::Approx(cfg.initial_reserve -
                                               cfg.backoff_cost -
                                               cfg.carrying_cost));
  }
}

TEST_CASE("episode is deterministic given seed and config") {
  AuctionConfig cfg = base_config(GameKind::kSpForward, 5);
  cfg.episode_length = 60;
  std::string first, second;
  for (int rep = 0; rep < 2; ++rep) {
    auto accounts = make_accounts(cfg);
    std::vector<std::unique_ptr<RandomAgent>> agents;
    std::vector<engine::Agent*> ptrs;
    for (int i = 0; i < 5; ++i) {
      agents.push_back(std::make_unique<RandomAgent>(300 + i));
      ptrs.push_back(agents.back().get());
    }
    rng::Stream rng(77);
    const auto log = engine::run_episode(ptrs, accounts, cfg,
                                         rewards::ExtrinsicKind::kPayoff, rng);
    (rep == 0 ? first : second) = log.to_jsonl();
  }
  CHECK(first == second);
  CHECK_FALSE(first.empty());
}

TEST_CASE("agent failure aborts with a diagnostic") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse);
  auto accounts = make_accounts(cfg);
  RandomAgent good(1);
  ThrowingAgent bad;
  std::vector<engine::Agent*> ptrs{&good, &bad};
  rng::Stream rng(1);
  const auto log = engine::run_episode(ptrs, accounts, cfg,
                                       rewards::ExtrinsicKind::kPayoff, rng);
  CHECK(log.aborted);
  CHECK(log.diagnostic.find("boom") != std::string::npos);
}

TEST_CASE("jsonl rows carry the full schema") {
  AuctionConfig cfg = base_config(GameKind::kFpReverse, 3);
  cfg.episode_length = 30;
  cfg.fp_duration_slope = 1.0;
  auto accounts = make_accounts(cfg);
  std::vector<std::unique_ptr<RandomAgent>> agents;
  std::vector<engine::Agent*> ptrs;
  for (int i = 0; i < 3; ++i) {
    agents.push_back(std::make_unique<RandomAgent>(400 + i));
    ptrs.push_back(agents.back().get());
  }
  rng::Stream rng(9);
  const auto log = engine::run_episode(ptrs, accounts, cfg,
                                       rewards::ExtrinsicKind::kFairness, rng);
  std::istringstream lines(log.to_jsonl());
  std::string line;
  std::size_t count = 0;
  bool saw_occupied = false;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"step", "bidder_id", "action", "participation",
                            "payoff", "price", "reserve_after",
                            "occupied_until"}) {
      CHECK(j.contains(key));
    }
    if (j["participation"] == "OCCUPIED") {
      CHECK(j["action"].is_null());
      saw_occupied = true;
    } else {
      CHECK(j["action"].contains("alpha"));
      CHECK(j["action"].contains("bid"));
    }
    ++count;
  }
  CHECK(count == log.rows.size());
  CHECK(saw_occupied);  // durations above 1 must occur in this setup
}

TEST_CASE("broker receipts accumulate second prices") {
  AuctionConfig cfg = base_config(GameKind::kSpForward, 3);
  cfg.episode_length = 40;
  auto accounts = make_accounts(cfg);
  std::vector<std::unique_ptr<RandomAgent>> agents;
  std::vector<engine::Agent*> ptrs;
  for (int i = 0; i < 3; ++i) {
    agents.push_back(std::make_unique<RandomAgent>(500 + i));
    ptrs.push_back(agents.back().get());
  }
  rng::Stream rng(10);
  const auto log = engine::run_episode(ptrs, accounts, cfg,
                                       rewards::ExtrinsicKind::kPayoff, rng);
  double expected = 0.0;
  for (const auto& row : log.rows) {
    if (row.participation == Participation::kWon) expected += row.price;
  }
  CHECK(log.broker_receipts == doctest::Approx(expected));
}
