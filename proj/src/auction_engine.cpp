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

#include "arena/auction_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace arena::engine {

void AuctionConfig::validate() const {
  if (num_bidders < 2) throw std::invalid_argument("num_bidders must be >= 2");
  if (episode_length <= 0) throw std::invalid_argument("T must be positive");
  if (joining_cost < 0.0 || backoff_cost < 0.0 || carrying_cost < 0.0 ||
      bankruptcy_penalty < 0.0 || bid_floor < 0.0) {
    throw std::invalid_argument("cost fields must be nonnegative");
  }
  if (initial_reserve <= 0.0) {
    throw std::invalid_argument("initial_reserve must be positive");
  }
  if (backoff_threshold <= 0.0 || backoff_threshold >= 1.0) {
    throw std::invalid_argument("backoff_threshold must lie in (0,1)");
  }
  if (backoff_scale <= 0.0) {
    throw std::invalid_argument("backoff_scale must be positive");
  }
  if (sp_duration <= 0) throw std::invalid_argument("sp_duration must be >= 1");
  if (fp_duration_slope < 0.0) {
    throw std::invalid_argument("fp_duration_slope must be >= 0");
  }
}

const char* to_string(Participation p) {
  switch (p) {
    case Participation::kWon: return "WON";
    case Participation::kLost: return "LOST";
    case Participation::kBackedOff: return "BACKED_OFF";
    case Participation::kOccupied: return "OCCUPIED";
  }
  return "?";
}

BackoffDecision resolve_backoff(double alpha, const AuctionConfig& cfg) {
  if (alpha > cfg.backoff_threshold) return {true, 0};
  const int duration =
      std::max(1, static_cast<int>(std::ceil(cfg.backoff_scale * alpha)));
  return {false, duration};
}

int fp_duration(double bid, const AuctionConfig& cfg) {
  const double d = cfg.fp_duration_base + cfg.fp_duration_slope * bid;
  return std::max(1, static_cast<int>(std::lround(d)));
}

std::optional<double> fp_score(double bid, int duration) {
  if (bid <= 0.0) return std::nullopt;
  return static_cast<double>(duration) / bid;
}

RoundOutcome run_round(const std::map<int, BidAction>& actions,
                       const std::vector<BidderAccount>& accounts,
                       const AuctionConfig& cfg, rng::Stream& rng) {
  const int n = static_cast<int>(accounts.size());
  RoundOutcome out;
  out.payoffs.assign(n, 0.0);
  out.participation.assign(n, Participation::kOccupied);
  out.backoff_duration.assign(n, 0);
  out.used_actions.assign(n, std::nullopt);
  out.bid_clamped.assign(n, false);

  struct Bid {
    int bidder;
    double price;
    int duration;   // FP service duration
    double score;   // FP only
  };
  std::vector<Bid> participants;
  std::vector<int> rejected;  // degenerate FP bids

  for (const auto& [bidder, raw] : actions) {
    const BidderAccount& acct = accounts[bidder];
    BidAction used;
    // Non-finite policy outputs are treated like any other infeasible
    // action: forced into the box and flagged.
    const double alpha_in = std::isfinite(raw.alpha) ? raw.alpha : 0.0;
    double bid_in = raw.bid;
    if (!std::isfinite(bid_in)) {
      bid_in = cfg.bid_floor;
      out.bid_clamped[bidder] = true;
    }
    used.alpha = std::clamp(alpha_in, 0.0, 1.0);
    const double ub = acct.reserve;
    const double lb = std::min(cfg.bid_floor, ub);
    used.bid = std::clamp(bid_in, lb, ub);
    if (bid_in > ub) out.bid_clamped[bidder] = true;
    out.used_actions[bidder] = used;

    const BackoffDecision decision = resolve_backoff(used.alpha, cfg);
    if (!decision.participate) {
      out.participation[bidder] = Participation::kBackedOff;
      out.backoff_duration[bidder] = decision.duration;
      out.payoffs[bidder] = -cfg.backoff_cost;
      continue;
    }
    if (cfg.game_kind == GameKind::kFpReverse) {
      const int d = fp_duration(used.bid, cfg);
      const auto score = fp_score(used.bid, d);
      if (!score.has_value()) {
        rejected.push_back(bidder);
        continue;
      }
      participants.push_back({bidder, used.bid, d, *score});
    } else {
      participants.push_back({bidder, used.bid, cfg.sp_duration, 0.0});
    }
  }

  // Degenerate bids joined the auction but cannot win.
  for (int bidder : rejected) {
    out.participation[bidder] = Participation::kLost;
    out.payoffs[bidder] = -cfg.joining_cost;
  }

  if (participants.empty()) return out;

  // Pick the winner: highest score (FP) or highest bid (SP), ties uniform.
  const bool fp = cfg.game_kind == GameKind::kFpReverse;
  auto key = [fp](const Bid& b) { return fp ? b.score : b.price; };
  double best = key(participants.front());
  for (const Bid& b : participants) best = std::max(best, key(b));
  std::vector<int> tied;
  for (std::size_t i = 0; i < participants.size(); ++i) {
    if (key(participants[i]) == best) tied.push_back(static_cast<int>(i));
  }
  if (tied.empty()) tied.push_back(0);
  const int pick = tied.size() == 1
                       ? tied.front()
                       : tied[rng.uniform_int(0, static_cast<int>(tied.size()) - 1)];
  const Bid& winner = participants[pick];

  if (fp) {
    out.final_price = winner.price;  // first price: the winner's own bid
    out.duration = winner.duration;
    out.payoffs[winner.bidder] = winner.price * winner.duration;
  } else {
    double second = cfg.bid_floor;
    if (participants.size() > 1) {
      second = -1.0;
      for (std::size_t i = 0; i < participants.size(); ++i) {
        if (static_cast<int>(i) == pick) continue;
        second = std::max(second, participants[i].price);
      }
    }
    out.final_price = second;
    out.duration = cfg.sp_duration;
    out.payoffs[winner.bidder] = (winner.price - second) * cfg.sp_duration;
  }
  out.winner = winner.bidder;
  out.participation[winner.bidder] = Participation::kWon;

  for (const Bid& b : participants) {
    if (b.bidder == winner.bidder) continue;
    out.participation[b.bidder] = Participation::kLost;
    out.payoffs[b.bidder] = -cfg.joining_cost;
  }
  return out;
}

std::vector<SettleEvent> settle_step(std::vector<BidderAccount>& accounts,
                                     const RoundOutcome& outcome,
                                     const AuctionConfig& cfg, long step) {
  std::vector<SettleEvent> events;
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    BidderAccount& acct = accounts[i];
    acct.reserve -= cfg.carrying_cost;
    acct.reserve += outcome.payoffs[i];
    if (outcome.winner.has_value() &&
        *outcome.winner == static_cast<int>(i)) {
      acct.occupied_until = step + outcome.duration;
    } else if (outcome.backoff_duration[i] > 0) {
      acct.occupied_until = step + outcome.backoff_duration[i];
    }
    if (acct.reserve <= 0.0) {
      events.push_back({static_cast<int>(i), cfg.bankruptcy_penalty});
      acct.reserve = cfg.initial_reserve;
      acct.occupied_until = 0;
      acct.games_bankrupted += 1;
    }
  }
  return events;
}

namespace {

Observation make_observation(const BidderAccount& acct, long step,
                             const AuctionConfig& cfg, int prev_num_bids,
                             double prev_price) {
  Observation obs;
  obs.bidder_id = acct.bidder_id;
  obs.step = step;
  obs.valuation = acct.valuation;
  obs.reserve = acct.reserve;
  obs.occupied = acct.occupied_at(step);
  obs.num_bidders = cfg.num_bidders;
  obs.prev_num_bids = prev_num_bids;
  obs.prev_price = prev_price;
  return obs;
}

}  // namespace

EpisodeLog run_episode(const std::vector<Agent*>& agents,
                       std::vector<BidderAccount>& accounts,
                       const AuctionConfig& cfg,
                       rewards::ExtrinsicKind signal_kind, rng::Stream& rng,
                       const StepHook& on_step) {
  cfg.validate();
  const int n = cfg.num_bidders;
  if (static_cast<int>(agents.size()) != n ||
      static_cast<int>(accounts.size()) != n) {
    throw std::invalid_argument("run_episode: roster size mismatch");
  }

  EpisodeLog log;
  log.rows.reserve(static_cast<std::size_t>(cfg.episode_length) * n);
  rewards::PaymentLedger ledger(n);
  int prev_num_bids = 0;
  double prev_price = 0.0;

  for (long step = 0; step < cfg.episode_length; ++step) {
    std::map<int, BidAction> actions;
    try {
      for (int i = 0; i < n; ++i) {
        if (accounts[i].occupied_at(step)) continue;
        const Observation obs =
            make_observation(accounts[i], step, cfg, prev_num_bids, prev_price);
        actions[i] = agents[i]->act(obs);
      }
    } catch (const std::exception& e) {
      log.aborted = true;
      log.diagnostic = std::string("agent failure during act at step ") +
                       std::to_string(step) + ": " + e.what();
      return log;
    }

    RoundOutcome outcome = run_round(actions, accounts, cfg, rng);
    const std::vector<SettleEvent> events =
        settle_step(accounts, outcome, cfg, step);

    std::vector<double> step_payoffs(n, 0.0);
    std::vector<double> step_payments(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double payoff = outcome.payoffs[i];
      for (const SettleEvent& ev : events) {
        if (ev.bidder_id == i) payoff -= ev.penalty;
      }
      step_payoffs[i] = payoff;
      if (outcome.winner.has_value() && *outcome.winner == i) {
        step_payments[i] = outcome.final_price;
      }

      LogRow row;
      row.step = step;
      row.bidder_id = i;
      row.action = outcome.used_actions[i];
      row.participation = outcome.participation[i];
      row.payoff = payoff;
      row.price = outcome.final_price;
      row.reserve_after = accounts[i].reserve;
      row.occupied_until = accounts[i].occupied_until;
      log.rows.push_back(row);
    }
    ledger.push_step(step_payments, step_payoffs);
    if (cfg.game_kind == GameKind::kSpForward && outcome.winner.has_value()) {
      log.broker_receipts += outcome.final_price;
    }

    prev_num_bids = 0;
    for (int i = 0; i < n; ++i) {
      if (outcome.participation[i] == Participation::kWon ||
          outcome.participation[i] == Participation::kLost) {
        ++prev_num_bids;
      }
    }
    prev_price = outcome.final_price;

    try {
      for (int i = 0; i < n; ++i) {
        StepFeedback fb;
        fb.step = step;
        fb.participation = outcome.participation[i];
        fb.acted = outcome.participation[i] != Participation::kOccupied;
        fb.payoff = step_payoffs[i];
        fb.price = outcome.final_price;
        for (const SettleEvent& ev : events) {
          if (ev.bidder_id == i) fb.bankrupted = true;
        }
        fb.next_obs = make_observation(accounts[i], step + 1, cfg,
                                       prev_num_bids, prev_price);
        agents[i]->feedback(fb);
      }
    } catch (const std::exception& e) {
      log.aborted = true;
      log.diagnostic = std::string("agent failure during feedback at step ") +
                       std::to_string(step) + ": " + e.what();
      return log;
    }

    if (on_step) on_step(step, log);
  }

  log.extrinsic.resize(n);
  try {
    for (int i = 0; i < n; ++i) {
      log.extrinsic[i] = rewards::extrinsic_signal(signal_kind, ledger, i);
      agents[i]->episode_end(log.extrinsic[i]);
    }
  } catch (const std::exception& e) {
    log.aborted = true;
    log.diagnostic = std::string("agent failure at episode end: ") + e.what();
    return log;
  }

  // Everyone restarts the next game from the same initial reserve.
  for (int i = 0; i < n; ++i) {
    accounts[i].reserve = cfg.initial_reserve;
    accounts[i].occupied_until = 0;
  }
  return log;
}

std::string EpisodeLog::to_jsonl() const {
  std::string out;
  for (const LogRow& row : rows) {
    nlohmann::ordered_json j;
    j["step"] = row.step;
    j["bidder_id"] = row.bidder_id;
    if (row.action.has_value()) {
      j["action"] = {{"alpha", row.action->alpha}, {"bid", row.action->bid}};
    } else {
      j["action"] = nullptr;
    }
    j["participation"] = to_string(row.participation);
    j["payoff"] = row.payoff;
    j["price"] = row.price;
    j["reserve_after"] = row.reserve_after;
    j["occupied_until"] = row.occupied_until;
    out += j.dump();
    out += '\n';
  }
  return out;
}

double max_conservation_error(const EpisodeLog& log,
                              const AuctionConfig& cfg) {
  std::vector<double> reserve(cfg.num_bidders, cfg.initial_reserve);
  double worst = 0.0;
  for (const LogRow& row : log.rows) {
    const int i = row.bidder_id;
    const double candidate = reserve[i] - cfg.carrying_cost + row.payoff;
    if (std::abs(candidate - row.reserve_after) <= 1e-9) {
      reserve[i] = row.reserve_after;
      continue;
    }
    // Bankruptcy: payoff already carries -penalty, the reserve was reset.
    const double pre_penalty = candidate + cfg.bankruptcy_penalty;
    double err = std::abs(row.reserve_after - cfg.initial_reserve);
    if (pre_penalty > 1e-9) err = std::max(err, pre_penalty);
    worst = std::max(worst, err);
    reserve[i] = row.reserve_after;
  }
  return worst;
}

}  // namespace arena::engine
