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

#ifndef ARENA_AUCTION_ENGINE_HPP_
#define ARENA_AUCTION_ENGINE_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arena/reward_signals.hpp"
#include "arena/rng.hpp"

namespace arena::engine {

enum class GameKind { kFpReverse, kSpForward };

// One round per step, one commodity per round. The winner of a first-price
// reverse round is paid its own bid times the bid-dependent duration; the
// winner of a second-price forward round pays the second-highest bid and
// nets (b - p) * d for a constant duration.
struct AuctionConfig {
  GameKind game_kind = GameKind::kFpReverse;
  int num_bidders = 6;
  int episode_length = 150;        // T
  double joining_cost = 0.1;       // c, paid by losing participants
  double backoff_cost = 0.05;      // q, paid when sitting a round out
  double carrying_cost = 0.1;      // drained from every reserve each step
  double initial_reserve = 20.0;
  double bankruptcy_penalty = 5.0;
  int sp_duration = 2;             // d in the second-price game
  double fp_duration_base = 1.0;   // d0
  double fp_duration_slope = 0.5;  // kappa
  double backoff_threshold = 0.5;  // in (0,1)
  double backoff_scale = 4.0;
  double bid_floor = 0.0;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct BidderAccount {
  int bidder_id = 0;
  double reserve = 0.0;
  long occupied_until = 0;  // exclusive: free again once step >= occupied_until
  double valuation = 1.0;   // private, > 0
  int games_bankrupted = 0;

  bool occupied_at(long step) const { return step < occupied_until; }
};

struct BidAction {
  double alpha = 0.0;  // backoff decision, clamped to [0,1] before use
  double bid = 0.0;    // clamped to [bid_floor, reserve] before use
};

enum class Participation { kWon, kLost, kBackedOff, kOccupied };

const char* to_string(Participation p);

struct BackoffDecision {
  bool participate = false;
  int duration = 0;  // steps sat out, >= 1 when not participating
};

// Participate iff alpha is strictly above the threshold; otherwise back off
// for max(1, ceil(backoff_scale * alpha)) steps.
BackoffDecision resolve_backoff(double alpha, const AuctionConfig& cfg);

// Service duration granted for a first-price bid: max(1, round(d0 + k*b)).
int fp_duration(double bid, const AuctionConfig& cfg);

// Buyer's score for a first-price reverse bid: d / b. A non-positive bid is
// degenerate and yields no score (the bidder loses the round).
std::optional<double> fp_score(double bid, int duration);

struct RoundOutcome {
  std::optional<int> winner;
  double final_price = 0.0;
  int duration = 0;  // winner's service duration, 0 when no winner
  std::vector<double> payoffs;               // per bidder, 0 for occupied
  std::vector<Participation> participation;  // per bidder
  std::vector<int> backoff_duration;         // per bidder, 0 if none
  std::vector<std::optional<BidAction>> used_actions;  // post-clamp
  std::vector<bool> bid_clamped;  // true when a bid exceeded the reserve
};

// Resolves one round. `actions` holds the raw actions of the free bidders;
// occupied bidders must not appear in it. Ties are broken uniformly at
// random. Bids outside [bid_floor, reserve] are clamped and flagged.
RoundOutcome run_round(const std::map<int, BidAction>& actions,
                       const std::vector<BidderAccount>& accounts,
                       const AuctionConfig& cfg, rng::Stream& rng);

struct SettleEvent {
  int bidder_id = 0;
  double penalty = 0.0;  // bankruptcy penalty charged this step
};

// Applies carrying costs and round payoffs, sets the winner's occupation,
// and handles bankruptcy (penalty, reset to the initial reserve, occupation
// cleared). Returns one event per bankruptcy.
std::vector<SettleEvent> settle_step(std::vector<BidderAccount>& accounts,
                                     const RoundOutcome& outcome,
                                     const AuctionConfig& cfg, long step);

// What a free bidder sees before acting.
struct Observation {
  int bidder_id = 0;
  long step = 0;
  double valuation = 0.0;
  double reserve = 0.0;
  bool occupied = false;
  int num_bidders = 0;
  int prev_num_bids = 0;    // bids submitted in the previous round
  double prev_price = 0.0;  // final price of the previous round
};

struct StepFeedback {
  long step = 0;
  Participation participation = Participation::kOccupied;
  bool acted = false;
  double payoff = 0.0;  // round payoff, minus the penalty when bankrupted
  double price = 0.0;
  bool bankrupted = false;
  Observation next_obs;  // post-settlement view for the next decision
};

class Agent {
 public:
  virtual ~Agent() = default;
  // Called only when the bidder is free this step.
  virtual BidAction act(const Observation& obs) = 0;
  // Called for every bidder after settlement, acted or not.
  virtual void feedback(const StepFeedback& fb) = 0;
  // Called once per episode with the extrinsic signal.
  virtual void episode_end(double extrinsic) = 0;
  virtual std::string kind() const = 0;
};

struct LogRow {
  long step = 0;
  int bidder_id = 0;
  std::optional<BidAction> action;
  Participation participation = Participation::kOccupied;
  double payoff = 0.0;  // includes -bankruptcy_penalty when reset this step
  double price = 0.0;
  double reserve_after = 0.0;
  long occupied_until = 0;
};

struct EpisodeLog {
  std::vector<LogRow> rows;          // episode_length * num_bidders rows
  std::vector<double> extrinsic;     // per-bidder signal emitted at the end
  double broker_receipts = 0.0;      // total second prices collected (SP)
  bool aborted = false;
  std::string diagnostic;

  std::string to_jsonl() const;  // one JSON record per row
};

// Observer invoked after each settled step with the rows logged so far.
using StepHook = std::function<void(long step, const EpisodeLog& so_far)>;

// Runs T steps of run_round + settle_step, emits the extrinsic signal to
// each agent, then restarts all accounts at the initial reserve. An agent
// exception aborts the episode and is captured in the diagnostic.
EpisodeLog run_episode(const std::vector<Agent*>& agents,
                       std::vector<BidderAccount>& accounts,
                       const AuctionConfig& cfg,
                       rewards::ExtrinsicKind signal_kind, rng::Stream& rng,
                       const StepHook& on_step = {});

// Replays the log's accounting. Returns the largest absolute mismatch
// between the reconstructed reserve and reserve_after over all rows.
double max_conservation_error(const EpisodeLog& log, const AuctionConfig& cfg);

}  // namespace arena::engine

#endif  // ARENA_AUCTION_ENGINE_HPP_
