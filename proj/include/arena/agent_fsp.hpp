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

#ifndef ARENA_AGENT_FSP_HPP_
#define ARENA_AGENT_FSP_HPP_

#include <array>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arena/actor_critic.hpp"
#include "arena/auction_engine.hpp"
#include "arena/credit_assignment.hpp"
#include "arena/curiosity.hpp"
#include "arena/nn.hpp"
#include "arena/rng.hpp"

// Fictitious self-play wrapper: a supervised model replays the bidder's own
// past actions (behavioral strategy psi), the RL stack proposes a best
// response zeta, and the played action mixes the two with probability
// eta = 1/t. Three agent flavors share the wrapper:
//   SHT - actor-critic on the raw window and raw payoff,
//   CUR - curiosity features, exploration-only reward xi * L_f,
//   DRA - curiosity plus attention credit: xi L_f + (1-xi) eps u.

namespace arena::fsp {

enum class AgentKind { kSht, kCur, kDra };

const char* to_string(AgentKind kind);
std::optional<AgentKind> agent_kind_from(const std::string& name);

// RL present-state record. Fixed feature order, everything pre-scaled:
//   0 valuation / money   1 reserve / money     2 occupied flag
//   3 num_bidders / 10    4 prev_num_bids / 10  5 prev_price / money
//   6 p_minus / money     7 u_prev / money
struct RLRecord {
  static constexpr int kDim = 8;
  std::array<double, kDim> f{};
  long step = -1;
};

// Supervised pair: the state the bidder acted from and the action played.
struct SLRecord {
  static constexpr int kDim = 6;  // RLRecord features 0..5
  std::array<double, kDim> state{};
  std::array<double, 2> action{};  // alpha, bid (environment units)
};

struct MixSchedule {
  long t = 1;
  double eta() const { return 1.0 / static_cast<double>(t); }
  void advance() { ++t; }
};

struct FspConfig {
  int window = 8;  // nu
  std::vector<int> sl_hidden{64, 64};
  double sl_lr = 1e-3;
  int sl_batch = 32;
  std::size_t memory_capacity = 10000;
  bool convex_mixture = false;  // blend actions instead of picking one
  int credit_epochs = 15;
  // Starting point of the policy head (alpha mean, bid mean, then the
  // pre-softplus scale entries) and of the behavioral regression. Leaning
  // towards participation keeps the early action stream informative.
  std::vector<double> actor_bias_init{0.8, 2.0, -1.05, 0.0, 0.54};
  std::array<double, 2> sl_bias_init{0.8, 2.0};
  ac::ACConfig ac;
  curiosity::CuriosityConfig curiosity;
  credit::CreditConfig credit;
};

// Last nu records flattened row-major (oldest first), zero-padded on the
// left while fewer than nu exist.
nn::Vec build_state(const std::deque<RLRecord>& memory, int nu);

struct MixChoice {
  engine::BidAction action;
  bool used_best_response = false;
};

// With probability eta play zeta, otherwise psi. The convex variant returns
// (1-eta) psi + eta zeta deterministically.
MixChoice choose_action(const engine::BidAction& psi,
                        const engine::BidAction& zeta, double eta,
                        bool convex_mixture, rng::Stream& rng);

// Per-step introspection for the metrics stream. Curiosity fields stay
// empty for the short-term agent.
struct StepMetrics {
  std::optional<double> intrinsic_reward;
  std::optional<double> forward_loss;
  std::optional<double> inverse_loss;
  std::optional<double> epsilon_last;
  double sl_loss = 0.0;
  double td_delta = 0.0;
};

class FspAgent : public engine::Agent {
 public:
  FspAgent(AgentKind agent_kind, const FspConfig& cfg,
           const engine::AuctionConfig& auction, std::uint64_t seed);

  engine::BidAction act(const engine::Observation& obs) override;
  void feedback(const engine::StepFeedback& fb) override;
  void episode_end(double extrinsic) override;
  std::string kind() const override { return to_string(kind_); }

  AgentKind agent_kind() const { return kind_; }
  long step_count() const { return schedule_.t; }
  double eta() const { return schedule_.eta(); }
  const StepMetrics& last_metrics() const { return metrics_; }
  std::size_t rl_memory_size() const { return rl_memory_.size(); }
  std::size_t sl_memory_size() const { return sl_memory_.size(); }
  double last_credit_loss() const { return last_credit_loss_; }
  long credit_training_runs() const;

  // Behavioral-strategy regression.
  engine::BidAction sl_predict(const std::array<double, SLRecord::kDim>& state) const;
  // One minibatch MSE step over the SL memory; returns the batch loss.
  double sl_update();

  // Versioned JSON checkpoint of every parameter block plus the schedule;
  // memories travel along when requested.
  std::string checkpoint(bool include_memories = false) const;
  void restore(const std::string& blob);

 private:
  nn::Vec rl_input(const nn::Vec& window);  // window or extracted features
  RLRecord make_record(const engine::Observation& obs, double u_prev) const;
  void refresh_tip(const engine::Observation& obs);
  double credit_weight_now();

  AgentKind kind_;
  FspConfig cfg_;
  double money_scale_ = 1.0;
  double bid_floor_ = 0.0;
  MixSchedule schedule_;
  rng::Stream rng_;

  nn::MLP sl_net_;
  nn::Adam sl_opt_;
  std::deque<SLRecord> sl_memory_;
  std::deque<RLRecord> rl_memory_;

  std::unique_ptr<ac::ActorCritic> ac_;
  std::unique_ptr<curiosity::CuriosityModel> curiosity_;
  std::unique_ptr<credit::CreditAssignment> credit_;

  std::deque<nn::Vec> phi_window_;      // most recent features, DRA/CUR
  std::deque<nn::Vec> state_windows_;   // last nu windows, for credit batches
  std::deque<double> payoff_window_;    // last nu payoffs

  std::optional<nn::Vec> zeta_next_;  // pre-clamp best-response sample
  bool awaiting_feedback_ = false;
  std::array<double, SLRecord::kDim> pending_sl_state_{};
  nn::Vec pending_raw_action_;           // pre-clamp, for the score function
  engine::BidAction pending_env_action_;  // clamped, as submitted
  double last_payoff_ = 0.0;
  StepMetrics metrics_;
  double last_credit_loss_ = 0.0;
};

}  // namespace arena::fsp

#endif  // ARENA_AGENT_FSP_HPP_
