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

#include "arena/agent_fsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace arena::fsp {

const char* to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kSht: return "SHT";
    case AgentKind::kCur: return "CUR";
    case AgentKind::kDra: return "DRA";
  }
  return "?";
}

std::optional<AgentKind> agent_kind_from(const std::string& name) {
  if (name == "SHT") return AgentKind::kSht;
  if (name == "CUR") return AgentKind::kCur;
  if (name == "DRA") return AgentKind::kDra;
  return std::nullopt;
}

nn::Vec build_state(const std::deque<RLRecord>& memory, int nu) {
  nn::Vec window(static_cast<std::size_t>(nu) * RLRecord::kDim, 0.0);
  const int have = std::min<int>(nu, static_cast<int>(memory.size()));
  const int pad = nu - have;
  for (int i = 0; i < have; ++i) {
    const RLRecord& rec = memory[memory.size() - have + i];
    for (int f = 0; f < RLRecord::kDim; ++f) {
      window[static_cast<std::size_t>(pad + i) * RLRecord::kDim + f] =
          rec.f[f];
    }
  }
  return window;
}

MixChoice choose_action(const engine::BidAction& psi,
                        const engine::BidAction& zeta, double eta,
                        bool convex_mixture, rng::Stream& rng) {
  if (convex_mixture) {
    engine::BidAction blended;
    blended.alpha = (1.0 - eta) * psi.alpha + eta * zeta.alpha;
    blended.bid = (1.0 - eta) * psi.bid + eta * zeta.bid;
    return {blended, false};
  }
  if (rng.uniform() < eta) return {zeta, true};
  return {psi, false};
}

FspAgent::FspAgent(AgentKind agent_kind, const FspConfig& cfg,
                   const engine::AuctionConfig& auction, std::uint64_t seed)
    : kind_(agent_kind),
      cfg_(cfg),
      money_scale_(auction.initial_reserve),
      bid_floor_(auction.bid_floor),
      rng_(seed) {
  std::vector<int> sl_sizes{SLRecord::kDim};
  for (int h : cfg_.sl_hidden) sl_sizes.push_back(h);
  sl_sizes.push_back(2);
  sl_net_.init(sl_sizes, rng_);
  sl_net_.layers.back().b.value = {cfg_.sl_bias_init[0], cfg_.sl_bias_init[1]};
  sl_opt_.lr = cfg_.sl_lr;

  ac::ACConfig ac_cfg = cfg_.ac;
  if (ac_cfg.actor_bias_init.empty()) {
    ac_cfg.actor_bias_init = cfg_.actor_bias_init;
  }

  const int window_feat = RLRecord::kDim;
  if (kind_ == AgentKind::kSht) {
    ac_ = std::make_unique<ac::ActorCritic>(cfg_.window, window_feat, 2,
                                            ac_cfg, rng_);
  } else {
    curiosity::CuriosityConfig cur_cfg = cfg_.curiosity;
    curiosity_ = std::make_unique<curiosity::CuriosityModel>(
        cfg_.window, window_feat, 2, cur_cfg, rng_);
    ac_ = std::make_unique<ac::ActorCritic>(cur_cfg.feature_dim, 2, ac_cfg,
                                            rng_);
    if (kind_ == AgentKind::kDra) {
      credit::CreditConfig credit_cfg = cfg_.credit;
      credit_cfg.window = cfg_.window;
      credit_cfg.feature_dim = cur_cfg.feature_dim;
      credit_ = std::make_unique<credit::CreditAssignment>(credit_cfg, rng_);
    }
  }
}

RLRecord FspAgent::make_record(const engine::Observation& obs,
                               double u_prev) const {
  // Money features saturate at ten reserves so windfall rounds cannot blow
  // up the network inputs.
  const auto money = [&](double x) {
    return std::clamp(x / money_scale_, -10.0, 10.0);
  };
  RLRecord rec;
  rec.step = obs.step;
  rec.f[0] = money(obs.valuation);
  rec.f[1] = money(obs.reserve);
  rec.f[2] = obs.occupied ? 1.0 : 0.0;
  rec.f[3] = obs.num_bidders / 10.0;
  rec.f[4] = obs.prev_num_bids / 10.0;
  rec.f[5] = money(obs.prev_price);
  rec.f[6] = money(obs.prev_price);  // other bidders' state P_-m
  rec.f[7] = money(u_prev);
  return rec;
}

void FspAgent::refresh_tip(const engine::Observation& obs) {
  if (rl_memory_.empty()) {
    rl_memory_.push_back(make_record(obs, last_payoff_));
    return;
  }
  if (rl_memory_.back().step != obs.step) {
    // The bidder sat out some rounds; bring the present-state tip up to
    // date instead of growing the memory.
    rl_memory_.back() = make_record(obs, last_payoff_);
  }
}

nn::Vec FspAgent::rl_input(const nn::Vec& window) {
  if (kind_ == AgentKind::kSht) return window;
  return curiosity_->feature_extract(window);
}

double FspAgent::credit_weight_now() {
  // The plain curiosity agent keeps the original exploration-only reward
  // r_i = xi * L_f; only the credit-assignment agent blends payoffs in.
  if (kind_ == AgentKind::kCur) return 0.0;
  std::vector<nn::Vec> features(phi_window_.begin(), phi_window_.end());
  while (static_cast<int>(features.size()) < cfg_.window) {
    features.insert(features.begin(),
                    nn::Vec(cfg_.curiosity.feature_dim, 0.0));
  }
  const credit::CreditWeights w = credit_->infer(features);
  return credit::credit_for_step(w, cfg_.window - 1);
}

engine::BidAction FspAgent::sl_predict(
    const std::array<double, SLRecord::kDim>& state) const {
  const nn::Vec out =
      sl_net_.forward(nn::Vec(state.begin(), state.end()));
  return {out[0], out[1]};
}

double FspAgent::sl_update() {
  if (sl_memory_.empty()) return 0.0;
  nn::ParamRefs refs;
  sl_net_.collect(refs);
  nn::zero_grads(refs);
  const int batch =
      std::min<int>(cfg_.sl_batch, static_cast<int>(sl_memory_.size()));
  double loss = 0.0;
  for (int b = 0; b < batch; ++b) {
    const SLRecord& rec =
        sl_memory_[rng_.uniform_int(0, static_cast<int>(sl_memory_.size()) - 1)];
    nn::MLP::Trace trace;
    const nn::Vec out =
        sl_net_.forward(nn::Vec(rec.state.begin(), rec.state.end()), &trace);
    nn::Vec dy(2);
    for (int i = 0; i < 2; ++i) {
      const double e = out[i] - rec.action[i];
      loss += e * e;
      dy[i] = 2.0 * e / batch;
    }
    sl_net_.backward(trace, dy);
  }
  sl_opt_.step(refs);
  return loss / batch;
}

engine::BidAction FspAgent::act(const engine::Observation& obs) {
  refresh_tip(obs);
  const nn::Vec window = build_state(rl_memory_, cfg_.window);

  for (int f = 0; f < SLRecord::kDim; ++f) {
    pending_sl_state_[f] = rl_memory_.back().f[f];
  }
  const engine::BidAction psi = sl_predict(pending_sl_state_);

  if (!zeta_next_.has_value()) {
    zeta_next_ = ac_->sample(rl_input(window), rng_);
  }
  const engine::BidAction zeta{(*zeta_next_)[0], (*zeta_next_)[1]};

  const MixChoice choice =
      choose_action(psi, zeta, schedule_.eta(), cfg_.convex_mixture, rng_);

  pending_raw_action_ = {choice.action.alpha, choice.action.bid};
  engine::BidAction env_action;
  env_action.alpha = std::clamp(choice.action.alpha, 0.0, 1.0);
  env_action.bid =
      std::clamp(choice.action.bid, std::min(bid_floor_, obs.reserve),
                 std::max(obs.reserve, 0.0));
  pending_env_action_ = env_action;
  awaiting_feedback_ = true;
  return env_action;
}

void FspAgent::feedback(const engine::StepFeedback& fb) {
  if (!fb.acted) return;
  if (!awaiting_feedback_) return;
  awaiting_feedback_ = false;

  const double payoff = fb.payoff;
  // Learners consume reserve-scaled, clipped rewards; logs keep raw money.
  const double payoff_norm =
      std::clamp(payoff / money_scale_, -10.0, 10.0);
  const nn::Vec window_now = build_state(rl_memory_, cfg_.window);

  rl_memory_.push_back(make_record(fb.next_obs, payoff));
  while (rl_memory_.size() > cfg_.memory_capacity) rl_memory_.pop_front();
  const nn::Vec window_next = build_state(rl_memory_, cfg_.window);

  SLRecord sl_rec;
  sl_rec.state = pending_sl_state_;
  sl_rec.action = {pending_env_action_.alpha, pending_env_action_.bid};
  sl_memory_.push_back(sl_rec);
  while (sl_memory_.size() > cfg_.memory_capacity) sl_memory_.pop_front();

  metrics_ = StepMetrics{};
  double reward = payoff_norm;
  nn::Vec ac_now = window_now;
  nn::Vec ac_next = window_next;

  if (kind_ != AgentKind::kSht) {
    const nn::Vec phi_now = curiosity_->feature_extract(window_now);
    phi_window_.push_back(phi_now);
    while (static_cast<int>(phi_window_.size()) > cfg_.window) {
      phi_window_.pop_front();
    }
    const double eps_t = credit_weight_now();

    const nn::Vec action_norm{pending_env_action_.alpha,
                              pending_env_action_.bid / money_scale_};
    const curiosity::CuriosityModel::StepResult cur = curiosity_->step(
        window_now, window_next, action_norm, payoff_norm, eps_t);
    reward = cur.r_i;
    metrics_.intrinsic_reward = cur.r_i;
    metrics_.forward_loss = cur.forward_loss;
    metrics_.inverse_loss = cur.inverse_loss;
    metrics_.epsilon_last = eps_t;

    // The actor and critic consume the feature vector, not the raw window.
    ac_now = cur.phi_now;
    ac_next = cur.phi_next;

    if (kind_ == AgentKind::kDra) {
      state_windows_.push_back(window_now);
      while (static_cast<int>(state_windows_.size()) > cfg_.window) {
        state_windows_.pop_front();
      }
      payoff_window_.push_back(payoff_norm);
      while (static_cast<int>(payoff_window_.size()) > cfg_.window) {
        payoff_window_.pop_front();
      }
    }
  }

  const ac::ActorCritic::UpdateResult upd =
      ac_->update(ac_now, ac_next, reward, pending_raw_action_, rng_);
  zeta_next_ = upd.zeta_next;
  metrics_.td_delta = upd.delta;
  metrics_.sl_loss = sl_update();

  last_payoff_ = payoff;
  schedule_.advance();
}

void FspAgent::episode_end(double extrinsic) {
  if (kind_ != AgentKind::kDra || credit_ == nullptr) return;
  credit_->signal_arrived(extrinsic);

  credit::CreditBatch batch;
  batch.features.reserve(cfg_.window);
  const int have = static_cast<int>(state_windows_.size());
  for (int i = 0; i < cfg_.window - have; ++i) {
    batch.features.push_back(nn::Vec(cfg_.curiosity.feature_dim, 0.0));
  }
  for (const nn::Vec& w : state_windows_) {
    batch.features.push_back(curiosity_->feature_extract(w));
  }
  batch.targets.assign(cfg_.window + 1, 0.0);
  const int have_u = static_cast<int>(payoff_window_.size());
  for (int i = 0; i < have_u; ++i) {
    batch.targets[cfg_.window - have_u + i] = payoff_window_[i];
  }
  batch.targets.back() =
      std::clamp(extrinsic / money_scale_, -10.0, 10.0);

  const std::optional<double> loss =
      credit_->train(batch, cfg_.credit_epochs);
  if (loss.has_value()) last_credit_loss_ = *loss;
}

long FspAgent::credit_training_runs() const {
  return credit_ == nullptr ? 0 : credit_->training_runs();
}

namespace {

nlohmann::json params_to_json(const nn::ParamRefs& refs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const nn::Param* p : refs) arr.push_back(p->value);
  return arr;
}

void params_from_json(const nlohmann::json& arr, const nn::ParamRefs& refs) {
  if (arr.size() != refs.size()) {
    throw std::invalid_argument("checkpoint: parameter block count mismatch");
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    std::vector<double> v = arr[i].get<std::vector<double>>();
    if (v.size() != refs[i]->value.size()) {
      throw std::invalid_argument("checkpoint: parameter size mismatch");
    }
    refs[i]->value = std::move(v);
  }
}

}  // namespace

std::string FspAgent::checkpoint(bool include_memories) const {
  nlohmann::json j;
  j["version"] = 1;
  j["kind"] = to_string(kind_);
  j["t"] = schedule_.t;
  j["u_bar"] = ac_->average_reward();
  nn::ParamRefs sl;
  const_cast<nn::MLP&>(sl_net_).collect(sl);
  j["sl"] = params_to_json(sl);
  j["critic"] = params_to_json(const_cast<FspAgent*>(this)->ac_->critic_params());
  j["actor"] = params_to_json(const_cast<FspAgent*>(this)->ac_->actor_params());
  if (curiosity_ != nullptr) j["curiosity"] = params_to_json(curiosity_->params());
  if (credit_ != nullptr) j["credit"] = params_to_json(credit_->params());
  if (include_memories) {
    nlohmann::json sl_mem = nlohmann::json::array();
    for (const SLRecord& rec : sl_memory_) {
      sl_mem.push_back({{"state", rec.state}, {"action", rec.action}});
    }
    j["sl_memory"] = sl_mem;
    nlohmann::json rl_mem = nlohmann::json::array();
    for (const RLRecord& rec : rl_memory_) {
      rl_mem.push_back({{"f", rec.f}, {"step", rec.step}});
    }
    j["rl_memory"] = rl_mem;
  }
  return j.dump();
}

void FspAgent::restore(const std::string& blob) {
  const nlohmann::json j = nlohmann::json::parse(blob);
  if (j.at("version").get<int>() != 1) {
    throw std::invalid_argument("checkpoint: unsupported version");
  }
  if (j.at("kind").get<std::string>() != to_string(kind_)) {
    throw std::invalid_argument("checkpoint: agent kind mismatch");
  }
  schedule_.t = j.at("t").get<long>();
  ac_->set_average_reward(j.at("u_bar").get<double>());
  nn::ParamRefs sl;
  sl_net_.collect(sl);
  params_from_json(j.at("sl"), sl);
  params_from_json(j.at("critic"), ac_->critic_params());
  params_from_json(j.at("actor"), ac_->actor_params());
  if (curiosity_ != nullptr) params_from_json(j.at("curiosity"), curiosity_->params());
  if (credit_ != nullptr) params_from_json(j.at("credit"), credit_->params());
  if (j.contains("sl_memory")) {
    sl_memory_.clear();
    for (const auto& entry : j.at("sl_memory")) {
      SLRecord rec;
      rec.state = entry.at("state").get<std::array<double, SLRecord::kDim>>();
      rec.action = entry.at("action").get<std::array<double, 2>>();
      sl_memory_.push_back(rec);
    }
  }
  if (j.contains("rl_memory")) {
    rl_memory_.clear();
    for (const auto& entry : j.at("rl_memory")) {
      RLRecord rec;
      rec.f = entry.at("f").get<std::array<double, RLRecord::kDim>>();
      rec.step = entry.at("step").get<long>();
      rl_memory_.push_back(rec);
    }
  }
}

}  // namespace arena::fsp
