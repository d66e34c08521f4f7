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

#include "arena/curiosity.hpp"

#include <cassert>
#include <stdexcept>

namespace arena::curiosity {

double intrinsic_reward(double forward_loss, double credit_weight,
                        double payoff, double xi) {
  if (xi < 0.0 || xi > 1.0) {
    throw std::invalid_argument("intrinsic_reward: xi outside [0,1]");
  }
  if (credit_weight < 0.0 || credit_weight > 1.0) {
    throw std::invalid_argument("intrinsic_reward: credit weight outside [0,1]");
  }
  return xi * forward_loss + (1.0 - xi) * credit_weight * payoff;
}

CuriosityModel::CuriosityModel(int window_steps, int feat, int action_dim,
                               const CuriosityConfig& cfg, rng::Stream& rng)
    : cfg_(cfg), action_dim_(action_dim) {
  const int f = cfg.feature_dim;
  extractor_.init({window_steps * feat, cfg.hidden, f}, rng);
  extractor_.tanh_output = true;  // bounded features keep L_f well scaled
  forward_.init({f + action_dim + 1, cfg.hidden, f + 1}, rng);
  inverse_.init({2 * f, cfg.hidden, action_dim}, rng);
  opt_.lr = cfg.lr;
}

nn::Vec CuriosityModel::feature_extract(const nn::Vec& window) const {
  return extractor_.forward(window);
}

CuriosityModel::ForwardPrediction CuriosityModel::forward_predict(
    const nn::Vec& phi_t, const nn::Vec& action, double r_i_prev) const {
  nn::Vec in = phi_t;
  in.insert(in.end(), action.begin(), action.end());
  in.push_back(r_i_prev);
  nn::Vec out = forward_.forward(in);
  ForwardPrediction pred;
  pred.next_intrinsic = out.back();
  out.pop_back();
  pred.phi_next = std::move(out);
  return pred;
}

nn::Vec CuriosityModel::inverse_predict(const nn::Vec& phi_t,
                                        const nn::Vec& phi_next) const {
  nn::Vec in = phi_t;
  in.insert(in.end(), phi_next.begin(), phi_next.end());
  return inverse_.forward(in);
}

CuriosityModel::StepResult CuriosityModel::step(const nn::Vec& window_now,
                                                const nn::Vec& window_next,
                                                const nn::Vec& action,
                                                double payoff,
                                                double credit_weight) {
  assert(static_cast<int>(action.size()) == action_dim_);
  const int f = cfg_.feature_dim;

  nn::MLP::Trace ext_now, ext_next;
  const nn::Vec phi_now = extractor_.forward(window_now, &ext_now);
  const nn::Vec phi_next = extractor_.forward(window_next, &ext_next);

  nn::Vec fwd_in = phi_now;
  fwd_in.insert(fwd_in.end(), action.begin(), action.end());
  fwd_in.push_back(prev_r_i_);
  nn::MLP::Trace fwd_trace;
  const nn::Vec fwd_out = forward_.forward(fwd_in, &fwd_trace);

  nn::Vec inv_in = phi_now;
  inv_in.insert(inv_in.end(), phi_next.begin(), phi_next.end());
  nn::MLP::Trace inv_trace;
  const nn::Vec inv_out = inverse_.forward(inv_in, &inv_trace);

  double state_loss = 0.0;
  for (int i = 0; i < f; ++i) {
    const double e = phi_next[i] - fwd_out[i];
    state_loss += e * e;
  }
  double inverse_loss = 0.0;
  for (int i = 0; i < action_dim_; ++i) {
    const double e = action[i] - inv_out[i];
    inverse_loss += e * e;
  }

  // The exploration bonus is the feature-prediction error; the realized
  // intrinsic reward then becomes the target of the reward head.
  const double r_i =
      intrinsic_reward(state_loss, credit_weight, payoff, cfg_.xi);
  const double reward_pred = fwd_out.back();
  const double reward_loss = (reward_pred - r_i) * (reward_pred - r_i);

  // Joint gradient step on L_i + L_f + reward error. The feature target of
  // the forward loss is held fixed; the extractor learns through the
  // inverse model and through the forward model's input.
  nn::ParamRefs refs = params();
  nn::zero_grads(refs);

  nn::Vec d_fwd_out(f + 1, 0.0);
  for (int i = 0; i < f; ++i) d_fwd_out[i] = 2.0 * (fwd_out[i] - phi_next[i]);
  d_fwd_out.back() = 2.0 * (reward_pred - r_i);
  nn::Vec d_fwd_in = forward_.backward(fwd_trace, d_fwd_out);
  nn::Vec d_phi_now(d_fwd_in.begin(), d_fwd_in.begin() + f);

  nn::Vec d_inv_out(action_dim_);
  for (int i = 0; i < action_dim_; ++i) {
    d_inv_out[i] = 2.0 * (inv_out[i] - action[i]);
  }
  const nn::Vec d_inv_in = inverse_.backward(inv_trace, d_inv_out);
  nn::Vec d_phi_next(f, 0.0);
  for (int i = 0; i < f; ++i) {
    d_phi_now[i] += d_inv_in[i];
    d_phi_next[i] = d_inv_in[f + i];
  }

  extractor_.backward(ext_now, d_phi_now);
  extractor_.backward(ext_next, d_phi_next);
  opt_.step(refs);

  StepResult res;
  res.forward_loss = state_loss;
  res.reward_loss = reward_loss;
  res.inverse_loss = inverse_loss;
  res.r_i = r_i;
  res.phi_now = phi_now;
  res.phi_next = phi_next;

  prev_r_i_ = r_i;
  return res;
}

void CuriosityModel::reset_stream() { prev_r_i_ = 0.0; }

nn::ParamRefs CuriosityModel::params() {
  nn::ParamRefs refs;
  extractor_.collect(refs);
  forward_.collect(refs);
  inverse_.collect(refs);
  return refs;
}

}  // namespace arena::curiosity
