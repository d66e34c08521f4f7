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

#ifndef ARENA_CURIOSITY_HPP_
#define ARENA_CURIOSITY_HPP_

#include "arena/nn.hpp"
#include "arena/rng.hpp"

// Forward/inverse dynamics models over learned features of the state
// window. The forward-model surprise becomes an exploration bonus that is
// blended with the credit-weighted auction payoff.

namespace arena::curiosity {

struct CuriosityConfig {
  double xi = 0.2;       // blend weight between surprise and payoff, in [0,1]
  int feature_dim = 32;  // dimension of phi
  int hidden = 64;
  double lr = 1e-3;
};

// r_i = xi * L_f + (1 - xi) * credit_weight * payoff.
double intrinsic_reward(double forward_loss, double credit_weight,
                        double payoff, double xi);

class CuriosityModel {
 public:
  // Window input is (steps x feat) flattened row-major; actions have
  // `action_dim` components.
  CuriosityModel(int window_steps, int feat, int action_dim,
                 const CuriosityConfig& cfg, rng::Stream& rng);

  // phi = feature(S); deterministic given parameters.
  nn::Vec feature_extract(const nn::Vec& window) const;

  struct ForwardPrediction {
    nn::Vec phi_next;
    double next_intrinsic = 0.0;  // the model's guess of the coming r_i
  };
  ForwardPrediction forward_predict(const nn::Vec& phi_t, const nn::Vec& action,
                                    double r_i_prev) const;

  nn::Vec inverse_predict(const nn::Vec& phi_t, const nn::Vec& phi_next) const;

  struct StepResult {
    double forward_loss = 0.0;  // feature-prediction error, feeds r_i
    double reward_loss = 0.0;   // reward-prediction error, training only
    double inverse_loss = 0.0;
    double r_i = 0.0;
    nn::Vec phi_now;
    nn::Vec phi_next;
  };

  // One learning step: extracts both feature vectors, evaluates the forward
  // and inverse losses, takes a joint Adam step on L_i + L_f plus the
  // reward-prediction error, and returns the blended intrinsic reward that
  // replaces the raw payoff downstream. The reward head's target is the
  // realized intrinsic reward of this step, so the bonus itself stays the
  // feature-prediction error and cannot feed back on itself.
  StepResult step(const nn::Vec& window_now, const nn::Vec& window_next,
                  const nn::Vec& action, double payoff, double credit_weight);

  // Clears the cross-step reward state (fresh stream).
  void reset_stream();

  double previous_intrinsic() const { return prev_r_i_; }
  const CuriosityConfig& config() const { return cfg_; }
  nn::ParamRefs params();

 private:
  CuriosityConfig cfg_;
  int action_dim_ = 2;
  nn::MLP extractor_;  // window -> phi
  nn::MLP forward_;    // [phi; action; r_i_prev] -> [phi_next; r_i]
  nn::MLP inverse_;    // [phi; phi_next] -> action
  nn::Adam opt_;

  double prev_r_i_ = 0.0;
};

}  // namespace arena::curiosity

#endif  // ARENA_CURIOSITY_HPP_
