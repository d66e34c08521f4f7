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

#ifndef ARENA_ACTOR_CRITIC_HPP_
#define ARENA_ACTOR_CRITIC_HPP_

#include <optional>
#include <string>
#include <vector>

#include "arena/nn.hpp"
#include "arena/rng.hpp"

// Average-reward actor-critic: a state-value critic with differential TD
// error and a Gaussian policy whose covariance is carried as its Cholesky
// factor. Both function approximators share the trunk structure: a stacked
// temporal CNN with highway for window inputs, a dense highway stem for
// flat feature vectors.

namespace arena::ac {

inline constexpr double kDiagEps = 1e-4;

// Mean and lower-triangular scale factor of the action distribution.
// chol is dim x dim row-major; entries above the diagonal are zero and the
// diagonal is strictly positive.
struct GaussianPolicyHead {
  nn::Vec mu;
  nn::Vec chol;

  int dim() const { return static_cast<int>(mu.size()); }
  bool valid() const;
};

struct GaussianGrads {
  nn::Vec d_mu;     // dlogF/dmu
  nn::Vec d_sigma;  // dlogF/dSigma, dim x dim symmetric, row-major
};

// Log of the full multivariate normal density, normalizer included.
// Throws std::invalid_argument when the factor is not positive definite.
double gaussian_log_density(const nn::Vec& x, const GaussianPolicyHead& head);

// zeta = mu + L y with y iid standard normal.
nn::Vec sample_action(const GaussianPolicyHead& head, rng::Stream& rng);

// Exact score-function derivatives: dlogF/dmu = Sigma^-1 (x - mu) and
// dlogF/dSigma = 1/2 (Sigma^-1 (x-mu)(x-mu)^T Sigma^-1 - Sigma^-1).
// `paper_literal` switches to the Sigma-instead-of-Sigma^-1 variant; the two
// coincide at Sigma = I.
GaussianGrads grad_log_density(const nn::Vec& x,
                               const GaussianPolicyHead& head,
                               bool paper_literal = false);

// dlogF/dL (lower triangle), the form consumed by the parameter update.
nn::Vec grad_log_density_chol(const nn::Vec& x, const GaussianPolicyHead& head,
                              bool paper_literal = false);

// delta = u - u_bar + v_next - v_now.
double td_error(double u, double u_bar, double v_next, double v_now);

// Exponential moving average: lambda * u_bar + (1 - lambda) * u.
double update_average_reward(double u_bar, double u, double lambda);

struct ACConfig {
  double gamma_w = 1e-3;      // critic learning rate
  double gamma_theta = 1e-4;  // actor learning rate
  double lambda = 0.99;       // average-reward smoothing
  std::vector<int> filter_widths{2, 3, 4};
  int channels = 32;
  int dense_hidden = 96;
  bool paper_literal_gradients = false;
  // Initial bias of the actor's output head (mu..., then the row-major
  // lower-triangle entries of L, diagonals pre-softplus). Empty keeps zeros.
  std::vector<double> actor_bias_init;
};

// A trunk plus linear head that accepts either a (steps x feat) window or a
// flat feature vector, fixed at construction.
struct TrunkNet {
  bool window_mode = false;
  nn::ConvTrunk conv;
  nn::DenseTrunk dense;
  nn::Linear head;

  struct Trace {
    nn::ConvTrunk::Trace conv;
    nn::DenseTrunk::Trace dense;
    nn::Vec trunk_out;
  };

  void init_window(int steps, int feat, int out, const ACConfig& cfg,
                   rng::Stream& rng);
  void init_vector(int in, int out, const ACConfig& cfg, rng::Stream& rng);
  nn::Vec forward(const nn::Vec& x, Trace* trace = nullptr) const;
  void backward(const Trace& trace, const nn::Vec& dy);
  void collect(nn::ParamRefs& refs);
};

// One bidder's critic + actor pair.
class ActorCritic {
 public:
  // Window-input variant (short-term agent).
  ActorCritic(int window_steps, int feat, int action_dim, const ACConfig& cfg,
              rng::Stream& rng);
  // Flat-vector variant (feature-vector input from the curiosity model).
  ActorCritic(int input_dim, int action_dim, const ACConfig& cfg,
              rng::Stream& rng);

  double critic_value(const nn::Vec& input) const;
  GaussianPolicyHead policy(const nn::Vec& input) const;
  nn::Vec sample(const nn::Vec& input, rng::Stream& rng) const;

  struct UpdateResult {
    double delta = 0.0;
    double u_bar = 0.0;
    nn::Vec zeta_next;     // sampled best response for the next step
    bool aborted = false;  // NaN encountered; parameters untouched
  };

  // One iteration: critic on both states, average-reward update, TD error,
  // critic ascent along delta * grad V, actor ascent along
  // delta * grad log pi(action_taken | s_now), then a fresh sample at
  // s_next. A NaN anywhere aborts the update and leaves parameters alone.
  UpdateResult update(const nn::Vec& s_now, const nn::Vec& s_next,
                      double reward, const nn::Vec& action_taken,
                      rng::Stream& rng);

  double average_reward() const { return u_bar_; }
  void set_average_reward(double v) { u_bar_ = v; }
  int aborted_updates() const { return aborted_updates_; }
  const std::string& last_abort() const { return last_abort_; }
  const ACConfig& config() const { return cfg_; }

  nn::ParamRefs critic_params();
  nn::ParamRefs actor_params();

 private:
  GaussianPolicyHead head_from_raw(const nn::Vec& raw) const;
  nn::Vec head_backward_seed(const nn::Vec& raw, const nn::Vec& d_mu,
                             const nn::Vec& d_chol) const;

  ACConfig cfg_;
  int action_dim_ = 2;
  TrunkNet critic_;
  TrunkNet actor_;
  double u_bar_ = 0.0;
  int aborted_updates_ = 0;
  std::string last_abort_;
};

}  // namespace arena::ac

#endif  // ARENA_ACTOR_CRITIC_HPP_
