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

#include "arena/actor_critic.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace arena::ac {

namespace {

// z = L^-1 r by forward substitution.
nn::Vec forward_sub(const nn::Vec& chol, const nn::Vec& r, int k) {
  nn::Vec z(k, 0.0);
  for (int i = 0; i < k; ++i) {
    double acc = r[i];
    for (int j = 0; j < i; ++j) acc -= chol[i * k + j] * z[j];
    z[i] = acc / chol[i * k + i];
  }
  return z;
}

// y = L^-T z by back substitution.
nn::Vec back_sub(const nn::Vec& chol, const nn::Vec& z, int k) {
  nn::Vec y(k, 0.0);
  for (int i = k - 1; i >= 0; --i) {
    double acc = z[i];
    for (int j = i + 1; j < k; ++j) acc -= chol[j * k + i] * y[j];
    y[i] = acc / chol[i * k + i];
  }
  return y;
}

nn::Vec sigma_from_chol(const nn::Vec& chol, int k) {
  nn::Vec sigma(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double acc = 0.0;
      for (int m = 0; m <= std::min(i, j); ++m) {
        acc += chol[i * k + m] * chol[j * k + m];
      }
      sigma[i * k + j] = acc;
    }
  }
  return sigma;
}

nn::Vec sigma_inverse(const nn::Vec& chol, int k) {
  nn::Vec inv(static_cast<std::size_t>(k) * k, 0.0);
  for (int col = 0; col < k; ++col) {
    nn::Vec e(k, 0.0);
    e[col] = 1.0;
    const nn::Vec z = forward_sub(chol, e, k);
    const nn::Vec y = back_sub(chol, z, k);
    for (int row = 0; row < k; ++row) inv[row * k + col] = y[row];
  }
  return inv;
}

bool all_finite(const nn::Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

bool GaussianPolicyHead::valid() const {
  const int k = dim();
  if (static_cast<int>(chol.size()) != k * k) return false;
  for (int i = 0; i < k; ++i) {
    if (!(chol[i * k + i] > 0.0)) return false;
  }
  return all_finite(mu) && all_finite(chol);
}

double gaussian_log_density(const nn::Vec& x, const GaussianPolicyHead& head) {
  if (!head.valid()) {
    throw std::invalid_argument(
        "gaussian_log_density: scale factor is not positive definite");
  }
  const int k = head.dim();
  nn::Vec r(k);
  for (int i = 0; i < k; ++i) r[i] = x[i] - head.mu[i];
  const nn::Vec z = forward_sub(head.chol, r, k);
  double quad = 0.0;
  double log_det = 0.0;
  for (int i = 0; i < k; ++i) {
    quad += z[i] * z[i];
    log_det += std::log(head.chol[i * k + i]);
  }
  return -0.5 * quad - log_det - 0.5 * k * std::log(2.0 * M_PI);
}

nn::Vec sample_action(const GaussianPolicyHead& head, rng::Stream& rng) {
  const int k = head.dim();
  nn::Vec y(k);
  for (int i = 0; i < k; ++i) y[i] = rng.normal();
  nn::Vec zeta = head.mu;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) zeta[i] += head.chol[i * k + j] * y[j];
  }
  return zeta;
}

GaussianGrads grad_log_density(const nn::Vec& x,
                               const GaussianPolicyHead& head,
                               bool paper_literal) {
  if (!head.valid()) {
    throw std::invalid_argument("grad_log_density: singular scale factor");
  }
  const int k = head.dim();
  nn::Vec r(k);
  for (int i = 0; i < k; ++i) r[i] = x[i] - head.mu[i];

  GaussianGrads g;
  g.d_mu.assign(k, 0.0);
  g.d_sigma.assign(static_cast<std::size_t>(k) * k, 0.0);
  if (paper_literal) {
    const nn::Vec sigma = sigma_from_chol(head.chol, k);
    g.d_mu = nn::matvec(sigma, r, k, k);
    // 1/2 (Sigma r r^T Sigma - Sigma), with Sigma r = d_mu
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        g.d_sigma[i * k + j] =
            0.5 * (g.d_mu[i] * g.d_mu[j] - sigma[i * k + j]);
      }
    }
    return g;
  }
  const nn::Vec z = forward_sub(head.chol, r, k);
  const nn::Vec a = back_sub(head.chol, z, k);  // Sigma^-1 r
  const nn::Vec inv = sigma_inverse(head.chol, k);
  g.d_mu = a;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      g.d_sigma[i * k + j] = 0.5 * (a[i] * a[j] - inv[i * k + j]);
    }
  }
  return g;
}

nn::Vec grad_log_density_chol(const nn::Vec& x, const GaussianPolicyHead& head,
                              bool paper_literal) {
  const int k = head.dim();
  const GaussianGrads g = grad_log_density(x, head, paper_literal);
  // dL = lower(2 dSigma L) for symmetric dSigma.
  nn::Vec dl(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (int m = 0; m < k; ++m) {
        acc += g.d_sigma[i * k + m] * head.chol[m * k + j];
      }
      dl[i * k + j] = 2.0 * acc;
    }
  }
  return dl;
}

double td_error(double u, double u_bar, double v_next, double v_now) {
  return u - u_bar + v_next - v_now;
}

double update_average_reward(double u_bar, double u, double lambda) {
  return lambda * u_bar + (1.0 - lambda) * u;
}

void TrunkNet::init_window(int steps, int feat, int out, const ACConfig& cfg,
                           rng::Stream& rng) {
  window_mode = true;
  conv.init(steps, feat, cfg.channels, cfg.filter_widths, rng);
  head.init(conv.out_dim(), out, rng);
}

void TrunkNet::init_vector(int in, int out, const ACConfig& cfg,
                           rng::Stream& rng) {
  window_mode = false;
  dense.init(in, cfg.dense_hidden, rng);
  head.init(dense.out_dim(), out, rng);
}

nn::Vec TrunkNet::forward(const nn::Vec& x, Trace* trace) const {
  nn::Vec trunk_out =
      window_mode ? conv.forward(x, trace != nullptr ? &trace->conv : nullptr)
                  : dense.forward(x, trace != nullptr ? &trace->dense : nullptr);
  if (trace != nullptr) trace->trunk_out = trunk_out;
  return head.forward(trunk_out);
}

void TrunkNet::backward(const Trace& trace, const nn::Vec& dy) {
  const nn::Vec d_trunk = head.backward(trace.trunk_out, dy);
  if (window_mode) {
    conv.backward(trace.conv, d_trunk);
  } else {
    dense.backward(trace.dense, d_trunk);
  }
}

void TrunkNet::collect(nn::ParamRefs& refs) {
  if (window_mode) {
    conv.collect(refs);
  } else {
    dense.collect(refs);
  }
  head.collect(refs);
}

namespace {

int chol_param_count(int k) { return k * (k + 1) / 2; }

}  // namespace

namespace {

void apply_bias_init(TrunkNet& actor, const std::vector<double>& bias) {
  for (std::size_t i = 0; i < bias.size() && i < actor.head.b.value.size();
       ++i) {
    actor.head.b.value[i] = bias[i];
  }
}

}  // namespace

ActorCritic::ActorCritic(int window_steps, int feat, int action_dim,
                         const ACConfig& cfg, rng::Stream& rng)
    : cfg_(cfg), action_dim_(action_dim) {
  critic_.init_window(window_steps, feat, 1, cfg, rng);
  actor_.init_window(window_steps, feat, action_dim + chol_param_count(action_dim),
                     cfg, rng);
  apply_bias_init(actor_, cfg.actor_bias_init);
}

ActorCritic::ActorCritic(int input_dim, int action_dim, const ACConfig& cfg,
                         rng::Stream& rng)
    : cfg_(cfg), action_dim_(action_dim) {
  critic_.init_vector(input_dim, 1, cfg, rng);
  actor_.init_vector(input_dim, action_dim + chol_param_count(action_dim), cfg,
                     rng);
  apply_bias_init(actor_, cfg.actor_bias_init);
}

double ActorCritic::critic_value(const nn::Vec& input) const {
  return critic_.forward(input).front();
}

// Raw actor outputs are [mu..., diag and off-diagonal entries of L row by
// row]; diagonal entries pass through softplus + eps so positivity holds by
// construction.
GaussianPolicyHead ActorCritic::head_from_raw(const nn::Vec& raw) const {
  const int k = action_dim_;
  GaussianPolicyHead head;
  head.mu.assign(raw.begin(), raw.begin() + k);
  head.chol.assign(static_cast<std::size_t>(k) * k, 0.0);
  int idx = k;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j, ++idx) {
      if (i == j) {
        head.chol[i * k + j] = nn::softplus(raw[idx]) + kDiagEps;
      } else {
        head.chol[i * k + j] = raw[idx];
      }
    }
  }
  return head;
}

nn::Vec ActorCritic::head_backward_seed(const nn::Vec& raw,
                                        const nn::Vec& d_mu,
                                        const nn::Vec& d_chol) const {
  const int k = action_dim_;
  nn::Vec seed(raw.size(), 0.0);
  for (int i = 0; i < k; ++i) seed[i] = d_mu[i];
  int idx = k;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j, ++idx) {
      if (i == j) {
        seed[idx] = d_chol[i * k + j] * nn::sigmoid(raw[idx]);
      } else {
        seed[idx] = d_chol[i * k + j];
      }
    }
  }
  return seed;
}

GaussianPolicyHead ActorCritic::policy(const nn::Vec& input) const {
  return head_from_raw(actor_.forward(input));
}

nn::Vec ActorCritic::sample(const nn::Vec& input, rng::Stream& rng) const {
  return sample_action(policy(input), rng);
}

ActorCritic::UpdateResult ActorCritic::update(const nn::Vec& s_now,
                                              const nn::Vec& s_next,
                                              double reward,
                                              const nn::Vec& action_taken,
                                              rng::Stream& rng) {
  UpdateResult res;

  TrunkNet::Trace critic_trace;
  const double v_now = critic_.forward(s_now, &critic_trace).front();
  const double v_next = critic_.forward(s_next).front();
  const double u_bar = update_average_reward(u_bar_, reward, cfg_.lambda);
  const double delta = td_error(reward, u_bar, v_next, v_now);

  TrunkNet::Trace actor_trace;
  const nn::Vec raw = actor_.forward(s_now, &actor_trace);
  const GaussianPolicyHead head = head_from_raw(raw);

  if (!std::isfinite(delta) || !std::isfinite(u_bar) || !head.valid() ||
      !all_finite(action_taken)) {
    res.aborted = true;
    ++aborted_updates_;
    last_abort_ = "non-finite quantity before gradient step (delta=" +
                  std::to_string(delta) + ")";
    res.zeta_next = head.valid() ? sample_action(head, rng)
                                 : nn::Vec(action_dim_, 0.0);
    res.delta = delta;
    res.u_bar = u_bar_;
    return res;
  }

  const nn::Vec d_mu =
      grad_log_density(action_taken, head, cfg_.paper_literal_gradients).d_mu;
  const nn::Vec d_chol = grad_log_density_chol(action_taken, head,
                                               cfg_.paper_literal_gradients);
  const nn::Vec seed = head_backward_seed(raw, d_mu, d_chol);

  nn::ParamRefs critic_refs = critic_params();
  nn::ParamRefs actor_refs = actor_params();
  nn::zero_grads(critic_refs);
  nn::zero_grads(actor_refs);
  critic_.backward(critic_trace, {1.0});
  actor_.backward(actor_trace, seed);

  bool grads_finite = true;
  for (const nn::ParamRefs* refs : {&critic_refs, &actor_refs}) {
    for (nn::Param* p : *refs) {
      if (!all_finite(p->grad)) grads_finite = false;
    }
  }
  if (!grads_finite) {
    res.aborted = true;
    ++aborted_updates_;
    last_abort_ = "NaN gradient; update skipped";
    nn::zero_grads(critic_refs);
    nn::zero_grads(actor_refs);
    res.zeta_next = sample_action(head, rng);
    res.delta = delta;
    res.u_bar = u_bar_;
    return res;
  }

  nn::sgd_ascent(critic_refs, cfg_.gamma_w * delta);
  nn::sgd_ascent(actor_refs, cfg_.gamma_theta * delta);
  u_bar_ = u_bar;

  res.delta = delta;
  res.u_bar = u_bar;
  res.zeta_next = sample(s_next, rng);
  return res;
}

nn::ParamRefs ActorCritic::critic_params() {
  nn::ParamRefs refs;
  critic_.collect(refs);
  return refs;
}

nn::ParamRefs ActorCritic::actor_params() {
  nn::ParamRefs refs;
  actor_.collect(refs);
  return refs;
}

}  // namespace arena::ac
