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

#include "arena/credit_assignment.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace arena::credit {

bool is_simplex(const nn::Vec& eps, double tol) {
  double sum = 0.0;
  for (double e : eps) {
    if (!(e >= 0.0) || !std::isfinite(e)) return false;
    sum += e;
  }
  return std::abs(sum - 1.0) <= tol;
}

double credit_for_step(const CreditWeights& weights, int step_offset) {
  if (step_offset < 0 || step_offset >= static_cast<int>(weights.eps.size())) {
    throw std::out_of_range("credit_for_step: offset outside the window");
  }
  return weights.eps[step_offset];
}

CreditAssignment::CreditAssignment(const CreditConfig& cfg, rng::Stream& rng)
    : cfg_(cfg) {
  encoder_.init(cfg.feature_dim, cfg.hidden, rng);
  decoder_.init(1 + cfg.hidden, cfg.hidden, rng);  // [y_prev; context]
  att_enc_.init(cfg.hidden, cfg.hidden, rng);
  att_query_.init(cfg.hidden, cfg.hidden, rng);
  att_v_.resize(cfg.hidden);
  const double scale = std::sqrt(3.0 / cfg.hidden);
  for (double& v : att_v_.value) v = rng.uniform(-scale, scale);
  val_proj_.init(cfg.feature_dim, cfg.hidden, rng);
  out_.init(cfg.hidden, 1, rng);
  opt_.lr = cfg.lr;
}

void CreditAssignment::signal_arrived(double r_e) {
  armed_ = true;
  last_signal_ = r_e;
}

// One attention evaluation at a single decoder position.
struct AttentionTrace {
  std::vector<nn::Vec> tanh_terms;  // per encoder position
  nn::Vec scores;
  nn::Vec weights;
  nn::Vec context;
  nn::Vec query;  // decoder state the scores were computed against
};

struct CreditAssignment::Pass {
  int n_enc = 0;
  int n_dec = 0;
  std::vector<nn::GRUCell::Trace> enc_traces;
  std::vector<nn::Vec> enc_states;  // h_1..h_nu, the attention keys
  std::vector<nn::Vec> values;      // val_proj(phi_i), what the context mixes
  std::vector<AttentionTrace> att;
  std::vector<nn::GRUCell::Trace> dec_traces;
  std::vector<nn::Vec> dec_states;  // s_1..s_O
  nn::Vec outputs;                  // y_hat_1..y_hat_O
  std::vector<nn::Vec> enc_proj;    // W_a h_i, cached per position
};

void CreditAssignment::run_forward(const std::vector<nn::Vec>& features,
                                   const nn::Vec* teacher_inputs,
                                   Pass& pass) const {
  const int nu = static_cast<int>(features.size());
  const int h = cfg_.hidden;
  pass.n_enc = nu;
  // nu short-term slots plus the extrinsic-reward slot.
  pass.n_dec = nu + 1;
  pass.enc_traces.resize(nu);
  pass.enc_states.resize(nu);
  pass.values.resize(nu);
  pass.enc_proj.resize(nu);

  nn::Vec hstate(h, 0.0);
  for (int i = 0; i < nu; ++i) {
    hstate = encoder_.forward(features[i], hstate, &pass.enc_traces[i]);
    pass.enc_states[i] = hstate;
    pass.enc_proj[i] = att_enc_.forward(hstate);
    pass.values[i] = val_proj_.forward(features[i]);
  }

  const int n_out = pass.n_dec;
  pass.att.resize(n_out);
  pass.dec_traces.resize(n_out);
  pass.dec_states.resize(n_out);
  pass.outputs.assign(n_out, 0.0);

  nn::Vec s(h, 0.0);
  double y_prev = 0.0;
  for (int o = 0; o < n_out; ++o) {
    AttentionTrace& att = pass.att[o];
    att.query = s;
    att.tanh_terms.resize(nu);
    att.scores.assign(nu, 0.0);
    const nn::Vec query_proj = att_query_.forward(s);
    double max_score = -1e300;
    for (int i = 0; i < nu; ++i) {
      nn::Vec t(h);
      for (int j = 0; j < h; ++j) {
        t[j] = std::tanh(pass.enc_proj[i][j] + query_proj[j]);
      }
      double score = 0.0;
      for (int j = 0; j < h; ++j) score += att_v_.value[j] * t[j];
      att.tanh_terms[i] = std::move(t);
      att.scores[i] = score;
      max_score = std::max(max_score, score);
    }
    att.weights.assign(nu, 0.0);
    double denom = 0.0;
    for (int i = 0; i < nu; ++i) {
      att.weights[i] = std::exp(att.scores[i] - max_score);
      denom += att.weights[i];
    }
    for (int i = 0; i < nu; ++i) att.weights[i] /= denom;
    att.context.assign(h, 0.0);
    for (int i = 0; i < nu; ++i) {
      nn::axpy(att.context, att.weights[i], pass.values[i]);
    }

    nn::Vec x(1 + h);
    x[0] = y_prev;
    for (int j = 0; j < h; ++j) x[1 + j] = att.context[j];
    s = decoder_.forward(x, s, &pass.dec_traces[o]);
    pass.dec_states[o] = s;

    const double y = out_.forward(att.context).front();
    pass.outputs[o] = y;
    // Teacher forcing feeds the true value at this slot to the next one;
    // the free-running pass feeds the model's own output back.
    y_prev = teacher_inputs != nullptr ? (*teacher_inputs)[o] : y;
  }
}

double CreditAssignment::epoch_pass(const std::vector<nn::Vec>& features,
                                    const nn::Vec& targets) {
  const int nu = static_cast<int>(features.size());
  const int n_out = nu + 1;
  const int h = cfg_.hidden;

  Pass pass;
  run_forward(features, &targets, pass);

  auto slot_weight = [&](int o) {
    return o == n_out - 1 ? cfg_.final_target_weight : 1.0;
  };
  double weight_sum = 0.0;
  double loss = 0.0;
  for (int o = 0; o < n_out; ++o) {
    const double e = pass.outputs[o] - targets[o];
    loss += slot_weight(o) * e * e;
    weight_sum += slot_weight(o);
  }
  loss /= weight_sum;

  nn::ParamRefs refs = params();
  nn::zero_grads(refs);
  std::vector<nn::Vec> d_enc_states(nu, nn::Vec(h, 0.0));
  std::vector<nn::Vec> d_values(nu, nn::Vec(h, 0.0));
  nn::Vec ds_next(h, 0.0);  // grad into s_o from step o+1

  for (int o = n_out - 1; o >= 0; --o) {
    const AttentionTrace& att = pass.att[o];
    nn::Vec dy{2.0 * slot_weight(o) * (pass.outputs[o] - targets[o]) /
               weight_sum};
    nn::Vec dc = out_.backward(att.context, dy);
    nn::Vec ds = ds_next;

    // decoder GRU
    nn::Vec dx(1 + h, 0.0);
    nn::Vec ds_prev(h, 0.0);
    decoder_.backward(pass.dec_traces[o], ds, dx, ds_prev);
    for (int j = 0; j < h; ++j) dc[j] += dx[1 + j];

    // context: c = sum_i w_i * value_i
    nn::Vec d_weights(nu, 0.0);
    for (int i = 0; i < nu; ++i) {
      double acc = 0.0;
      for (int j = 0; j < h; ++j) acc += dc[j] * pass.values[i][j];
      d_weights[i] = acc;
      nn::axpy(d_values[i], att.weights[i], dc);
    }
    // softmax
    double dot = 0.0;
    for (int i = 0; i < nu; ++i) dot += att.weights[i] * d_weights[i];
    nn::Vec d_scores(nu);
    for (int i = 0; i < nu; ++i) {
      d_scores[i] = att.weights[i] * (d_weights[i] - dot);
    }
    // scores: e_i = v . tanh(W_a h_i + U_a s_prev + b)
    nn::Vec d_query_proj(h, 0.0);
    for (int i = 0; i < nu; ++i) {
      const nn::Vec& t = att.tanh_terms[i];
      nn::Vec dt(h);
      for (int j = 0; j < h; ++j) {
        att_v_.grad[j] += d_scores[i] * t[j];
        dt[j] = d_scores[i] * att_v_.value[j] * (1.0 - t[j] * t[j]);
      }
      nn::axpy(d_enc_states[i], 1.0,
               att_enc_.backward(pass.enc_states[i], dt));
      nn::axpy(d_query_proj, 1.0, dt);
    }
    // All positions share one U_a s_prev evaluation.
    nn::axpy(ds_prev, 1.0, att_query_.backward(att.query, d_query_proj));

    ds_next = std::move(ds_prev);
  }

  for (int i = 0; i < nu; ++i) {
    val_proj_.backward(features[i], d_values[i]);
  }

  // encoder BPTT
  nn::Vec dh(h, 0.0);
  for (int i = nu - 1; i >= 0; --i) {
    nn::axpy(dh, 1.0, d_enc_states[i]);
    nn::Vec dx_in(cfg_.feature_dim, 0.0);
    nn::Vec dh_prev(h, 0.0);
    encoder_.backward(pass.enc_traces[i], dh, dx_in, dh_prev);
    dh = std::move(dh_prev);
  }
  return loss;
}

std::optional<double> CreditAssignment::train(const CreditBatch& batch,
                                              int epochs) {
  if (!armed_) return std::nullopt;
  const int nu = static_cast<int>(batch.features.size());
  if (nu == 0 || batch.targets.size() != static_cast<std::size_t>(nu) + 1) {
    throw std::invalid_argument(
        "train: target length must be one more than the feature window");
  }
  armed_ = false;
  ++training_runs_;

  nn::ParamRefs refs = params();
  double loss = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    loss = epoch_pass(batch.features, batch.targets);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("credit training diverged to a NaN loss");
    }
    opt_.step(refs);
  }
  return loss;
}

double CreditAssignment::loss_and_gradients(const CreditBatch& batch) {
  const int nu = static_cast<int>(batch.features.size());
  if (nu == 0 || batch.targets.size() != static_cast<std::size_t>(nu) + 1) {
    throw std::invalid_argument(
        "loss_and_gradients: target length must be window + 1");
  }
  return epoch_pass(batch.features, batch.targets);
}

CreditWeights CreditAssignment::infer(
    const std::vector<nn::Vec>& features) const {
  if (features.empty()) {
    throw std::invalid_argument("infer: empty feature window");
  }
  Pass pass;
  run_forward(features, nullptr, pass);
  CreditWeights w;
  w.eps = pass.att.back().weights;  // the extrinsic-reward slot
  return w;
}

nn::ParamRefs CreditAssignment::params() {
  nn::ParamRefs refs;
  encoder_.collect(refs);
  decoder_.collect(refs);
  att_enc_.collect(refs);
  att_query_.collect(refs);
  refs.push_back(&att_v_);
  val_proj_.collect(refs);
  out_.collect(refs);
  return refs;
}

}  // namespace arena::credit
