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

#ifndef ARENA_CREDIT_ASSIGNMENT_HPP_
#define ARENA_CREDIT_ASSIGNMENT_HPP_

#include <optional>
#include <vector>

#include "arena/nn.hpp"
#include "arena/rng.hpp"

// Recurrent encoder over the featurized window, decoder with an additive
// attention layer addressed over the encoder states. The context mixes
// position-local value projections, and the decoder reaches the inputs only
// through that context, so the attention weights carry the information
// routing. Trained only when an extrinsic signal arrives; between signals
// only the forward pass runs. The attention row at the final decoder
// position (the extrinsic-reward slot) is the credit weight vector.

namespace arena::credit {

// Targets are consumed as given; callers keep payoffs and the signal on a
// comparable scale.
struct CreditConfig {
  int window = 8;        // nu, number of encoder positions
  int feature_dim = 32;  // width of each phi
  int hidden = 32;       // encoder/decoder state width
  double lr = 5e-3;
  int default_epochs = 15;
  // The extrinsic-reward slot counts this many times more in the loss; the
  // attention row the weights are read from serves that slot.
  double final_target_weight = 4.0;
};

// Simplex weight vector over the last nu steps.
struct CreditWeights {
  nn::Vec eps;
};

bool is_simplex(const nn::Vec& eps, double tol = 1e-6);

// Weight aligned to the step at `offset` from the window start; the most
// recent step lives at offset nu-1. Throws std::out_of_range otherwise.
double credit_for_step(const CreditWeights& weights, int step_offset);

struct CreditBatch {
  std::vector<nn::Vec> features;  // nu feature vectors, oldest first
  nn::Vec targets;                // nu payoffs then the extrinsic signal
};

class CreditAssignment {
 public:
  CreditAssignment(const CreditConfig& cfg, rng::Stream& rng);

  // A new extrinsic signal arms one training run.
  void signal_arrived(double r_e);
  bool training_pending() const { return armed_; }

  // Teacher-forced sequence training, mean squared error over all decoder
  // outputs. Rejected (nullopt) unless a signal armed it. Returns the final
  // epoch's loss. Throws std::runtime_error when the loss turns NaN.
  std::optional<double> train(const CreditBatch& batch, int epochs);

  // Forward-only pass; the decoder free-runs on its own outputs. Always
  // yields a valid simplex vector, trained or not.
  CreditWeights infer(const std::vector<nn::Vec>& features) const;

  // One forward/backward evaluation: fills parameter gradients and returns
  // the loss without touching the optimizer. Diagnostics hook.
  double loss_and_gradients(const CreditBatch& batch);

  long training_runs() const { return training_runs_; }
  double last_signal() const { return last_signal_; }
  const CreditConfig& config() const { return cfg_; }
  nn::ParamRefs params();

 private:
  struct Pass;  // full forward trace, defined in the implementation

  void run_forward(const std::vector<nn::Vec>& features,
                   const nn::Vec* teacher_inputs, Pass& pass) const;
  double epoch_pass(const std::vector<nn::Vec>& features,
                    const nn::Vec& targets);

  CreditConfig cfg_;
  nn::GRUCell encoder_;
  nn::GRUCell decoder_;
  nn::Linear att_enc_;    // W_a: hidden -> hidden, applied to encoder states
  nn::Linear att_query_;  // U_a: hidden -> hidden, applied to decoder state
  nn::Param att_v_;       // v_a: hidden
  nn::Linear val_proj_;   // position-local values the context mixes
  nn::Linear out_;        // context -> scalar output
  nn::Adam opt_;

  bool armed_ = false;
  double last_signal_ = 0.0;
  long training_runs_ = 0;
};

}  // namespace arena::credit

#endif  // ARENA_CREDIT_ASSIGNMENT_HPP_
