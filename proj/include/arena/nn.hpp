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

#ifndef ARENA_NN_HPP_
#define ARENA_NN_HPP_

#include <cstddef>
#include <vector>

#include "arena/rng.hpp"

// Small dense building blocks with hand-written backward passes. Every
// forward takes an explicit trace so a layer can be evaluated several times
// before any backward runs (the critic sees two windows per update).

namespace arena::nn {

using Vec = std::vector<double>;

// y = W x  (W is out x in, row-major)
Vec matvec(const Vec& w, const Vec& x, int out, int in);
// x = W^T y
Vec matvec_t(const Vec& w, const Vec& y, int out, int in);
// grad += y x^T
void outer_acc(Vec& grad, const Vec& y, const Vec& x, int out, int in);
void axpy(Vec& y, double a, const Vec& x);

double sigmoid(double x);
double softplus(double x);

// A parameter block: value, accumulated gradient, Adam moments.
struct Param {
  Vec value;
  Vec grad;
  Vec m;
  Vec v;

  void resize(std::size_t n) {
    value.assign(n, 0.0);
    grad.assign(n, 0.0);
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

using ParamRefs = std::vector<Param*>;

void zero_grads(const ParamRefs& params);
// w += rate * grad, then clears grads. Used for the TD-style ascent updates.
void sgd_ascent(const ParamRefs& params, double rate);

struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long steps = 0;

  // Descends along the accumulated gradients, then clears them.
  void step(const ParamRefs& params);
};

struct Linear {
  int in = 0;
  int out = 0;
  Param w;  // out x in
  Param b;  // out

  void init(int in_dim, int out_dim, rng::Stream& rng);
  Vec forward(const Vec& x) const;
  // Accumulates parameter grads for input x and upstream dy; returns dL/dx.
  Vec backward(const Vec& x, const Vec& dy);
  void collect(ParamRefs& refs);
};

struct MLP {
  enum class Act { kTanh, kRelu };

  std::vector<Linear> layers;
  Act hidden_act = Act::kTanh;
  bool tanh_output = false;  // squash the final layer as well

  struct Trace {
    std::vector<Vec> inputs;  // input to each layer, inputs[0] = x
    Vec output;
  };

  void init(const std::vector<int>& sizes, rng::Stream& rng,
            Act act = Act::kTanh);
  Vec forward(const Vec& x, Trace* trace = nullptr) const;
  // Requires the trace from the matching forward. Returns dL/dx.
  Vec backward(const Trace& trace, const Vec& dy);
  void collect(ParamRefs& refs);
  int in_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().out; }
};

// y = t .* h + (1 - t) .* x with t = sigmoid(gate(x)), h = tanh(transform(x)).
struct Highway {
  Linear transform;
  Linear gate;

  struct Trace {
    Vec x, h, t;
  };

  void init(int dim, rng::Stream& rng);
  Vec forward(const Vec& x, Trace* trace = nullptr) const;
  Vec backward(const Trace& trace, const Vec& dy);
  void collect(ParamRefs& refs);
};

// Elementwise highway combination; the algebraic core of Highway::forward.
Vec highway_combine(const Vec& x, const Vec& h, const Vec& t);

// Temporal convolution trunk over a (steps x feat) window: one bank of
// filters per width, relu, max-over-time pooling, concat, highway.
struct ConvTrunk {
  int steps = 0;
  int feat = 0;
  int channels = 0;
  std::vector<int> widths;
  std::vector<Param> filters;  // per width: channels x (width*feat)
  std::vector<Param> biases;   // per width: channels
  Highway highway;

  struct Trace {
    Vec x;
    std::vector<Vec> conv;        // per width: positions x channels (relu'd)
    std::vector<std::vector<int>> argmax;  // per width: channels
    Vec pooled;
    Highway::Trace hw;
  };

  void init(int steps_in, int feat_in, int channels_n,
            std::vector<int> widths_in, rng::Stream& rng);
  int out_dim() const { return static_cast<int>(widths.size()) * channels; }
  // x is the window flattened row-major: x[step*feat + f].
  Vec forward(const Vec& x, Trace* trace = nullptr) const;
  Vec backward(const Trace& trace, const Vec& dy);
  void collect(ParamRefs& refs);
};

// Flat-vector trunk: linear stem + relu to `hidden`, then highway.
struct DenseTrunk {
  Linear stem;
  Highway highway;

  struct Trace {
    Vec x, pre, act;
    Highway::Trace hw;
  };

  void init(int in_dim, int hidden, rng::Stream& rng);
  int out_dim() const { return stem.out; }
  Vec forward(const Vec& x, Trace* trace = nullptr) const;
  Vec backward(const Trace& trace, const Vec& dy);
  void collect(ParamRefs& refs);
};

// Gated recurrent cell, width `hidden` over inputs of width `in`.
struct GRUCell {
  int in = 0;
  int hidden = 0;
  Param wz, uz, bz;
  Param wr, ur, br;
  Param wn, un, bn;

  struct Trace {
    Vec x, h_prev, z, r, n, rh;
  };

  void init(int in_dim, int hidden_dim, rng::Stream& rng);
  Vec forward(const Vec& x, const Vec& h_prev, Trace* trace = nullptr) const;
  // Given dL/dh_next, accumulates param grads and adds into dx and dh_prev.
  void backward(const Trace& trace, const Vec& dh_next, Vec& dx,
                Vec& dh_prev);
  void collect(ParamRefs& refs);
};

}  // namespace arena::nn

#endif  // ARENA_NN_HPP_
