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

#include "arena/nn.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace arena::nn {

Vec matvec(const Vec& w, const Vec& x, int out, int in) {
  Vec y(out, 0.0);
  for (int o = 0; o < out; ++o) {
    const double* row = &w[static_cast<std::size_t>(o) * in];
    double acc = 0.0;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
  return y;
}

Vec matvec_t(const Vec& w, const Vec& y, int out, int in) {
  Vec x(in, 0.0);
  for (int o = 0; o < out; ++o) {
    const double* row = &w[static_cast<std::size_t>(o) * in];
    const double g = y[o];
    for (int i = 0; i < in; ++i) x[i] += row[i] * g;
  }
  return x;
}

void outer_acc(Vec& grad, const Vec& y, const Vec& x, int out, int in) {
  for (int o = 0; o < out; ++o) {
    double* row = &grad[static_cast<std::size_t>(o) * in];
    const double g = y[o];
    for (int i = 0; i < in; ++i) row[i] += g * x[i];
  }
}

void axpy(Vec& y, double a, const Vec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

void zero_grads(const ParamRefs& params) {
  for (Param* p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

void sgd_ascent(const ParamRefs& params, double rate) {
  for (Param* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->value[i] += rate * p->grad[i];
      p->grad[i] = 0.0;
    }
  }
}

void Adam::step(const ParamRefs& params) {
  ++steps;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
  for (Param* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      p->m[i] = beta1 * p->m[i] + (1.0 - beta1) * g;
      p->v[i] = beta2 * p->v[i] + (1.0 - beta2) * g * g;
      const double mhat = p->m[i] / bc1;
      const double vhat = p->v[i] / bc2;
      p->value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      p->grad[i] = 0.0;
    }
  }
}

namespace {

void xavier_init(Param& p, int out, int in, rng::Stream& rng) {
  p.resize(static_cast<std::size_t>(out) * in);
  const double scale = std::sqrt(6.0 / (out + in));
  for (double& w : p.value) w = rng.uniform(-scale, scale);
}

}  // namespace

void Linear::init(int in_dim, int out_dim, rng::Stream& rng) {
  in = in_dim;
  out = out_dim;
  xavier_init(w, out, in, rng);
  b.resize(out);
}

Vec Linear::forward(const Vec& x) const {
  assert(static_cast<int>(x.size()) == in);
  Vec y = matvec(w.value, x, out, in);
  for (int o = 0; o < out; ++o) y[o] += b.value[o];
  return y;
}

Vec Linear::backward(const Vec& x, const Vec& dy) {
  outer_acc(w.grad, dy, x, out, in);
  axpy(b.grad, 1.0, dy);
  return matvec_t(w.value, dy, out, in);
}

void Linear::collect(ParamRefs& refs) {
  refs.push_back(&w);
  refs.push_back(&b);
}

void MLP::init(const std::vector<int>& sizes, rng::Stream& rng, Act act) {
  assert(sizes.size() >= 2);
  hidden_act = act;
  layers.resize(sizes.size() - 1);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    layers[i].init(sizes[i], sizes[i + 1], rng);
  }
}

Vec MLP::forward(const Vec& x, Trace* trace) const {
  Vec h = x;
  if (trace != nullptr) {
    trace->inputs.clear();
    trace->inputs.reserve(layers.size());
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (trace != nullptr) trace->inputs.push_back(h);
    h = layers[l].forward(h);
    if (l + 1 < layers.size()) {
      for (double& v : h) {
        v = hidden_act == Act::kTanh ? std::tanh(v) : std::max(0.0, v);
      }
    } else if (tanh_output) {
      for (double& v : h) v = std::tanh(v);
    }
  }
  if (trace != nullptr) trace->output = h;
  return h;
}

Vec MLP::backward(const Trace& trace, const Vec& dy) {
  Vec grad = dy;
  if (tanh_output) {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      grad[i] *= 1.0 - trace.output[i] * trace.output[i];
    }
  }
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    if (l + 1 < static_cast<int>(layers.size())) {
      // grad currently refers to the activated output of layer l; fold the
      // activation derivative in. The activated value is the input of l+1.
      const Vec& act = trace.inputs[l + 1];
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (hidden_act == Act::kTanh) {
          grad[i] *= 1.0 - act[i] * act[i];
        } else {
          grad[i] *= act[i] > 0.0 ? 1.0 : 0.0;
        }
      }
    }
    grad = layers[l].backward(trace.inputs[l], grad);
  }
  return grad;
}

void MLP::collect(ParamRefs& refs) {
  for (Linear& l : layers) l.collect(refs);
}

Vec highway_combine(const Vec& x, const Vec& h, const Vec& t) {
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = t[i] * h[i] + (1.0 - t[i]) * x[i];
  }
  return y;
}

void Highway::init(int dim, rng::Stream& rng) {
  transform.init(dim, dim, rng);
  gate.init(dim, dim, rng);
  // Bias the gate towards carry behaviour at the start of training.
  std::fill(gate.b.value.begin(), gate.b.value.end(), -1.0);
}

Vec Highway::forward(const Vec& x, Trace* trace) const {
  Vec h = transform.forward(x);
  for (double& v : h) v = std::tanh(v);
  Vec t = gate.forward(x);
  for (double& v : t) v = sigmoid(v);
  Vec y = highway_combine(x, h, t);
  if (trace != nullptr) {
    trace->x = x;
    trace->h = std::move(h);
    trace->t = std::move(t);
    return y;
  }
  return y;
}

Vec Highway::backward(const Trace& trace, const Vec& dy) {
  const std::size_t n = dy.size();
  Vec dh(n), dt(n), dx(n);
  for (std::size_t i = 0; i < n; ++i) {
    dh[i] = dy[i] * trace.t[i] * (1.0 - trace.h[i] * trace.h[i]);
    dt[i] = dy[i] * (trace.h[i] - trace.x[i]) * trace.t[i] * (1.0 - trace.t[i]);
    dx[i] = dy[i] * (1.0 - trace.t[i]);
  }
  axpy(dx, 1.0, transform.backward(trace.x, dh));
  axpy(dx, 1.0, gate.backward(trace.x, dt));
  return dx;
}

void Highway::collect(ParamRefs& refs) {
  transform.collect(refs);
  gate.collect(refs);
}

void ConvTrunk::init(int steps_in, int feat_in, int channels_n,
                     std::vector<int> widths_in, rng::Stream& rng) {
  steps = steps_in;
  feat = feat_in;
  channels = channels_n;
  widths = std::move(widths_in);
  filters.resize(widths.size());
  biases.resize(widths.size());
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    assert(widths[wi] <= steps);
    xavier_init(filters[wi], channels, widths[wi] * feat, rng);
    biases[wi].resize(channels);
  }
  highway.init(out_dim(), rng);
}

Vec ConvTrunk::forward(const Vec& x, Trace* trace) const {
  assert(static_cast<int>(x.size()) == steps * feat);
  Vec pooled(out_dim(), 0.0);
  Trace local;
  Trace& tr = trace != nullptr ? *trace : local;
  tr.conv.assign(widths.size(), {});
  tr.argmax.assign(widths.size(), {});
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    const int fw = widths[wi];
    const int positions = steps - fw + 1;
    const int ksize = fw * feat;
    Vec conv(static_cast<std::size_t>(positions) * channels, 0.0);
    std::vector<int> argmax(channels, 0);
    for (int c = 0; c < channels; ++c) {
      const double* k = &filters[wi].value[static_cast<std::size_t>(c) * ksize];
      double best = -1.0;
      for (int p = 0; p < positions; ++p) {
        double acc = biases[wi].value[c];
        const double* win = &x[static_cast<std::size_t>(p) * feat];
        for (int i = 0; i < ksize; ++i) acc += k[i] * win[i];
        const double relu = std::max(0.0, acc);
        conv[static_cast<std::size_t>(p) * channels + c] = relu;
        if (p == 0 || relu > best) {
          best = relu;
          argmax[c] = p;
        }
      }
      pooled[wi * channels + c] = best;
    }
    tr.conv[wi] = std::move(conv);
    tr.argmax[wi] = std::move(argmax);
  }
  tr.x = x;
  tr.pooled = pooled;
  return highway.forward(pooled, trace != nullptr ? &tr.hw : nullptr);
}

Vec ConvTrunk::backward(const Trace& trace, const Vec& dy) {
  Vec dpooled = highway.backward(trace.hw, dy);
  Vec dx(trace.x.size(), 0.0);
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    const int fw = widths[wi];
    const int ksize = fw * feat;
    for (int c = 0; c < channels; ++c) {
      const double g = dpooled[wi * channels + c];
      if (g == 0.0) continue;
      const int p = trace.argmax[wi][c];
      // relu derivative at the pooled position
      if (trace.conv[wi][static_cast<std::size_t>(p) * channels + c] <= 0.0) {
        continue;
      }
      double* kg = &filters[wi].grad[static_cast<std::size_t>(c) * ksize];
      const double* k = &filters[wi].value[static_cast<std::size_t>(c) * ksize];
      const double* win = &trace.x[static_cast<std::size_t>(p) * feat];
      double* dwin = &dx[static_cast<std::size_t>(p) * feat];
      for (int i = 0; i < ksize; ++i) {
        kg[i] += g * win[i];
        dwin[i] += g * k[i];
      }
      biases[wi].grad[c] += g;
    }
  }
  return dx;
}

void ConvTrunk::collect(ParamRefs& refs) {
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    refs.push_back(&filters[wi]);
    refs.push_back(&biases[wi]);
  }
  highway.collect(refs);
}

void DenseTrunk::init(int in_dim, int hidden, rng::Stream& rng) {
  stem.init(in_dim, hidden, rng);
  highway.init(hidden, rng);
}

Vec DenseTrunk::forward(const Vec& x, Trace* trace) const {
  Vec pre = stem.forward(x);
  Vec act = pre;
  for (double& v : act) v = std::max(0.0, v);
  if (trace != nullptr) {
    trace->x = x;
    trace->pre = std::move(pre);
    trace->act = act;
    return highway.forward(act, &trace->hw);
  }
  return highway.forward(act, nullptr);
}

Vec DenseTrunk::backward(const Trace& trace, const Vec& dy) {
  Vec dact = highway.backward(trace.hw, dy);
  for (std::size_t i = 0; i < dact.size(); ++i) {
    if (trace.pre[i] <= 0.0) dact[i] = 0.0;
  }
  return stem.backward(trace.x, dact);
}

void DenseTrunk::collect(ParamRefs& refs) {
  stem.collect(refs);
  highway.collect(refs);
}

void GRUCell::init(int in_dim, int hidden_dim, rng::Stream& rng) {
  in = in_dim;
  hidden = hidden_dim;
  xavier_init(wz, hidden, in, rng);
  xavier_init(uz, hidden, hidden, rng);
  bz.resize(hidden);
  xavier_init(wr, hidden, in, rng);
  xavier_init(ur, hidden, hidden, rng);
  br.resize(hidden);
  xavier_init(wn, hidden, in, rng);
  xavier_init(un, hidden, hidden, rng);
  bn.resize(hidden);
}

Vec GRUCell::forward(const Vec& x, const Vec& h_prev, Trace* trace) const {
  Vec z = matvec(wz.value, x, hidden, in);
  axpy(z, 1.0, matvec(uz.value, h_prev, hidden, hidden));
  Vec r = matvec(wr.value, x, hidden, in);
  axpy(r, 1.0, matvec(ur.value, h_prev, hidden, hidden));
  for (int i = 0; i < hidden; ++i) {
    z[i] = sigmoid(z[i] + bz.value[i]);
    r[i] = sigmoid(r[i] + br.value[i]);
  }
  Vec rh(hidden);
  for (int i = 0; i < hidden; ++i) rh[i] = r[i] * h_prev[i];
  Vec n = matvec(wn.value, x, hidden, in);
  axpy(n, 1.0, matvec(un.value, rh, hidden, hidden));
  for (int i = 0; i < hidden; ++i) n[i] = std::tanh(n[i] + bn.value[i]);
  Vec h(hidden);
  for (int i = 0; i < hidden; ++i) {
    h[i] = (1.0 - z[i]) * n[i] + z[i] * h_prev[i];
  }
  if (trace != nullptr) {
    trace->x = x;
    trace->h_prev = h_prev;
    trace->z = std::move(z);
    trace->r = std::move(r);
    trace->n = std::move(n);
    trace->rh = std::move(rh);
  }
  return h;
}

void GRUCell::backward(const Trace& tr, const Vec& dh_next, Vec& dx,
                       Vec& dh_prev) {
  Vec dz(hidden), dn(hidden);
  for (int i = 0; i < hidden; ++i) {
    dz[i] = dh_next[i] * (tr.h_prev[i] - tr.n[i]);
    dn[i] = dh_next[i] * (1.0 - tr.z[i]);
    dh_prev[i] += dh_next[i] * tr.z[i];
  }
  // candidate gate
  Vec dan(hidden);
  for (int i = 0; i < hidden; ++i) dan[i] = dn[i] * (1.0 - tr.n[i] * tr.n[i]);
  outer_acc(wn.grad, dan, tr.x, hidden, in);
  outer_acc(un.grad, dan, tr.rh, hidden, hidden);
  axpy(bn.grad, 1.0, dan);
  axpy(dx, 1.0, matvec_t(wn.value, dan, hidden, in));
  Vec drh = matvec_t(un.value, dan, hidden, hidden);
  Vec dr(hidden);
  for (int i = 0; i < hidden; ++i) {
    dr[i] = drh[i] * tr.h_prev[i];
    dh_prev[i] += drh[i] * tr.r[i];
  }
  // update gate
  Vec daz(hidden), dar(hidden);
  for (int i = 0; i < hidden; ++i) {
    daz[i] = dz[i] * tr.z[i] * (1.0 - tr.z[i]);
    dar[i] = dr[i] * tr.r[i] * (1.0 - tr.r[i]);
  }
  outer_acc(wz.grad, daz, tr.x, hidden, in);
  outer_acc(uz.grad, daz, tr.h_prev, hidden, hidden);
  axpy(bz.grad, 1.0, daz);
  axpy(dx, 1.0, matvec_t(wz.value, daz, hidden, in));
  axpy(dh_prev, 1.0, matvec_t(uz.value, daz, hidden, hidden));
  outer_acc(wr.grad, dar, tr.x, hidden, in);
  outer_acc(ur.grad, dar, tr.h_prev, hidden, hidden);
  axpy(br.grad, 1.0, dar);
  axpy(dx, 1.0, matvec_t(wr.value, dar, hidden, in));
  axpy(dh_prev, 1.0, matvec_t(ur.value, dar, hidden, hidden));
}

void GRUCell::collect(ParamRefs& refs) {
  for (Param* p : {&wz, &uz, &bz, &wr, &ur, &br, &wn, &un, &bn}) {
    refs.push_back(p);
  }
}

}  // namespace arena::nn
