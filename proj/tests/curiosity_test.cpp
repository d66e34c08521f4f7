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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "arena/curiosity.hpp"
#include "arena/rng.hpp"

using namespace arena;

namespace {

curiosity::CuriosityConfig small_config(double xi = 0.2) {
  curiosity::CuriosityConfig cfg;
  cfg.xi = xi;
  cfg.feature_dim = 8;
  cfg.hidden = 32;
  return cfg;
}

nn::Vec random_window(int n, rng::Stream& rng) {
  nn::Vec w(n);
  for (double& v : w) v = rng.uniform(-1.0, 1.0);
  return w;
}

}  // namespace

TEST_CASE("intrinsic reward blend is exact") {
  CHECK(curiosity::intrinsic_reward(0.37, 0.5, 2.0, 1.0) ==
        doctest::Approx(0.37));
  CHECK(curiosity::intrinsic_reward(0.37, 1.0, 2.0, 0.0) ==
        doctest::Approx(2.0));
  CHECK(curiosity::intrinsic_reward(0.2, 0.5, 2.0, 0.5) ==
        doctest::Approx(0.6));

  rng::Stream rng(21);
  for (int t = 0; t < 100; ++t) {
    const double lf = rng.uniform(0.0, 5.0);
    const double eps = rng.uniform();
    const double u = rng.uniform(-10.0, 10.0);
    const double xi = rng.uniform();
    CHECK(curiosity::intrinsic_reward(lf, eps, u, xi) ==
          doctest::Approx(xi * lf + (1.0 - xi) * eps * u).epsilon(1e-15));
  }
  CHECK_THROWS_AS(curiosity::intrinsic_reward(1.0, 0.5, 1.0, 1.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(curiosity::intrinsic_reward(1.0, -0.1, 1.0, 0.5),
                  std::invalid_argument);
}

TEST_CASE("feature extraction is deterministic with a fixed shape") {
  rng::Stream rng(22);
  curiosity::CuriosityModel model(4, 3, 2, small_config(), rng);
  rng::Stream xrng(23);
  for (int t = 0; t < 20; ++t) {
    const nn::Vec w = random_window(12, xrng);
    const nn::Vec phi1 = model.feature_extract(w);
    const nn::Vec phi2 = model.feature_extract(w);
    REQUIRE(phi1.size() == 8);
    for (std::size_t i = 0; i < phi1.size(); ++i) CHECK(phi1[i] == phi2[i]);
    for (double v : phi1) {
      CHECK(std::isfinite(v));
      CHECK(std::abs(v) <= 1.0);
    }
  }
}

TEST_CASE("forward and inverse losses are nonnegative and exact at zero") {
  rng::Stream rng(24);
  curiosity::CuriosityModel model(4, 3, 2, small_config(), rng);
  rng::Stream xrng(25);
  const nn::Vec w = random_window(12, xrng);
  const nn::Vec phi = model.feature_extract(w);

  const auto pred = model.forward_predict(phi, {0.3, 0.4}, 0.0);
  CHECK(pred.phi_next.size() == phi.size());

  const nn::Vec a_hat = model.inverse_predict(phi, pred.phi_next);
  CHECK(a_hat.size() == 2);

  // a perfectly recovered action has zero inverse loss by definition
  double li = 0.0;
  for (std::size_t i = 0; i < a_hat.size(); ++i) {
    const double e = a_hat[i] - a_hat[i];
    li += e * e;
  }
  CHECK(li == 0.0);
}

TEST_CASE("identity dynamics drive the forward loss to zero") {
  rng::Stream rng(26);
  curiosity::CuriosityConfig cfg = small_config(/*xi=*/1.0);
  curiosity::CuriosityModel model(4, 3, 2, cfg, rng);
  rng::Stream xrng(27);
  const nn::Vec w = random_window(12, xrng);

  double last = 0.0;
  for (int t = 0; t < 4000; ++t) {
    // next window equals the current one; the action is constant
    const auto res = model.step(w, w, {0.5, -0.5}, 0.0, 1.0);
    last = res.forward_loss;
  }
  CHECK(last < 1e-3);
}

TEST_CASE("inverse model recovers a linearly encoded action") {
  rng::Stream rng(28);
  curiosity::CuriosityConfig cfg = small_config(/*xi=*/1.0);
  curiosity::CuriosityModel model(2, 3, 2, cfg, rng);
  rng::Stream xrng(29);
  const nn::Vec base = random_window(6, xrng);

  double inv_loss = 1.0;
  for (int t = 0; t < 6000; ++t) {
    const double a0 = xrng.uniform(-0.5, 0.5);
    const double a1 = xrng.uniform(-0.5, 0.5);
    nn::Vec next = base;
    for (int i = 0; i < 3; ++i) next[i] += a0;       // first row moves with a0
    for (int i = 3; i < 6; ++i) next[i] += a1;       // second row with a1
    const auto res = model.step(base, next, {a0, a1}, 0.0, 1.0);
    inv_loss = res.inverse_loss;
  }
  CHECK(inv_loss < 1e-2);
}

TEST_CASE("xi zero reduces the pipeline to credit-weighted payoff") {
  rng::Stream rng(30);
  curiosity::CuriosityModel model(4, 3, 2, small_config(/*xi=*/0.0), rng);
  rng::Stream xrng(31);
  for (int t = 0; t < 50; ++t) {
    const nn::Vec w1 = random_window(12, xrng);
    const nn::Vec w2 = random_window(12, xrng);
    const double u = xrng.uniform(-5, 5);
    const double eps = xrng.uniform();
    const auto res = model.step(w1, w2, {0.0, 0.0}, u, eps);
    CHECK(res.r_i == doctest::Approx(eps * u).epsilon(1e-12));
  }
}

TEST_CASE("model losses trend down on a stationary stream") {
  rng::Stream rng(32);
  curiosity::CuriosityModel model(4, 3, 2, small_config(), rng);
  rng::Stream xrng(33);
  // A fixed small pool of transitions replayed at random.
  std::vector<nn::Vec> pool;
  for (int i = 0; i < 4; ++i) pool.push_back(random_window(12, xrng));

  double early = 0.0, late = 0.0;
  const int steps = 400;
  for (int t = 0; t < steps; ++t) {
    const nn::Vec& w1 = pool[xrng.uniform_int(0, 3)];
    const nn::Vec& w2 = pool[xrng.uniform_int(0, 3)];
    const auto res = model.step(w1, w2, {0.1, 0.2}, 1.0, 0.5);
    const double joint = res.forward_loss + res.inverse_loss;
    if (t < 50) early += joint;
    if (t >= steps - 50) late += joint;
  }
  CHECK(late < early);
}

TEST_CASE("intrinsic reward stays finite over a 150-step episode") {
  rng::Stream rng(34);
  curiosity::CuriosityModel model(4, 3, 2, small_config(), rng);
  rng::Stream xrng(35);
  for (int t = 0; t < 150; ++t) {
    const nn::Vec w1 = random_window(12, xrng);
    const nn::Vec w2 = random_window(12, xrng);
    const auto res = model.step(w1, w2, {xrng.uniform(), xrng.uniform()},
                                xrng.uniform(-20, 20), xrng.uniform());
    CHECK(std::isfinite(res.r_i));
    CHECK(res.forward_loss >= 0.0);
    CHECK(res.inverse_loss >= 0.0);
  }
}
