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

#include <stdexcept>

#include "arena/reward_signals.hpp"
#include "arena/rng.hpp"

using namespace arena;

TEST_CASE("cumulated payoff sums the window") {
  CHECK(rewards::cumulated_payoff({1.0, -0.5, 2.0}) == doctest::Approx(2.5));
  CHECK(rewards::cumulated_payoff({0.0, 0.0, 0.0}) == 0.0);
  CHECK(rewards::cumulated_payoff({3.25}) == doctest::Approx(3.25));
  CHECK_THROWS_AS(rewards::cumulated_payoff({}), std::invalid_argument);
}

TEST_CASE("jain index on pinned vectors") {
  CHECK(rewards::jain_index({2, 2, 2, 2, 2, 2}) == doctest::Approx(1.0));
  CHECK(rewards::jain_index({5, 0, 0, 0, 0, 0}) ==
        doctest::Approx(1.0 / 6.0));
  CHECK(rewards::jain_index({2, 1, 1, 0, 0, 0}) ==
        doctest::Approx(16.0 / 36.0));
  // All-zero payments read as perfect equality.
  CHECK(rewards::jain_index({0, 0, 0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rewards::jain_index({}), std::invalid_argument);
  CHECK_THROWS_AS(rewards::jain_index({1.0, -0.1}), std::invalid_argument);
}

TEST_CASE("jain index bounds and scale invariance on random vectors") {
  rng::Stream rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.uniform_int(1, 12);
    std::vector<double> s(n);
    bool nonzero = false;
    for (double& v : s) {
      v = rng.uniform(0.0, 10.0);
      nonzero = nonzero || v > 0.0;
    }
    if (!nonzero) s[0] = 1.0;
    const double j = rewards::jain_index(s);
    CHECK(j >= 1.0 / n - 1e-12);
    CHECK(j <= 1.0 + 1e-12);

    const double k = rng.uniform(0.1, 50.0);
    std::vector<double> scaled = s;
    for (double& v : scaled) v *= k;
    CHECK(rewards::jain_index(scaled) == doctest::Approx(j).epsilon(1e-12));
  }
}

TEST_CASE("extrinsic signals") {
  rewards::PaymentLedger ledger(3);
  ledger.push_step({1.0, 0.0, 0.0}, {1.0, -0.1, -0.1});
  ledger.push_step({0.0, 2.0, 0.0}, {-0.1, 2.0, -0.1});
  ledger.push_step({0.0, 0.0, 0.0}, {1.0, 1.0, -0.05});

  SUBCASE("payoff signal is each bidder's cumulated payoff") {
    CHECK(rewards::extrinsic_signal(rewards::ExtrinsicKind::kPayoff, ledger,
                                    0) == doctest::Approx(1.9));
    CHECK(rewards::extrinsic_signal(rewards::ExtrinsicKind::kPayoff, ledger,
                                    1) == doctest::Approx(2.9));
    CHECK(rewards::extrinsic_signal(rewards::ExtrinsicKind::kPayoff, ledger,
                                    2) == doctest::Approx(-0.25));
  }
  SUBCASE("fairness signal is identical for every bidder") {
    const double j0 = rewards::extrinsic_signal(
        rewards::ExtrinsicKind::kFairness, ledger, 0);
    for (int m = 1; m < 3; ++m) {
      CHECK(rewards::extrinsic_signal(rewards::ExtrinsicKind::kFairness,
                                      ledger, m) == doctest::Approx(j0));
    }
    // payment totals are {1, 2, 0}
    CHECK(j0 == doctest::Approx(9.0 / (3.0 * 5.0)));
  }
  SUBCASE("bad bidder id is rejected") {
    CHECK_THROWS_AS(rewards::extrinsic_signal(rewards::ExtrinsicKind::kPayoff,
                                              ledger, 7),
                    std::invalid_argument);
  }
}

TEST_CASE("payment ledger shape checks") {
  rewards::PaymentLedger ledger(2);
  CHECK_THROWS_AS(ledger.push_step({1.0}, {1.0, 2.0}), std::invalid_argument);
  ledger.push_step({1.0, 0.0}, {0.5, -0.1});
  CHECK(ledger.steps() == 1);
  const auto totals = ledger.payment_totals();
  CHECK(totals[0] == doctest::Approx(1.0));
  CHECK(totals[1] == doctest::Approx(0.0));
}
