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

#ifndef ARENA_REWARD_SIGNALS_HPP_
#define ARENA_REWARD_SIGNALS_HPP_

#include <cstddef>
#include <vector>

namespace arena::rewards {

// The two end-of-episode signals. PAYOFF is private to each bidder;
// FAIRNESS is one shared value broadcast to everyone.
enum class ExtrinsicKind { kPayoff, kFairness };

// Per-step broker payments and round payoffs for one episode window.
// The payment attributed to a bidder at a step is the round's final price
// when that bidder won it, and zero otherwise.
struct PaymentLedger {
  std::vector<std::vector<double>> payments;  // [bidder][step], >= 0
  std::vector<std::vector<double>> payoffs;   // [bidder][step]

  explicit PaymentLedger(int num_bidders = 0)
      : payments(num_bidders), payoffs(num_bidders) {}

  int num_bidders() const { return static_cast<int>(payments.size()); }
  std::size_t steps() const {
    return payments.empty() ? 0 : payments.front().size();
  }
  void push_step(const std::vector<double>& step_payments,
                 const std::vector<double>& step_payoffs);
  std::vector<double> payment_totals() const;
};

// U = sum of the window's payoffs.
double cumulated_payoff(const std::vector<double>& payoffs);

// Jain's index over per-bidder totals: (sum s)^2 / (n * sum s^2), in
// [1/n, 1]. An all-zero vector is treated as perfect equality (J = 1).
double jain_index(const std::vector<double>& payment_totals);

// The end-of-episode signal for one bidder.
double extrinsic_signal(ExtrinsicKind kind, const PaymentLedger& ledger,
                        int bidder_id);

}  // namespace arena::rewards

#endif  // ARENA_REWARD_SIGNALS_HPP_
