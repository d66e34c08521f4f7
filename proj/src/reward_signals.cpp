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

#include "arena/reward_signals.hpp"

#include <stdexcept>

namespace arena::rewards {

void PaymentLedger::push_step(const std::vector<double>& step_payments,
                              const std::vector<double>& step_payoffs) {
  if (step_payments.size() != payments.size() ||
      step_payoffs.size() != payoffs.size()) {
    throw std::invalid_argument("ledger step size mismatch");
  }
  for (std::size_t m = 0; m < payments.size(); ++m) {
    payments[m].push_back(step_payments[m]);
    payoffs[m].push_back(step_payoffs[m]);
  }
}

std::vector<double> PaymentLedger::payment_totals() const {
  std::vector<double> totals(payments.size(), 0.0);
  for (std::size_t m = 0; m < payments.size(); ++m) {
    for (double p : payments[m]) totals[m] += p;
  }
  return totals;
}

double cumulated_payoff(const std::vector<double>& payoffs) {
  if (payoffs.empty()) {
    throw std::invalid_argument("cumulated_payoff: empty window");
  }
  double sum = 0.0;
  for (double u : payoffs) sum += u;
  return sum;
}

double jain_index(const std::vector<double>& payment_totals) {
  if (payment_totals.empty()) {
    throw std::invalid_argument("jain_index: no bidders");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double s : payment_totals) {
    if (s < 0.0) throw std::invalid_argument("jain_index: negative total");
    sum += s;
    sum_sq += s * s;
  }
  if (sum_sq == 0.0) return 1.0;  // all zero: perfect equality
  const double n = static_cast<double>(payment_totals.size());
  return (sum * sum) / (n * sum_sq);
}

double extrinsic_signal(ExtrinsicKind kind, const PaymentLedger& ledger,
                        int bidder_id) {
  if (bidder_id < 0 || bidder_id >= ledger.num_bidders()) {
    throw std::invalid_argument("extrinsic_signal: bad bidder id");
  }
  switch (kind) {
    case ExtrinsicKind::kPayoff:
      return cumulated_payoff(ledger.payoffs[bidder_id]);
    case ExtrinsicKind::kFairness:
      return jain_index(ledger.payment_totals());
  }
  throw std::logic_error("unreachable");
}

}  // namespace arena::rewards
