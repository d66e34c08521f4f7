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

#ifndef ARENA_GAME_THEORY_HPP_
#define ARENA_GAME_THEORY_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arena/rng.hpp"

// Numerical verification of three game-theoretic results: the backoff game
// is an exact potential game; the two-bidder second-price best response is
// piecewise linear between the opponent's anchor bids; and the equilibrium
// allocation rule maximizes allocated resource under a fairness constraint.

namespace arena::gametheory {

// ------------------------------- potential game ---------------------------

struct PotentialGameInstance {
  int num_players = 0;
  int num_commodities = 0;
  std::vector<std::vector<double>> backoff_costs;   // q[i][k]
  std::vector<std::vector<double>> resource_reqs;   // omega[i][k]
  double capacity = 1.0;  // C > 0
  double weight = 0.0;    // W

  void validate() const;  // throws std::invalid_argument on shape errors
};

using Profile = std::vector<std::vector<int>>;  // alpha in {0,1}^(I x K)

// u_i = sum_k q_ik - sum_k alpha_ik q_ik + W (1 - sum_j alpha_j . omega_j / C)
double player_utility(int player, const Profile& alpha,
                      const PotentialGameInstance& inst);

// phi = sum_jk q_jk - sum_jk alpha_jk q_jk + W (1 - sum_j alpha_j . omega_j / C)
double potential_value(const Profile& alpha, const PotentialGameInstance& inst);

// Samples random profiles and unilateral deviations; returns
// max |(u_i(a) - u_i(a')) - (phi(a) - phi(a'))|, which should vanish.
double verify_exact_potential(const PotentialGameInstance& inst, int trials,
                              rng::Stream& rng);

PotentialGameInstance random_potential_instance(rng::Stream& rng);

// ------------------------------ second-price game -------------------------

// u = x (v - p) - (1 - x) c for win indicator x.
double spa_payoff(int win, double valuation, double price, double lose_cost);

// Two bidders, one commodity. Bidder 1 plays a known increasing strategy
// pinned by its anchors; bidder 2 best-responds under budget B2 and losing
// cost c2. Valuations are uniform on their supports.
struct SPAInstance {
  double l1 = 0.0, m1 = 1.0;  // bidder 1 valuation support
  double l2 = 0.0, m2 = 1.0;  // bidder 2 valuation support
  double budget1 = 1.0, budget2 = 1.0;
  double lose_cost1 = 0.0, lose_cost2 = 0.0;
  double f1_low = 0.0;   // a_1 = f1(l1)
  double f1_high = 1.0;  // b_1 = f1(m1)

  void validate() const;
  // Linear increasing interpolation between the anchors, budget-capped.
  double f1(double v1) const;
};

struct BestResponseCurve {
  std::vector<double> v2_grid;
  std::vector<double> best_bid;
  double bid_step = 0.0;  // spacing of the bid grid used
};

// Expected-utility argmax over a discretized bid grid (ties to the lowest
// bid), integrating over bidder 1's valuation grid with second-price rules.
BestResponseCurve best_response_curve(const SPAInstance& inst, int v2_points,
                                      int bid_points, int v1_points);

struct PiecewiseLinearReport {
  bool middle_branch_present = false;
  double theta1 = 0.0;  // upper edge of the "stay at or below a1" branch
  double theta2 = 0.0;  // lower edge of the "at or above b1" branch
  double j2 = 0.0, d2 = 0.0;  // fitted middle-branch line
  double max_residual = 0.0;  // linear-fit residual over the middle branch
  double anchor_low_error = 0.0;   // |j2 theta1 + d2 - a1|
  double anchor_high_error = 0.0;  // |j2 theta2 + d2 - b1|
  bool lower_branch_ok = true;     // b* <= a1 below theta1 (within tol)
  bool upper_branch_ok = true;     // b* >= b1 above theta2 (within tol)
};

PiecewiseLinearReport check_piecewise_linear_form(const BestResponseCurve& curve,
                                                  double a1, double b1,
                                                  double tol);

// ------------------------------ fair allocation ---------------------------

// Winner 1 iff j1 v1 + d1 >= j2 v2 + d2, else 2.
int ne_allocation(double v1, double v2, double j1, double d1, double j2,
                  double d2);

struct ParetoInstance {
  double g1 = 1.0, k1 = 0.0;  // v_i = g_i omega_i + k_i
  double g2 = 1.0, k2 = 0.0;
  double j1 = 1.0, d1 = 0.0;  // equilibrium best-response coefficients
  double j2 = 1.0, d2 = 0.0;
  double gamma = 1.0;         // fairness target, > 0
  double omega1_min = 0.5, omega1_max = 1.5;  // uniform resource supports
  double omega2_min = 0.5, omega2_max = 1.5;

  void validate() const;
};

struct OmegaSample {
  double w1 = 0.0, w2 = 0.0;
};

using AllocationRule = std::function<int(double, double)>;  // -> 1 or 2

std::vector<OmegaSample> monte_carlo_samples(const ParetoInstance& inst,
                                             int count, rng::Stream& rng);

// E[w1 | winner = 1] / E[w2 | winner = 2] over the samples. Empty
// conditional events are rejected (nullopt).
std::optional<double> fairness_ratio(const AllocationRule& rule,
                                     const std::vector<OmegaSample>& samples);

struct LambdaResult {
  bool feasible = false;
  double lambda_star = 0.0;
  double achieved_ratio = 0.0;
};

// The tilted rule family: winner 1 iff w1 (1 + lambda) >= w2 (1 - gamma lambda).
AllocationRule tilted_rule(double lambda, double gamma);

// Bisection over lambda until the fairness ratio hits gamma within tol.
// Reports infeasible when no scanned bracket straddles the target.
LambdaResult solve_lambda_star(const ParetoInstance& inst, double gamma,
                               double tol,
                               const std::vector<OmegaSample>& samples);

struct WelfareReport {
  bool feasible = false;
  double lambda_star = 0.0;
  double achieved_ratio = 0.0;
  double astar_welfare = 0.0;
  double best_rival_welfare = 0.0;
  int rival_rules_checked = 0;
  int rival_rules_feasible = 0;
};

// Computes E[w_winner] under the tilted equilibrium rule, then brute-forces
// threshold rules (ratio thresholds and single-axis thresholds drawn from a
// grid_n x grid_n grid over the supports) that meet the fairness constraint
// within ratio_tol, and reports the best rival welfare.
WelfareReport verify_welfare_optimality(const ParetoInstance& inst,
                                        double gamma, int grid_n,
                                        double ratio_tol, int sample_count,
                                        rng::Stream& rng);

// ------------------------------ instance files ----------------------------

PotentialGameInstance potential_instance_from_json(const std::string& text);
SPAInstance spa_instance_from_json(const std::string& text);
ParetoInstance pareto_instance_from_json(const std::string& text);

}  // namespace arena::gametheory

#endif  // ARENA_GAME_THEORY_HPP_
