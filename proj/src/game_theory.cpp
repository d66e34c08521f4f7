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

#include "arena/game_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace arena::gametheory {

void PotentialGameInstance::validate() const {
  if (num_players <= 0 || num_commodities <= 0) {
    throw std::invalid_argument("instance needs players and commodities");
  }
  if (capacity <= 0.0) throw std::invalid_argument("capacity must be > 0");
  auto check = [&](const std::vector<std::vector<double>>& m,
                   const char* name) {
    if (static_cast<int>(m.size()) != num_players) {
      throw std::invalid_argument(std::string(name) + ": wrong row count");
    }
    for (const auto& row : m) {
      if (static_cast<int>(row.size()) != num_commodities) {
        throw std::invalid_argument(std::string(name) + ": wrong col count");
      }
    }
  };
  check(backoff_costs, "backoff_costs");
  check(resource_reqs, "resource_reqs");
}

namespace {

void check_profile(const Profile& alpha, const PotentialGameInstance& inst) {
  if (static_cast<int>(alpha.size()) != inst.num_players) {
    throw std::invalid_argument("profile: wrong player count");
  }
  for (const auto& row : alpha) {
    if (static_cast<int>(row.size()) != inst.num_commodities) {
      throw std::invalid_argument("profile: wrong commodity count");
    }
  }
}

double load_term(const Profile& alpha, const PotentialGameInstance& inst) {
  double load = 0.0;
  for (int j = 0; j < inst.num_players; ++j) {
    for (int k = 0; k < inst.num_commodities; ++k) {
      load += alpha[j][k] * inst.resource_reqs[j][k];
    }
  }
  return inst.weight * (1.0 - load / inst.capacity);
}

}  // namespace

double player_utility(int player, const Profile& alpha,
                      const PotentialGameInstance& inst) {
  inst.validate();
  check_profile(alpha, inst);
  if (player < 0 || player >= inst.num_players) {
    throw std::invalid_argument("player index out of range");
  }
  double own = 0.0;
  for (int k = 0; k < inst.num_commodities; ++k) {
    own += inst.backoff_costs[player][k] -
           alpha[player][k] * inst.backoff_costs[player][k];
  }
  return own + load_term(alpha, inst);
}

double potential_value(const Profile& alpha,
                       const PotentialGameInstance& inst) {
  inst.validate();
  check_profile(alpha, inst);
  double sum = 0.0;
  for (int j = 0; j < inst.num_players; ++j) {
    for (int k = 0; k < inst.num_commodities; ++k) {
      sum += inst.backoff_costs[j][k] -
             alpha[j][k] * inst.backoff_costs[j][k];
    }
  }
  return sum + load_term(alpha, inst);
}

double verify_exact_potential(const PotentialGameInstance& inst, int trials,
                              rng::Stream& rng) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  inst.validate();
  auto random_row = [&](std::vector<int>& row) {
    for (int& a : row) a = rng.uniform() < 0.5 ? 1 : 0;
  };
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Profile alpha(inst.num_players,
                  std::vector<int>(inst.num_commodities, 0));
    for (auto& row : alpha) random_row(row);
    const int i = rng.uniform_int(0, inst.num_players - 1);
    Profile alt = alpha;
    random_row(alt[i]);
    const double du = player_utility(i, alpha, inst) -
                      player_utility(i, alt, inst);
    const double dphi = potential_value(alpha, inst) -
                        potential_value(alt, inst);
    worst = std::max(worst, std::abs(du - dphi));
  }
  return worst;
}

PotentialGameInstance random_potential_instance(rng::Stream& rng) {
  PotentialGameInstance inst;
  inst.num_players = rng.uniform_int(2, 5);
  inst.num_commodities = rng.uniform_int(1, 4);
  inst.capacity = rng.uniform(1.0, 10.0);
  inst.weight = rng.uniform(0.0, 10.0);
  inst.backoff_costs.assign(inst.num_players,
                            std::vector<double>(inst.num_commodities, 0.0));
  inst.resource_reqs = inst.backoff_costs;
  for (int i = 0; i < inst.num_players; ++i) {
    for (int k = 0; k < inst.num_commodities; ++k) {
      inst.backoff_costs[i][k] = rng.uniform(0.0, 5.0);
      inst.resource_reqs[i][k] = rng.uniform(0.0, 5.0);
    }
  }
  return inst;
}

double spa_payoff(int win, double valuation, double price, double lose_cost) {
  if (win != 0 && win != 1) {
    throw std::invalid_argument("spa_payoff: win indicator must be 0 or 1");
  }
  return win * (valuation - price) - (1 - win) * lose_cost;
}

void SPAInstance::validate() const {
  if (!(l1 < m1) || !(l2 < m2)) {
    throw std::invalid_argument("valuation supports must have l < m");
  }
  if (f1_high < f1_low) {
    throw std::invalid_argument("f1 must be increasing (a1 <= b1)");
  }
  if (lose_cost1 < 0.0 || lose_cost2 < 0.0) {
    throw std::invalid_argument("losing costs must be >= 0");
  }
  if (budget1 <= 0.0 || budget2 <= 0.0) {
    throw std::invalid_argument("budgets must be positive");
  }
}

double SPAInstance::f1(double v1) const {
  const double t = (v1 - l1) / (m1 - l1);
  const double bid = f1_low + t * (f1_high - f1_low);
  return std::min(bid, budget1);  // cannot bid more than the budget
}

BestResponseCurve best_response_curve(const SPAInstance& inst, int v2_points,
                                      int bid_points, int v1_points) {
  inst.validate();
  if (v2_points < 2 || bid_points < 2 || v1_points < 1) {
    throw std::invalid_argument("best_response_curve: grids too small");
  }
  BestResponseCurve curve;
  curve.v2_grid.resize(v2_points);
  curve.best_bid.resize(v2_points);

  const double bid_lo = 0.0;
  const double bid_hi = inst.budget2;
  curve.bid_step = (bid_hi - bid_lo) / (bid_points - 1);

  // Opponent bids, one per valuation grid point, equally weighted.
  std::vector<double> opp(v1_points);
  for (int i = 0; i < v1_points; ++i) {
    const double v1 =
        inst.l1 + (inst.m1 - inst.l1) * (i + 0.5) / v1_points;
    opp[i] = inst.f1(v1);
  }

  for (int vi = 0; vi < v2_points; ++vi) {
    const double v2 = inst.l2 + (inst.m2 - inst.l2) * vi / (v2_points - 1);
    curve.v2_grid[vi] = v2;
    double best_value = -std::numeric_limits<double>::infinity();
    double best_bid = bid_lo;
    for (int bi = 0; bi < bid_points; ++bi) {
      const double b = bid_lo + curve.bid_step * bi;
      double expected = 0.0;
      for (double b1 : opp) {
        if (b > b1) {
          expected += spa_payoff(1, v2, b1, inst.lose_cost2);
        } else if (b < b1) {
          expected += spa_payoff(0, v2, b1, inst.lose_cost2);
        } else {
          expected += 0.5 * spa_payoff(1, v2, b1, inst.lose_cost2) +
                      0.5 * spa_payoff(0, v2, b1, inst.lose_cost2);
        }
      }
      expected /= v1_points;
      if (expected > best_value + 1e-12) {  // ties resolve to the lowest bid
        best_value = expected;
        best_bid = b;
      }
    }
    curve.best_bid[vi] = best_bid;
  }
  return curve;
}

PiecewiseLinearReport check_piecewise_linear_form(const BestResponseCurve& curve,
                                                  double a1, double b1,
                                                  double tol) {
  PiecewiseLinearReport report;
  const int n = static_cast<int>(curve.v2_grid.size());
  if (n == 0) throw std::invalid_argument("empty best-response curve");

  std::vector<int> middle;
  for (int i = 0; i < n; ++i) {
    if (curve.best_bid[i] > a1 && curve.best_bid[i] < b1) middle.push_back(i);
  }
  if (middle.empty()) {
    // Theorem's middle branch is vacuous here; report the branch edges.
    report.middle_branch_present = false;
    report.theta1 = curve.v2_grid.front();
    report.theta2 = curve.v2_grid.back();
    for (int i = 0; i < n; ++i) {
      if (curve.best_bid[i] <= a1) {
        report.theta1 = std::max(report.theta1, curve.v2_grid[i]);
      }
      if (curve.best_bid[i] >= b1) {
        report.theta2 = std::min(report.theta2, curve.v2_grid[i]);
      }
    }
    return report;
  }

  report.middle_branch_present = true;
  // Least-squares line over the middle branch.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i : middle) {
    const double x = curve.v2_grid[i];
    const double y = curve.best_bid[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(middle.size());
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) {
    report.j2 = 0.0;
    report.d2 = sy / m;
  } else {
    report.j2 = (m * sxy - sx * sy) / denom;
    report.d2 = (sy - report.j2 * sx) / m;
  }
  for (int i : middle) {
    const double fit = report.j2 * curve.v2_grid[i] + report.d2;
    report.max_residual =
        std::max(report.max_residual, std::abs(fit - curve.best_bid[i]));
  }

  // Branch edges: last grid point at or below a1, first at or above b1.
  report.theta1 = curve.v2_grid.front();
  report.theta2 = curve.v2_grid.back();
  for (int i = 0; i < n; ++i) {
    if (curve.best_bid[i] <= a1) {
      report.theta1 = std::max(report.theta1, curve.v2_grid[i]);
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    if (curve.best_bid[i] >= b1) {
      report.theta2 = std::min(report.theta2, curve.v2_grid[i]);
    }
  }
  report.anchor_low_error =
      std::abs(report.j2 * report.theta1 + report.d2 - a1);
  report.anchor_high_error =
      std::abs(report.j2 * report.theta2 + report.d2 - b1);

  for (int i = 0; i < n; ++i) {
    if (curve.v2_grid[i] < report.theta1 && curve.best_bid[i] > a1 + tol) {
      report.lower_branch_ok = false;
    }
    if (curve.v2_grid[i] > report.theta2 && curve.best_bid[i] < b1 - tol) {
      report.upper_branch_ok = false;
    }
  }
  return report;
}

int ne_allocation(double v1, double v2, double j1, double d1, double j2,
                  double d2) {
  return j1 * v1 + d1 >= j2 * v2 + d2 ? 1 : 2;
}

void ParetoInstance::validate() const {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be > 0");
  if (j1 <= 0.0 || j2 <= 0.0) {
    throw std::invalid_argument("best-response slopes must be positive");
  }
  if (!(omega1_min <= omega1_max) || !(omega2_min <= omega2_max)) {
    throw std::invalid_argument("resource supports are inverted");
  }
}

std::vector<OmegaSample> monte_carlo_samples(const ParetoInstance& inst,
                                             int count, rng::Stream& rng) {
  inst.validate();
  std::vector<OmegaSample> samples(count);
  for (OmegaSample& s : samples) {
    s.w1 = rng.uniform(inst.omega1_min, inst.omega1_max);
    s.w2 = rng.uniform(inst.omega2_min, inst.omega2_max);
  }
  return samples;
}

std::optional<double> fairness_ratio(const AllocationRule& rule,
                                     const std::vector<OmegaSample>& samples) {
  double sum1 = 0.0, sum2 = 0.0;
  long n1 = 0, n2 = 0;
  for (const OmegaSample& s : samples) {
    if (rule(s.w1, s.w2) == 1) {
      sum1 += s.w1;
      ++n1;
    } else {
      sum2 += s.w2;
      ++n2;
    }
  }
  if (n1 == 0 || n2 == 0) return std::nullopt;  // degenerate rule
  return (sum1 / n1) / (sum2 / n2);
}

AllocationRule tilted_rule(double lambda, double gamma) {
  return [lambda, gamma](double w1, double w2) {
    return w1 * (1.0 + lambda) >= w2 * (1.0 - gamma * lambda) ? 1 : 2;
  };
}

LambdaResult solve_lambda_star(const ParetoInstance& inst, double gamma,
                               double tol,
                               const std::vector<OmegaSample>& samples) {
  inst.validate();
  LambdaResult result;

  // The achieved ratio decreases in lambda; scan for a bracket first.
  const double lo_limit = -0.95;
  const double hi_limit = 0.95 / gamma;
  const int scan_points = 64;
  double prev_lambda = lo_limit;
  std::optional<double> prev_ratio =
      fairness_ratio(tilted_rule(lo_limit, gamma), samples);
  double bracket_lo = 0.0, bracket_hi = 0.0;
  bool found = false;
  for (int i = 1; i <= scan_points && !found; ++i) {
    const double lam = lo_limit + (hi_limit - lo_limit) * i / scan_points;
    const std::optional<double> ratio =
        fairness_ratio(tilted_rule(lam, gamma), samples);
    if (prev_ratio.has_value() && ratio.has_value()) {
      if ((*prev_ratio - gamma) * (*ratio - gamma) <= 0.0) {
        bracket_lo = prev_lambda;
        bracket_hi = lam;
        found = true;
      }
    }
    prev_lambda = lam;
    prev_ratio = ratio;
  }
  if (!found) return result;  // infeasible on this instance

  double lo = bracket_lo, hi = bracket_hi;
  double best_lambda = 0.5 * (lo + hi);
  double best_err = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const std::optional<double> ratio =
        fairness_ratio(tilted_rule(mid, gamma), samples);
    if (!ratio.has_value()) break;
    const double err = std::abs(*ratio - gamma);
    if (err < best_err) {
      best_err = err;
      best_lambda = mid;
    }
    if (err <= tol) break;
    // ratio decreases in lambda
    if (*ratio > gamma) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const std::optional<double> achieved =
      fairness_ratio(tilted_rule(best_lambda, gamma), samples);
  if (!achieved.has_value()) return result;
  result.feasible = true;
  result.lambda_star = best_lambda;
  result.achieved_ratio = *achieved;
  return result;
}

WelfareReport verify_welfare_optimality(const ParetoInstance& inst,
                                        double gamma, int grid_n,
                                        double ratio_tol, int sample_count,
                                        rng::Stream& rng) {
  inst.validate();
  WelfareReport report;
  const std::vector<OmegaSample> samples =
      monte_carlo_samples(inst, sample_count, rng);

  const LambdaResult lambda = solve_lambda_star(inst, gamma, 1e-5, samples);
  if (!lambda.feasible) return report;
  report.feasible = true;
  report.lambda_star = lambda.lambda_star;
  report.achieved_ratio = lambda.achieved_ratio;

  auto welfare = [&](const AllocationRule& rule) {
    double sum = 0.0;
    for (const OmegaSample& s : samples) {
      sum += rule(s.w1, s.w2) == 1 ? s.w1 : s.w2;
    }
    return sum / static_cast<double>(samples.size());
  };
  const AllocationRule astar = tilted_rule(lambda.lambda_star, gamma);
  report.astar_welfare = welfare(astar);

  // Rival threshold rules, parameterized from the grid: ratio thresholds
  // w1 >= s w2 with s = x/y over grid pairs, plus single-axis thresholds.
  std::vector<AllocationRule> rivals;
  std::vector<double> grid1(grid_n), grid2(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    grid1[i] = inst.omega1_min +
               (inst.omega1_max - inst.omega1_min) * (i + 0.5) / grid_n;
    grid2[i] = inst.omega2_min +
               (inst.omega2_max - inst.omega2_min) * (i + 0.5) / grid_n;
  }
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double s = grid1[i] / grid2[j];
      rivals.push_back(
          [s](double w1, double w2) { return w1 >= s * w2 ? 1 : 2; });
    }
  }
  for (int i = 0; i < grid_n; ++i) {
    const double tau1 = grid1[i];
    rivals.push_back(
        [tau1](double w1, double) { return w1 >= tau1 ? 1 : 2; });
    const double tau2 = grid2[i];
    rivals.push_back(
        [tau2](double, double w2) { return w2 <= tau2 ? 1 : 2; });
  }

  report.rival_rules_checked = static_cast<int>(rivals.size());
  report.best_rival_welfare = -std::numeric_limits<double>::infinity();
  for (const AllocationRule& rule : rivals) {
    const std::optional<double> ratio = fairness_ratio(rule, samples);
    if (!ratio.has_value()) continue;
    if (std::abs(*ratio - gamma) > ratio_tol) continue;
    ++report.rival_rules_feasible;
    report.best_rival_welfare =
        std::max(report.best_rival_welfare, welfare(rule));
  }
  return report;
}

namespace {

using nlohmann::json;

std::vector<std::vector<double>> matrix_from(const json& j) {
  std::vector<std::vector<double>> m;
  for (const auto& row : j) m.push_back(row.get<std::vector<double>>());
  return m;
}

}  // namespace

PotentialGameInstance potential_instance_from_json(const std::string& text) {
  const json j = json::parse(text);
  PotentialGameInstance inst;
  inst.num_players = j.at("num_players").get<int>();
  inst.num_commodities = j.at("num_commodities").get<int>();
  inst.backoff_costs = matrix_from(j.at("backoff_costs"));
  inst.resource_reqs = matrix_from(j.at("resource_reqs"));
  inst.capacity = j.at("capacity").get<double>();
  inst.weight = j.at("weight").get<double>();
  inst.validate();
  return inst;
}

SPAInstance spa_instance_from_json(const std::string& text) {
  const json j = json::parse(text);
  SPAInstance inst;
  inst.l1 = j.at("l1").get<double>();
  inst.m1 = j.at("m1").get<double>();
  inst.l2 = j.at("l2").get<double>();
  inst.m2 = j.at("m2").get<double>();
  inst.budget1 = j.at("budget1").get<double>();
  inst.budget2 = j.at("budget2").get<double>();
  inst.lose_cost1 = j.at("lose_cost1").get<double>();
  inst.lose_cost2 = j.at("lose_cost2").get<double>();
  inst.f1_low = j.at("f1_low").get<double>();
  inst.f1_high = j.at("f1_high").get<double>();
  inst.validate();
  return inst;
}

ParetoInstance pareto_instance_from_json(const std::string& text) {
  const json j = json::parse(text);
  ParetoInstance inst;
  inst.g1 = j.at("g1").get<double>();
  inst.k1 = j.at("k1").get<double>();
  inst.g2 = j.at("g2").get<double>();
  inst.k2 = j.at("k2").get<double>();
  inst.j1 = j.at("j1").get<double>();
  inst.d1 = j.at("d1").get<double>();
  inst.j2 = j.at("j2").get<double>();
  inst.d2 = j.at("d2").get<double>();
  inst.gamma = j.at("gamma").get<double>();
  inst.omega1_min = j.at("omega1_min").get<double>();
  inst.omega1_max = j.at("omega1_max").get<double>();
  inst.omega2_min = j.at("omega2_min").get<double>();
  inst.omega2_max = j.at("omega2_max").get<double>();
  inst.validate();
  return inst;
}

}  // namespace arena::gametheory
