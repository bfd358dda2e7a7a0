#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "nrm/adp.hpp"
#include "nrm/model.hpp"

namespace nrm {

// Per-type, per-state bid prices nu^t_j(s) for t = 1..T+1, terminal slice zero.
struct BidPriceTable {
  int T = 0, n = 0, S = 0;
  std::vector<double> nu;

  BidPriceTable() = default;
  BidPriceTable(int T_, int n_, int S_)
      : T(T_), n(n_), S(S_), nu(static_cast<size_t>(T_ + 2) * n_ * S_, 0.0) {}

  double at(int t, int j, int s) const {
    return nu[(static_cast<size_t>(t) * n + j) * S + s];
  }
  double& at(int t, int j, int s) { return nu[(static_cast<size_t>(t) * n + j) * S + s]; }
};

struct Decision {
  bool serve = false;
  double opportunity_cost = 0.0;
  bool feasible = false;
};

namespace detail {
// B_i: types consuming resource i.
inline std::vector<std::vector<int>> consumers_by_resource(const Instance& inst) {
  std::vector<std::vector<int>> b(inst.num_resources());
  for (int j = 0; j < inst.num_types(); ++j)
    for (int i = 0; i < inst.num_resources(); ++i)
      if (inst.types[j].consumes[i]) b[i].push_back(j);
  return b;
}

// Bid-price mass per resource at the next period's states:
//   g[i][s'] = (1/C_i) * sum_{j' in B_i} nu^{t+1}_{j'}(s').
inline Matrix resource_mass(const BidPriceTable& tab, const Instance& inst,
                            const std::vector<std::vector<int>>& consumers, int t_next) {
  Matrix g(inst.num_resources(), inst.num_states());
  for (int i = 0; i < inst.num_resources(); ++i) {
    if (consumers[i].empty()) continue;
    double inv_c = 1.0 / inst.capacities[i];
    for (int s = 0; s < inst.num_states(); ++s) {
      double sum = 0.0;
      for (int j : consumers[i]) sum += tab.at(t_next, j, s);
      g(i, s) = inv_c * sum;
    }
  }
  return g;
}
}  // namespace detail

// Backward bid-price recursion: each period backs up the expected next-period
// price and adds, only for the arriving type, the positive part of the reward
// net of its opportunity cost.
inline BidPriceTable compute_bid_prices(const Instance& inst) {
  detail::check_valid_for_lp(inst);
  const int T = inst.horizon(), n = inst.num_types(), S = inst.num_states();
  BidPriceTable tab(T, n, S);
  auto consumers = detail::consumers_by_resource(inst);

  for (int t = T; t >= 1; --t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    Matrix g = detail::resource_mass(tab, inst, consumers, t + 1);
    for (int s = 0; s < S; ++s) {
      if (p) {
        for (int s2 = 0; s2 < S; ++s2) {
          double pr = (*p)(s, s2);
          if (pr == 0.0) continue;
          for (int j = 0; j < n; ++j) tab.at(t, j, s) += pr * tab.at(t + 1, j, s2);
        }
      }
      const CustomerType& ty = inst.state_customer(s);
      if (ty.is_null()) continue;
      double opp = 0.0;
      if (p)
        for (int s2 = 0; s2 < S; ++s2) {
          double pr = (*p)(s, s2);
          if (pr == 0.0) continue;
          for (int i = 0; i < inst.num_resources(); ++i)
            if (ty.consumes[i]) opp += pr * g(i, s2);
        }
      int j = inst.type_of_state(s);
      tab.at(t, j, s) += std::max(0.0, ty.reward - opp);
    }
  }
  return tab;
}

// Expected next-period bid-price mass of the resources the arriving customer
// would consume. Defined for typed states only.
inline double opportunity_cost(const BidPriceTable& tab, const Instance& inst, int t, int s) {
  if (t < 1 || t > inst.horizon()) throw std::invalid_argument("period out of range");
  const CustomerType& ty = inst.state_customer(s);
  if (ty.is_null()) throw std::invalid_argument("no decision exists in a no-arrival state");
  if (t == inst.horizon()) return 0.0;
  const Matrix& p = inst.arrival.transitions[t - 1];
  auto consumers = detail::consumers_by_resource(inst);
  double opp = 0.0;
  for (int s2 = 0; s2 < inst.num_states(); ++s2) {
    double pr = p(s, s2);
    if (pr == 0.0) continue;
    for (int i = 0; i < inst.num_resources(); ++i) {
      if (!ty.consumes[i]) continue;
      double sum = 0.0;
      for (int j : consumers[i]) sum += tab.at(t + 1, j, s2);
      opp += pr * sum / inst.capacities[i];
    }
  }
  return opp;
}

// Bid-price rule: serve iff the bundle fits and the reward covers the
// opportunity cost (ties serve). No-arrival states are forced no-ops.
inline Decision decide_bid_price(const BidPriceTable& tab, const Instance& inst, int t, int s,
                                 std::span<const int> c) {
  const CustomerType& ty = inst.state_customer(s);
  if (ty.is_null()) return {false, 0.0, true};
  Decision d;
  d.feasible = feasible(c, ty.consumes);
  d.opportunity_cost = opportunity_cost(tab, inst, t, s);
  d.serve = d.feasible && ty.reward >= d.opportunity_cost;
  return d;
}

// Guaranteed floor on the policy's expected total reward.
inline double lower_bound_value(const BidPriceTable& tab, const MarkovArrival& arrival) {
  double v = 0.0;
  for (int s = 0; s < arrival.num_states(); ++s) {
    double sum = 0.0;
    for (int j = 0; j < tab.n; ++j) sum += tab.at(1, j, s);
    v += arrival.initial[s] * sum;
  }
  return v;
}

// Converts bid prices into bound-LP weights:
//   beta^t_i(s) = (1/C_i) sum_{j in B_i} nu^t_j(s),  theta^t(s) = sum_j nu^t_j(s).
inline AdpWeights construct_lp_solution(const BidPriceTable& tab, const Instance& inst) {
  const int T = inst.horizon(), S = inst.num_states(), m = inst.num_resources();
  AdpWeights w(T, m, S);
  auto consumers = detail::consumers_by_resource(inst);
  for (int t = 1; t <= T; ++t)
    for (int s = 0; s < S; ++s) {
      double sum = 0.0;
      for (int j = 0; j < tab.n; ++j) sum += tab.at(t, j, s);
      w.th(t, s) = sum;
      for (int i = 0; i < m; ++i) {
        double bi = 0.0;
        for (int j : consumers[i]) bi += tab.at(t, j, s);
        w.be(t, i, s) = bi / inst.capacities[i];
      }
    }
  return w;
}

// Serve iff feasible and the reward beats the expected marginal value of the
// consumed capacity under the solved approximation weights.
inline Decision decide_adp_heuristic(const AdpWeights& w, const Instance& inst, int t, int s,
                                     std::span<const int> c) {
  const CustomerType& ty = inst.state_customer(s);
  if (ty.is_null()) return {false, 0.0, true};
  Decision d;
  d.feasible = feasible(c, ty.consumes);
  double threshold = 0.0;
  if (t < inst.horizon()) {
    const Matrix& p = inst.arrival.transitions[t - 1];
    for (int s2 = 0; s2 < inst.num_states(); ++s2) {
      double pr = p(s, s2);
      if (pr == 0.0) continue;
      for (int i = 0; i < inst.num_resources(); ++i)
        if (ty.consumes[i]) threshold += pr * w.be(t + 1, i, s2);
    }
  }
  d.opportunity_cost = threshold;
  d.serve = d.feasible && ty.reward >= threshold;
  return d;
}

// Baseline: serve any feasible request with positive reward.
inline Decision decide_greedy(const Instance& inst, int /*t*/, int s, std::span<const int> c) {
  const CustomerType& ty = inst.state_customer(s);
  if (ty.is_null()) return {false, 0.0, true};
  Decision d;
  d.feasible = feasible(c, ty.consumes);
  d.serve = d.feasible && ty.reward > 0.0;
  return d;
}

}  // namespace nrm
