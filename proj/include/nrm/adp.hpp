#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrm/lp.hpp"
#include "nrm/model.hpp"

namespace nrm {

// Weights of the linear value approximation
//   V_t(c, s) ~ theta^t(s) + sum_i c_i * beta^t_i(s),
// defined for t = 1..T+1 with the terminal slice fixed to zero.
struct AdpWeights {
  int T = 0, m = 0, S = 0;
  std::vector<std::vector<double>> theta;  // theta[t][s], t = 1..T+1
  std::vector<std::vector<double>> beta;   // beta[t][i*S + s]

  AdpWeights() = default;
  AdpWeights(int T_, int m_, int S_)
      : T(T_), m(m_), S(S_),
        theta(T_ + 2, std::vector<double>(S_, 0.0)),
        beta(T_ + 2, std::vector<double>(static_cast<size_t>(m_) * S_, 0.0)) {}

  double th(int t, int s) const { return theta[t][s]; }
  double be(int t, int i, int s) const { return beta[t][static_cast<size_t>(i) * S + s]; }
  double& th(int t, int s) { return theta[t][s]; }
  double& be(int t, int i, int s) { return beta[t][static_cast<size_t>(i) * S + s]; }

  double min_entry() const {
    double lo = 0.0;
    for (int t = 1; t <= T + 1; ++t) {
      for (double v : theta[t]) lo = std::min(lo, v);
      for (double v : beta[t]) lo = std::min(lo, v);
    }
    return lo;
  }
};

// Column map for the single-product bound LP. Variables are grouped by period
// so the constraint matrix is banded in time, which the large-scale solver
// backend relies on.
struct AdpLpIndex {
  int T = 0, S = 0, m = 0;
  int block = 0;  // variables per period

  int theta(int t, int s) const { return (t - 1) * block + s; }
  int beta(int t, int i, int s) const { return (t - 1) * block + S + i * S + s; }
  int u(int t, int s) const { return (t - 1) * block + S + m * S + s; }
  int w(int t, int i, int s) const { return (t - 1) * block + 2 * S + m * S + i * S + s; }
};

namespace detail {
inline void check_valid_for_lp(const Instance& inst) {
  for (int i = 0; i < inst.num_resources(); ++i) {
    bool consumed = false;
    for (const auto& ty : inst.types)
      if (ty.consumes[i]) consumed = true;
    if (consumed && inst.capacities[i] == 0)
      throw std::invalid_argument("consumed resource has zero capacity");
  }
}
}  // namespace detail

// Bound LP over the linear approximation weights. Both bracket terms of the
// defining constraint get explicit epigraph variables:
//   theta^t(s) - sum_s' p_t theta^{t+1}(s') >= u_t(s) + sum_i C_i w_{t,i}(s)
//   u_t(s) >= r_{j(s)} - sum_s' p_t sum_i a_{i,j(s)} beta^{t+1}_i(s')
//   w_{t,i}(s) >= sum_s' p_t beta^{t+1}_i(s') - beta^t_i(s)
// with theta^{T+1} = beta^{T+1} = 0 eliminated.
inline std::pair<LinearProgram, AdpLpIndex> build_adp_lp(const Instance& inst) {
  detail::check_valid_for_lp(inst);
  const int T = inst.horizon(), S = inst.num_states(), m = inst.num_resources();
  AdpLpIndex ix{T, S, m, 2 * S + 2 * m * S};

  LinearProgram lp;
  lp.sense = LpSense::minimize;
  for (int t = 1; t <= T; ++t) {
    for (int s = 0; s < S; ++s)
      lp.add_var(t == 1 ? inst.arrival.initial[s] : 0.0, 0.0, kInf,
                 "theta_" + std::to_string(t) + "_" + std::to_string(s));
    for (int i = 0; i < m; ++i)
      for (int s = 0; s < S; ++s)
        lp.add_var(t == 1 ? inst.arrival.initial[s] * inst.capacities[i] : 0.0, 0.0, kInf,
                   "beta_" + std::to_string(t) + "_" + std::to_string(i) + "_" + std::to_string(s));
    for (int s = 0; s < S; ++s)
      lp.add_var(0.0, 0.0, kInf, "u_" + std::to_string(t) + "_" + std::to_string(s));
    for (int i = 0; i < m; ++i)
      for (int s = 0; s < S; ++s)
        lp.add_var(0.0, 0.0, kInf, "w_" + std::to_string(t) + "_" + std::to_string(i) + "_" + std::to_string(s));
  }

  for (int t = 1; t <= T; ++t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    lp.row_block_starts.push_back(lp.num_rows());

    for (int s = 0; s < S; ++s) {
      int r = lp.add_row(RowSense::ge, 0.0);
      lp.add_entry(r, ix.theta(t, s), 1.0);
      if (p)
        for (int s2 = 0; s2 < S; ++s2) lp.add_entry(r, ix.theta(t + 1, s2), -(*p)(s, s2));
      lp.add_entry(r, ix.u(t, s), -1.0);
      for (int i = 0; i < m; ++i) lp.add_entry(r, ix.w(t, i, s), -static_cast<double>(inst.capacities[i]));
    }

    for (int s = 0; s < S; ++s) {
      const CustomerType& ty = inst.state_customer(s);
      int r = lp.add_row(RowSense::ge, ty.reward);
      lp.add_entry(r, ix.u(t, s), 1.0);
      if (p)
        for (int i = 0; i < m; ++i) {
          if (!ty.consumes[i]) continue;
          for (int s2 = 0; s2 < S; ++s2) lp.add_entry(r, ix.beta(t + 1, i, s2), (*p)(s, s2));
        }
    }

    for (int i = 0; i < m; ++i)
      for (int s = 0; s < S; ++s) {
        int r = lp.add_row(RowSense::ge, 0.0);
        lp.add_entry(r, ix.w(t, i, s), 1.0);
        if (p)
          for (int s2 = 0; s2 < S; ++s2) lp.add_entry(r, ix.beta(t + 1, i, s2), -(*p)(s, s2));
        lp.add_entry(r, ix.beta(t, i, s), 1.0);
      }
  }
  return {std::move(lp), ix};
}

// Assortment variant: one defining constraint per (t, s, A) and per-product
// reward epigraph variables u_{t,j}(s) so the weighted positive parts are
// linearized exactly.
struct AssortAdpLpIndex {
  int T = 0, S = 0, m = 0;
  std::vector<int> products;      // non-null product ids, in order
  std::vector<int> product_slot;  // type id -> slot in products, or -1
  int block = 0;

  int theta(int t, int s) const { return (t - 1) * block + s; }
  int beta(int t, int i, int s) const { return (t - 1) * block + S + i * S + s; }
  int u(int t, int j, int s) const {
    return (t - 1) * block + S + m * S + product_slot[j] * S + s;
  }
  int w(int t, int i, int s) const {
    return (t - 1) * block + S + m * S + static_cast<int>(products.size()) * S + i * S + s;
  }
};

inline std::pair<LinearProgram, AssortAdpLpIndex> build_assort_adp_lp(const Instance& inst,
                                                                      const ChoiceModel& choice,
                                                                      int family_cap = 4096) {
  detail::check_valid_for_lp(inst);
  if (static_cast<int>(choice.family.size()) > family_cap)
    throw std::invalid_argument("assortment family exceeds the per-state cap of " +
                                std::to_string(family_cap));
  const int T = inst.horizon(), S = inst.num_states(), m = inst.num_resources();

  AssortAdpLpIndex ix;
  ix.T = T;
  ix.S = S;
  ix.m = m;
  ix.product_slot.assign(inst.num_types(), -1);
  for (int j = 0; j < inst.num_types(); ++j)
    if (!inst.types[j].is_null()) {
      ix.product_slot[j] = static_cast<int>(ix.products.size());
      ix.products.push_back(j);
    }
  const int np = static_cast<int>(ix.products.size());
  ix.block = S + m * S + np * S + m * S;

  LinearProgram lp;
  lp.sense = LpSense::minimize;
  for (int t = 1; t <= T; ++t) {
    for (int s = 0; s < S; ++s)
      lp.add_var(t == 1 ? inst.arrival.initial[s] : 0.0, 0.0, kInf,
                 "theta_" + std::to_string(t) + "_" + std::to_string(s));
    for (int i = 0; i < m; ++i)
      for (int s = 0; s < S; ++s)
        lp.add_var(t == 1 ? inst.arrival.initial[s] * inst.capacities[i] : 0.0, 0.0, kInf,
                   "beta_" + std::to_string(t) + "_" + std::to_string(i) + "_" + std::to_string(s));
    for (int j : ix.products)
      for (int s = 0; s < S; ++s)
        lp.add_var(0.0, 0.0, kInf, "u_" + std::to_string(t) + "_" + std::to_string(j) + "_" + std::to_string(s));
    for (int i = 0; i < m; ++i)
      for (int s = 0; s < S; ++s)
        lp.add_var(0.0, 0.0, kInf, "w_" + std::to_string(t) + "_" + std::to_string(i) + "_" + std::to_string(s));
  }

  for (int t = 1; t <= T; ++t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    lp.row_block_starts.push_back(lp.num_rows());

    for (int s = 0; s < S; ++s) {
      for (size_t ia = 0; ia < choice.family.size(); ++ia) {
        int r = lp.add_row(RowSense::ge, 0.0);
        lp.add_entry(r, ix.theta(t, s), 1.0);
        if (p)
          for (int s2 = 0; s2 < S; ++s2) lp.add_entry(r, ix.theta(t + 1, s2), -(*p)(s, s2));
        for (int j : choice.family[ia]) {
          if (inst.types[j].is_null()) continue;
          double ph = choice.phi(s, static_cast<int>(ia), j);
          if (ph != 0.0) lp.add_entry(r, ix.u(t, j, s), -ph);
        }
        for (int i = 0; i < m; ++i) lp.add_entry(r, ix.w(t, i, s), -static_cast<double>(inst.capacities[i]));
      }
    }

    for (int j : ix.products)
      for (int s = 0; s < S; ++s) {
        int r = lp.add_row(RowSense::ge, inst.types[j].reward);
        lp.add_entry(r, ix.u(t, j, s), 1.0);
        if (p)
          for (int i = 0; i < m; ++i) {
            if (!inst.types[j].consumes[i]) continue;
            for (int s2 = 0; s2 < S; ++s2) lp.add_entry(r, ix.beta(t + 1, i, s2), (*p)(s, s2));
          }
      }

    for (int i = 0; i < m; ++i)
      for (int s = 0; s < S; ++s) {
        int r = lp.add_row(RowSense::ge, 0.0);
        lp.add_entry(r, ix.w(t, i, s), 1.0);
        if (p)
          for (int s2 = 0; s2 < S; ++s2) lp.add_entry(r, ix.beta(t + 1, i, s2), -(*p)(s, s2));
        lp.add_entry(r, ix.beta(t, i, s), 1.0);
      }
  }
  return {std::move(lp), ix};
}

// View of an instance in high-variance form: one absorbing no-arrival state,
// every other state carrying a distinct non-null type.
struct HighVarianceView {
  int null_state = -1;
  std::vector<int> typed_states;  // state ids
  std::vector<int> type_ids;      // matching type ids
};

inline std::optional<HighVarianceView> high_variance_view(const Instance& inst) {
  HighVarianceView v;
  for (int s = 0; s < inst.num_states(); ++s) {
    if (inst.state_is_null(s)) {
      if (v.null_state >= 0) return std::nullopt;
      v.null_state = s;
    } else {
      v.typed_states.push_back(s);
      v.type_ids.push_back(inst.type_of_state(s));
    }
  }
  if (v.null_state < 0) return std::nullopt;
  auto sorted = v.type_ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return std::nullopt;
  for (const auto& p : inst.arrival.transitions)
    if (std::abs(p(v.null_state, v.null_state) - 1.0) > 1e-12) return std::nullopt;
  return v;
}

// Fluid-style upper bound for high-variance instances:
//   max sum_t sum_j P(s_t typed) r_j x_{j,t}
//   s.t. sum_t sum_{j in B_i} x_{j,t} <= C_i,  0 <= x_{j,t} <= lambda_{j,t}.
inline LinearProgram build_fluid_uf_lp(const Instance& inst) {
  auto view = high_variance_view(inst);
  if (!view) throw std::invalid_argument("instance is not in high-variance form");
  const int T = inst.horizon(), m = inst.num_resources();
  const int n = static_cast<int>(view->typed_states.size());
  Matrix marg = state_marginals(inst.arrival);

  LinearProgram lp;
  lp.sense = LpSense::maximize;
  std::vector<int> cap_row(m);
  for (int i = 0; i < m; ++i) cap_row[i] = lp.add_row(RowSense::le, inst.capacities[i]);
  for (int t = 1; t <= T; ++t) {
    double p_arrival = 1.0 - marg(t - 1, view->null_state);
    if (p_arrival < 0.0) p_arrival = 0.0;
    for (int k = 0; k < n; ++k) {
      int ty = view->type_ids[k];
      double lambda = p_arrival > 0.0 ? marg(t - 1, view->typed_states[k]) / p_arrival : 0.0;
      int col = lp.add_var(p_arrival * inst.types[ty].reward, 0.0, lambda,
                           "x_" + std::to_string(ty) + "_" + std::to_string(t));
      for (int i = 0; i < m; ++i)
        if (inst.types[ty].consumes[i]) lp.add_entry(cap_row[i], col, 1.0);
    }
  }
  return lp;
}

inline AdpWeights extract_weights(const LpSolution& sol, const AdpLpIndex& ix) {
  if (sol.status != LpStatus::optimal)
    throw std::invalid_argument("cannot extract weights from a non-optimal solve");
  AdpWeights w(ix.T, ix.m, ix.S);
  for (int t = 1; t <= ix.T; ++t)
    for (int s = 0; s < ix.S; ++s) {
      w.th(t, s) = sol.primal[ix.theta(t, s)];
      for (int i = 0; i < ix.m; ++i) w.be(t, i, s) = sol.primal[ix.beta(t, i, s)];
    }
  return w;
}

inline AdpWeights extract_weights(const LpSolution& sol, const AssortAdpLpIndex& ix) {
  if (sol.status != LpStatus::optimal)
    throw std::invalid_argument("cannot extract weights from a non-optimal solve");
  AdpWeights w(ix.T, ix.m, ix.S);
  for (int t = 1; t <= ix.T; ++t)
    for (int s = 0; s < ix.S; ++s) {
      w.th(t, s) = sol.primal[ix.theta(t, s)];
      for (int i = 0; i < ix.m; ++i) w.be(t, i, s) = sol.primal[ix.beta(t, i, s)];
    }
  return w;
}

struct AdpFeasibilityReport {
  double min_slack = 0.0;
  int t_at = 0;
  int s_at = 0;
  double objective = 0.0;
  bool feasible(double tol = 1e-9) const { return min_slack >= -tol; }
};

// Evaluates the defining constraint with both positive parts taken directly
// and reports the worst slack plus the bound objective of the weights.
inline AdpFeasibilityReport check_adp_feasibility(const AdpWeights& w, const Instance& inst) {
  const int T = inst.horizon(), S = inst.num_states(), m = inst.num_resources();
  if (w.T != T || w.S != S || w.m != m)
    throw std::invalid_argument("weight dimensions do not match the instance");

  AdpFeasibilityReport rep;
  bool first = true;
  for (int t = T; t >= 1; --t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    for (int s = 0; s < S; ++s) {
      const CustomerType& ty = inst.state_customer(s);
      double exp_theta = 0.0, reward_term = ty.reward;
      std::vector<double> exp_beta(m, 0.0);
      if (p)
        for (int s2 = 0; s2 < S; ++s2) {
          double pr = (*p)(s, s2);
          if (pr == 0.0) continue;
          exp_theta += pr * w.th(t + 1, s2);
          for (int i = 0; i < m; ++i) exp_beta[i] += pr * w.be(t + 1, i, s2);
        }
      for (int i = 0; i < m; ++i)
        if (ty.consumes[i]) reward_term -= exp_beta[i];
      double slack = w.th(t, s) - exp_theta - std::max(0.0, reward_term);
      for (int i = 0; i < m; ++i)
        slack -= inst.capacities[i] * std::max(0.0, exp_beta[i] - w.be(t, i, s));
      if (first || slack < rep.min_slack) {
        rep.min_slack = slack;
        rep.t_at = t;
        rep.s_at = s;
        first = false;
      }
    }
  }
  for (int s = 0; s < S; ++s) {
    double v = w.th(1, s);
    for (int i = 0; i < m; ++i) v += inst.capacities[i] * w.be(1, i, s);
    rep.objective += inst.arrival.initial[s] * v;
  }
  return rep;
}

// Same check against the assortment constraints, one per (t, s, A).
inline AdpFeasibilityReport check_assort_adp_feasibility(const AdpWeights& w, const Instance& inst,
                                                         const ChoiceModel& choice) {
  const int T = inst.horizon(), S = inst.num_states(), m = inst.num_resources();
  if (w.T != T || w.S != S || w.m != m)
    throw std::invalid_argument("weight dimensions do not match the instance");

  AdpFeasibilityReport rep;
  bool first = true;
  for (int t = T; t >= 1; --t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    for (int s = 0; s < S; ++s) {
      double exp_theta = 0.0;
      std::vector<double> exp_beta(m, 0.0);
      if (p)
        for (int s2 = 0; s2 < S; ++s2) {
          double pr = (*p)(s, s2);
          if (pr == 0.0) continue;
          exp_theta += pr * w.th(t + 1, s2);
          for (int i = 0; i < m; ++i) exp_beta[i] += pr * w.be(t + 1, i, s2);
        }
      double w_term = 0.0;
      for (int i = 0; i < m; ++i)
        w_term += inst.capacities[i] * std::max(0.0, exp_beta[i] - w.be(t, i, s));
      for (size_t ia = 0; ia < choice.family.size(); ++ia) {
        double reward_sum = 0.0;
        for (int j : choice.family[ia]) {
          const CustomerType& ty = inst.types[j];
          if (ty.is_null()) continue;
          double z = ty.reward;
          for (int i = 0; i < m; ++i)
            if (ty.consumes[i]) z -= exp_beta[i];
          reward_sum += choice.phi(s, static_cast<int>(ia), j) * std::max(0.0, z);
        }
        double slack = w.th(t, s) - exp_theta - reward_sum - w_term;
        if (first || slack < rep.min_slack) {
          rep.min_slack = slack;
          rep.t_at = t;
          rep.s_at = s;
          first = false;
        }
      }
    }
  }
  for (int s = 0; s < S; ++s) {
    double v = w.th(1, s);
    for (int i = 0; i < m; ++i) v += inst.capacities[i] * w.be(1, i, s);
    rep.objective += inst.arrival.initial[s] * v;
  }
  return rep;
}

}  // namespace nrm
