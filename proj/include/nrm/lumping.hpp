#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "nrm/adp.hpp"
#include "nrm/lp.hpp"
#include "nrm/model.hpp"

namespace nrm {

inline int num_groups(const std::vector<int>& group) {
  return group.empty() ? 0 : *std::max_element(group.begin(), group.end()) + 1;
}

// State lumping for the bound LP. Two states may share a group when
//  (a) their incoming-probability columns are parallel at every period
//      (including the initial distribution), so every source sees the same
//      conditional profile inside the group and that profile matches the
//      state marginals, and
//  (b) all states of a group put identical total mass on every target group,
//      so per-group constraints expand back to valid per-state ones.
// Under (a)+(b) the aggregated LP below has exactly the optimal value of the
// full bound LP, and its solution expands to an optimal full solution.
// Hub-and-spoke instances collapse from per-state to per-origin-destination
// resource weights this way.
inline std::vector<int> lumpable_groups(const Instance& inst, double tol = 1e-12) {
  const int S = inst.num_states();
  const int T = inst.horizon();

  // (a): all columns (p_1(.), p_t(., s)) proportional.
  auto columns_parallel = [&](int s1, int s2) {
    double a = inst.arrival.initial[s1], b = inst.arrival.initial[s2];
    std::vector<std::pair<std::vector<double>, std::vector<double>>> cols;
    cols.push_back({{a}, {b}});
    for (int t = 0; t < T - 1; ++t) {
      const Matrix& p = inst.arrival.transitions[t];
      std::vector<double> c1(S), c2(S);
      for (int s = 0; s < S; ++s) {
        c1[s] = p(s, s1);
        c2[s] = p(s, s2);
      }
      cols.push_back({std::move(c1), std::move(c2)});
    }
    for (auto& [u, v] : cols) {
      double nu = 0.0, nv = 0.0;
      for (double x : u) nu = std::max(nu, std::abs(x));
      for (double x : v) nv = std::max(nv, std::abs(x));
      if (nu == 0.0 || nv == 0.0) continue;
      for (size_t i = 0; i < u.size(); ++i)
        for (size_t j = i + 1; j < u.size(); ++j) {
          double det = u[i] * v[j] - u[j] * v[i];
          if (std::abs(det) > tol * std::max(nu * nv, 1.0)) return false;
        }
    }
    return true;
  };

  std::vector<int> group(S, -1);
  int next = 0;
  for (int s = 0; s < S; ++s) {
    if (group[s] >= 0) continue;
    group[s] = next;
    for (int s2 = s + 1; s2 < S; ++s2)
      if (group[s2] < 0 && columns_parallel(s, s2)) group[s2] = next;
    ++next;
  }

  // (b): refine until group-mass signatures agree inside every group.
  bool changed = true;
  while (changed) {
    changed = false;
    int G = num_groups(group);
    for (int g = 0; g < G; ++g) {
      std::vector<int> members;
      for (int s = 0; s < S; ++s)
        if (group[s] == g) members.push_back(s);
      if (members.size() <= 1) continue;
      auto signature_equal = [&](int s1, int s2) {
        for (int t = 0; t < T - 1; ++t) {
          const Matrix& p = inst.arrival.transitions[t];
          std::vector<double> m1(G, 0.0), m2(G, 0.0);
          for (int s = 0; s < S; ++s) {
            m1[group[s]] += p(s1, s);
            m2[group[s]] += p(s2, s);
          }
          for (int g2 = 0; g2 < G; ++g2)
            if (std::abs(m1[g2] - m2[g2]) > tol * 10) return false;
        }
        return true;
      };
      int pivot = members[0];
      std::vector<int> split;
      for (size_t k = 1; k < members.size(); ++k)
        if (!signature_equal(pivot, members[k])) split.push_back(members[k]);
      if (!split.empty()) {
        int fresh = num_groups(group);
        for (int s : split) group[s] = fresh;
        changed = true;
      }
    }
  }
  return group;
}

// Aggregated bound LP over lumped groups: theta and the reward bracket stay
// per state, the resource weights and their brackets live per group.
struct LumpedAdpLp {
  LinearProgram lp;
  std::vector<int> group;  // state -> group
  int T = 0, S = 0, m = 0, G = 0;
  int block = 0;

  int theta(int t, int s) const { return (t - 1) * block + s; }
  int beta(int t, int i, int g) const { return (t - 1) * block + S + i * G + g; }
  int u(int t, int s) const { return (t - 1) * block + S + m * G + s; }
  int w(int t, int i, int g) const { return (t - 1) * block + 2 * S + m * G + i * G + g; }
};

inline LumpedAdpLp build_lumped_adp_lp(const Instance& inst, const std::vector<int>& group) {
  detail::check_valid_for_lp(inst);
  LumpedAdpLp out;
  out.group = group;
  const int T = out.T = inst.horizon();
  const int S = out.S = inst.num_states();
  const int m = out.m = inst.num_resources();
  const int G = out.G = num_groups(group);
  out.block = 2 * S + 2 * m * G;

  Matrix marg = state_marginals(inst.arrival);

  LinearProgram& lp = out.lp;
  lp.sense = LpSense::minimize;
  std::vector<double> group_mass(G, 0.0);
  for (int s = 0; s < S; ++s) group_mass[group[s]] += inst.arrival.initial[s];
  for (int t = 1; t <= T; ++t) {
    for (int s = 0; s < S; ++s)
      lp.add_var(t == 1 ? inst.arrival.initial[s] : 0.0, 0.0, kInf,
                 "theta_" + std::to_string(t) + "_" + std::to_string(s));
    for (int i = 0; i < m; ++i)
      for (int g = 0; g < G; ++g)
        lp.add_var(t == 1 ? group_mass[g] * inst.capacities[i] : 0.0, 0.0, kInf,
                   "beta_" + std::to_string(t) + "_" + std::to_string(i) + "_g" + std::to_string(g));
    for (int s = 0; s < S; ++s)
      lp.add_var(0.0, 0.0, kInf, "u_" + std::to_string(t) + "_" + std::to_string(s));
    for (int i = 0; i < m; ++i)
      for (int g = 0; g < G; ++g)
        lp.add_var(0.0, 0.0, kInf, "w_" + std::to_string(t) + "_" + std::to_string(i) + "_g" + std::to_string(g));
  }

  // Group mass per (t, source state): M_t(s, g) = sum_{s' in g} p_t(s, s'),
  // and the marginal-conditional group profiles omega_t used for w rows.
  for (int t = 1; t <= T; ++t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    lp.row_block_starts.push_back(lp.num_rows());

    std::vector<std::vector<double>> mass;  // [s][g] for this t
    if (p) {
      mass.assign(S, std::vector<double>(G, 0.0));
      for (int s = 0; s < S; ++s)
        for (int s2 = 0; s2 < S; ++s2) mass[s][group[s2]] += (*p)(s, s2);
    }

    for (int s = 0; s < S; ++s) {
      int r = lp.add_row(RowSense::ge, 0.0);
      lp.add_entry(r, out.theta(t, s), 1.0);
      if (p)
        for (int s2 = 0; s2 < S; ++s2) lp.add_entry(r, out.theta(t + 1, s2), -(*p)(s, s2));
      lp.add_entry(r, out.u(t, s), -1.0);
      for (int i = 0; i < m; ++i)
        lp.add_entry(r, out.w(t, i, group[s]), -static_cast<double>(inst.capacities[i]));
    }

    for (int s = 0; s < S; ++s) {
      const CustomerType& ty = inst.state_customer(s);
      int r = lp.add_row(RowSense::ge, ty.reward);
      lp.add_entry(r, out.u(t, s), 1.0);
      if (p)
        for (int i = 0; i < m; ++i) {
          if (!ty.consumes[i]) continue;
          for (int g = 0; g < G; ++g)
            if (mass[s][g] != 0.0) lp.add_entry(r, out.beta(t + 1, i, g), mass[s][g]);
        }
    }

    if (p) {
      // omega_t over states within each group, from the period-t marginals.
      std::vector<double> gm(G, 0.0);
      for (int s = 0; s < S; ++s) gm[group[s]] += marg(t - 1, s);
      std::vector<double> omega(S, 0.0);
      std::vector<int> gsize(G, 0);
      for (int s = 0; s < S; ++s) ++gsize[group[s]];
      for (int s = 0; s < S; ++s)
        omega[s] = gm[group[s]] > 0.0 ? marg(t - 1, s) / gm[group[s]] : 1.0 / gsize[group[s]];

      std::vector<std::vector<double>> gmass(G, std::vector<double>(G, 0.0));
      for (int s = 0; s < S; ++s)
        for (int g2 = 0; g2 < G; ++g2) gmass[group[s]][g2] += omega[s] * mass[s][g2];

      for (int i = 0; i < m; ++i)
        for (int g = 0; g < G; ++g) {
          int r = lp.add_row(RowSense::ge, 0.0);
          lp.add_entry(r, out.w(t, i, g), 1.0);
          lp.add_entry(r, out.beta(t, i, g), 1.0);
          for (int g2 = 0; g2 < G; ++g2)
            if (gmass[g][g2] != 0.0) lp.add_entry(r, out.beta(t + 1, i, g2), -gmass[g][g2]);
        }
    } else {
      for (int i = 0; i < m; ++i)
        for (int g = 0; g < G; ++g) {
          int r = lp.add_row(RowSense::ge, 0.0);
          lp.add_entry(r, out.w(t, i, g), 1.0);
          lp.add_entry(r, out.beta(t, i, g), 1.0);
        }
    }
  }
  return out;
}

// Expands an optimal lumped solution to full per-state weights (uniform over
// each group), an optimal solution of the unaggregated LP.
inline AdpWeights expand_lumped_weights(const LpSolution& sol, const LumpedAdpLp& ix) {
  if (sol.status != LpStatus::optimal)
    throw std::invalid_argument("cannot extract weights from a non-optimal solve");
  AdpWeights w(ix.T, ix.m, ix.S);
  for (int t = 1; t <= ix.T; ++t)
    for (int s = 0; s < ix.S; ++s) {
      w.th(t, s) = sol.primal[ix.theta(t, s)];
      for (int i = 0; i < ix.m; ++i) w.be(t, i, s) = sol.primal[ix.beta(t, i, ix.group[s])];
    }
  return w;
}

}  // namespace nrm
