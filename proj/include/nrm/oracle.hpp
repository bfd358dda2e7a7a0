#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrm/choice.hpp"
#include "nrm/model.hpp"
#include "nrm/policies.hpp"

namespace nrm {

// Value-to-go tables over the full capacity lattice. Lattice cells are indexed
// in mixed radix with precomputed strides so the serve branch is a direct
// offset below the current cell.
struct DpTable {
  int T = 0, S = 0, m = 0;
  long long cells = 0;
  std::vector<int> caps;
  std::vector<long long> strides;
  std::vector<std::vector<double>> v;  // v[t], t = 1..T+1, each cells*S

  double at(int t, long long cell, int s) const { return v[t][cell * S + s]; }
  double& at(int t, long long cell, int s) { return v[t][cell * S + s]; }

  long long cell_of(std::span<const int> c) const {
    long long idx = 0;
    for (size_t i = 0; i < c.size(); ++i) idx += c[i] * strides[i];
    return idx;
  }

  void decode(long long cell, std::vector<int>& c) const {
    for (int i = 0; i < m; ++i) {
      c[i] = static_cast<int>(cell % (caps[i] + 1));
      cell /= caps[i] + 1;
    }
  }

  // Offset of bundle a in cell units; valid only when the cell dominates a.
  long long offset_of(const std::vector<int>& a) const {
    long long off = 0;
    for (int i = 0; i < m; ++i) off += a[i] * strides[i];
    return off;
  }
};

namespace detail {
inline DpTable make_dp_table(const Instance& inst, long long cell_cap) {
  DpTable tab;
  tab.T = inst.horizon();
  tab.S = inst.num_states();
  tab.m = inst.num_resources();
  tab.caps = inst.capacities;
  tab.strides.assign(tab.m, 1);
  tab.cells = 1;
  for (int i = 0; i < tab.m; ++i) {
    tab.strides[i] = tab.cells;
    tab.cells *= tab.caps[i] + 1;
  }
  long long total = tab.cells * tab.S * (tab.T + 1);
  if (total > cell_cap)
    throw std::runtime_error("capacity lattice needs " + std::to_string(total) +
                             " cells, over the cap of " + std::to_string(cell_cap) +
                             "; use Monte-Carlo simulation instead");
  tab.v.assign(tab.T + 2, std::vector<double>(tab.cells * tab.S, 0.0));
  return tab;
}

// feasibility of bundle a at a decoded cell
inline bool cell_fits(const std::vector<int>& c, const std::vector<int>& a) {
  for (size_t i = 0; i < c.size(); ++i)
    if (c[i] < a[i]) return false;
  return true;
}
}  // namespace detail

constexpr long long kDefaultDpCellCap = 10'000'000;

// Exact finite-horizon DP: at every (t, c, s) the serve branch (gated on
// capacity) competes with the skip branch. Returns the optimal expected value
// and the full table.
inline std::pair<double, DpTable> exact_dp(const Instance& inst,
                                           long long cell_cap = kDefaultDpCellCap) {
  DpTable tab = detail::make_dp_table(inst, cell_cap);
  const int T = tab.T, S = tab.S;
  std::vector<int> c(tab.m);

  for (int t = T; t >= 1; --t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    for (long long cell = 0; cell < tab.cells; ++cell) {
      tab.decode(cell, c);
      for (int s = 0; s < S; ++s) {
        double skip = 0.0;
        if (p)
          for (int s2 = 0; s2 < S; ++s2) {
            double pr = (*p)(s, s2);
            if (pr != 0.0) skip += pr * tab.at(t + 1, cell, s2);
          }
        const CustomerType& ty = inst.state_customer(s);
        double best = skip;
        if (!ty.is_null() && detail::cell_fits(c, ty.consumes)) {
          double serve = ty.reward;
          if (p) {
            long long down = cell - tab.offset_of(ty.consumes);
            for (int s2 = 0; s2 < S; ++s2) {
              double pr = (*p)(s, s2);
              if (pr != 0.0) serve += pr * tab.at(t + 1, down, s2);
            }
          }
          best = std::max(best, serve);
        }
        tab.at(t, cell, s) = best;
      }
    }
  }
  double value = 0.0;
  long long full = tab.cells - 1;
  for (int s = 0; s < S; ++s) value += inst.arrival.initial[s] * tab.at(1, full, s);
  return {value, std::move(tab)};
}

// Exact DP for the assortment model: maximize over capacity-feasible family
// members the phi-weighted one-step values.
inline std::pair<double, DpTable> exact_dp_assort(const Instance& inst, const ChoiceModel& choice,
                                                  long long cell_cap = kDefaultDpCellCap) {
  DpTable tab = detail::make_dp_table(inst, cell_cap);
  const int T = tab.T, S = tab.S;
  std::vector<int> c(tab.m);

  for (int t = T; t >= 1; --t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    for (long long cell = 0; cell < tab.cells; ++cell) {
      tab.decode(cell, c);
      for (int s = 0; s < S; ++s) {
        double best = 0.0;
        for (size_t ia = 0; ia < choice.family.size(); ++ia) {
          bool fits = true;
          for (int j : choice.family[ia])
            if (!detail::cell_fits(c, inst.types[j].consumes)) {
              fits = false;
              break;
            }
          if (!fits) continue;
          double val = 0.0;
          for (int j : choice.family[ia]) {
            double ph = choice.phi(s, static_cast<int>(ia), j);
            if (ph == 0.0) continue;
            double one = inst.types[j].reward;
            if (p) {
              long long down = cell - tab.offset_of(inst.types[j].consumes);
              for (int s2 = 0; s2 < S; ++s2) {
                double pr = (*p)(s, s2);
                if (pr != 0.0) one += pr * tab.at(t + 1, down, s2);
              }
            }
            val += ph * one;
          }
          best = std::max(best, val);
        }
        tab.at(t, cell, s) = best;
      }
    }
  }
  double value = 0.0;
  long long full = tab.cells - 1;
  for (int s = 0; s < S; ++s) value += inst.arrival.initial[s] * tab.at(1, full, s);
  return {value, std::move(tab)};
}

using ServePolicy = std::function<Decision(int t, int s, std::span<const int> c)>;
using AssortPolicy = std::function<std::vector<int>(int t, int s, std::span<const int> c)>;

// Exact expected value of a deterministic serve/skip policy, by backward
// recursion over the same lattice the DP uses. No-arrival states always skip.
inline double exact_policy_value(const Instance& inst, const ServePolicy& policy,
                                 long long cell_cap = kDefaultDpCellCap) {
  DpTable tab = detail::make_dp_table(inst, cell_cap);
  const int T = tab.T, S = tab.S;
  std::vector<int> c(tab.m);

  for (int t = T; t >= 1; --t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    for (long long cell = 0; cell < tab.cells; ++cell) {
      tab.decode(cell, c);
      for (int s = 0; s < S; ++s) {
        const CustomerType& ty = inst.state_customer(s);
        bool serve = false;
        if (!ty.is_null()) {
          Decision d = policy(t, s, c);
          if (d.serve && !detail::cell_fits(c, ty.consumes))
            throw std::runtime_error("policy served an infeasible request");
          serve = d.serve;
        }
        double val = serve ? ty.reward : 0.0;
        long long next_cell = serve ? cell - tab.offset_of(ty.consumes) : cell;
        if (p)
          for (int s2 = 0; s2 < S; ++s2) {
            double pr = (*p)(s, s2);
            if (pr != 0.0) val += pr * tab.at(t + 1, next_cell, s2);
          }
        tab.at(t, cell, s) = val;
      }
    }
  }
  double value = 0.0;
  long long full = tab.cells - 1;
  for (int s = 0; s < S; ++s) value += inst.arrival.initial[s] * tab.at(1, full, s);
  return value;
}

// Exact expected value of an assortment-offering policy; the customer's pick
// is integrated out via the choice probabilities of the offered set.
inline double exact_assort_policy_value(const Instance& inst, const ChoiceModel& choice,
                                        const AssortPolicy& policy,
                                        long long cell_cap = kDefaultDpCellCap) {
  DpTable tab = detail::make_dp_table(inst, cell_cap);
  const int T = tab.T, S = tab.S;
  std::vector<int> c(tab.m);

  for (int t = T; t >= 1; --t) {
    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    for (long long cell = 0; cell < tab.cells; ++cell) {
      tab.decode(cell, c);
      for (int s = 0; s < S; ++s) {
        std::vector<int> offered = policy(t, s, c);
        double val = 0.0;
        for (int j : offered) {
          if (!detail::cell_fits(c, inst.types[j].consumes))
            throw std::runtime_error("policy offered an infeasible product");
          double ph = choice.phi_subset(s, offered, j);
          if (ph == 0.0) continue;
          double one = inst.types[j].reward;
          if (p) {
            long long down = cell - tab.offset_of(inst.types[j].consumes);
            for (int s2 = 0; s2 < S; ++s2) {
              double pr = (*p)(s, s2);
              if (pr != 0.0) one += pr * tab.at(t + 1, down, s2);
            }
          }
          val += ph * one;
        }
        tab.at(t, cell, s) = val;
      }
    }
  }
  double value = 0.0;
  long long full = tab.cells - 1;
  for (int s = 0; s < S; ++s) value += inst.arrival.initial[s] * tab.at(1, full, s);
  return value;
}

// Greedy readout of an exact DP table: serve whenever the serve branch is at
// least as good. Reproduces the DP value exactly; used as a cross-check.
inline ServePolicy make_dp_policy(const Instance& inst, const DpTable& dp) {
  return [&inst, &dp](int t, int s, std::span<const int> c) -> Decision {
    const CustomerType& ty = inst.state_customer(s);
    Decision d;
    d.feasible = feasible(c, ty.consumes);
    if (ty.is_null() || !d.feasible) return d;
    long long cell = dp.cell_of(c);
    const Matrix* p = t < inst.horizon() ? &inst.arrival.transitions[t - 1] : nullptr;
    double serve = ty.reward, skip = 0.0;
    if (p) {
      long long down = cell - dp.offset_of(ty.consumes);
      for (int s2 = 0; s2 < inst.num_states(); ++s2) {
        double pr = (*p)(s, s2);
        if (pr == 0.0) continue;
        serve += pr * dp.at(t + 1, down, s2);
        skip += pr * dp.at(t + 1, cell, s2);
      }
    }
    d.opportunity_cost = skip - (serve - ty.reward);
    d.serve = serve >= skip;
    return d;
  };
}

}  // namespace nrm
