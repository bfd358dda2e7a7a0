#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "nrm/choice.hpp"
#include "nrm/model.hpp"
#include "nrm/policies.hpp"

namespace nrm {

// Bid prices plus the adjusted-best assortment picked at each (t, s).
struct AssortBidPriceTable {
  int T = 0, n = 0, S = 0;
  std::vector<double> nu;
  std::vector<std::vector<std::vector<int>>> chosen;  // chosen[t][s], t = 1..T

  AssortBidPriceTable() = default;
  AssortBidPriceTable(int T_, int n_, int S_)
      : T(T_), n(n_), S(S_), nu(static_cast<size_t>(T_ + 2) * n_ * S_, 0.0),
        chosen(T_ + 1, std::vector<std::vector<int>>(S_)) {}

  double at(int t, int j, int s) const { return nu[(static_cast<size_t>(t) * n + j) * S + s]; }
  double& at(int t, int j, int s) { return nu[(static_cast<size_t>(t) * n + j) * S + s]; }

  BidPriceTable as_bid_price_table() const {
    BidPriceTable b(T, n, S);
    b.nu = nu;
    return b;
  }
};

namespace detail {

// z_j = r_j minus the expected next-period bid-price mass of its bundle.
inline std::vector<double> adjusted_rewards(const Instance& inst,
                                            const std::vector<std::vector<int>>& consumers, int t,
                                            const Matrix& nu_next, int s) {
  const int n = inst.num_types(), m = inst.num_resources(), S = inst.num_states();
  std::vector<double> z(n, 0.0);
  std::vector<double> g(m, 0.0);  // expected per-resource mass along p_t(s, .)
  if (t < inst.horizon()) {
    const Matrix& p = inst.arrival.transitions[t - 1];
    for (int i = 0; i < m; ++i) {
      if (consumers[i].empty()) continue;
      double sum = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        double pr = p(s, s2);
        if (pr == 0.0) continue;
        for (int j : consumers[i]) sum += pr * nu_next(j, s2);
      }
      g[i] = sum / inst.capacities[i];
    }
  }
  for (int j = 0; j < n; ++j) {
    double v = inst.types[j].reward;
    for (int i = 0; i < m; ++i)
      if (inst.types[j].consumes[i]) v -= g[i];
    z[j] = v;
  }
  return z;
}

inline double assortment_value(const ChoiceModel& choice, int s, int a_idx,
                               const std::vector<double>& z, const Instance& inst) {
  double val = 0.0;
  for (int j : choice.family[a_idx]) {
    if (inst.types[j].is_null()) continue;
    val += choice.phi(s, a_idx, j) * std::max(0.0, z[j]);
  }
  return val;
}

}  // namespace detail

// Revenue-ordered scan for MNL models: nested prefixes of products sorted by
// adjusted reward. Optimal for MNL over the all-subsets family.
inline std::pair<std::vector<int>, double> revenue_ordered_best(const Instance& inst,
                                                                const ChoiceModel& choice, int s,
                                                                const std::vector<double>& z) {
  if (!choice.is_mnl()) throw std::invalid_argument("revenue-ordered search needs an MNL model");
  const auto& v = (*choice.mnl)[s];
  std::vector<int> order;
  for (int j = 0; j < inst.num_types(); ++j)
    if (!inst.types[j].is_null()) order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return z[a] > z[b]; });

  std::vector<int> best{0};
  double best_val = 0.0;
  double num = 0.0, den = v[0];
  std::vector<int> prefix{0};
  for (int j : order) {
    num += v[j] * std::max(0.0, z[j]);
    den += v[j];
    prefix.push_back(j);
    double val = den > 0.0 ? num / den : 0.0;
    if (val > best_val) {
      best_val = val;
      best = prefix;
    }
  }
  std::sort(best.begin(), best.end());
  return {best, best_val};
}

// Argmax over the family of the phi-weighted positive adjusted rewards.
// Ties break to the lexicographically smallest sorted index sequence. Families
// past the cap are only accepted through the MNL all-subsets shortcut.
inline std::pair<std::vector<int>, double> best_adjusted_assortment(const Instance& inst,
                                                                    const ChoiceModel& choice, int t,
                                                                    int s, const Matrix& nu_next,
                                                                    int family_cap = 4096) {
  auto consumers = detail::consumers_by_resource(inst);
  std::vector<double> z = detail::adjusted_rewards(inst, consumers, t, nu_next, s);

  if (static_cast<int>(choice.family.size()) > family_cap) {
    int non_null = 0;
    for (const auto& ty : inst.types)
      if (!ty.is_null()) ++non_null;
    bool all_subsets = choice.family.size() == (1ull << non_null);
    if (choice.is_mnl() && all_subsets) return revenue_ordered_best(inst, choice, s, z);
    throw std::invalid_argument("assortment family exceeds the enumeration cap of " +
                                std::to_string(family_cap));
  }

  int best = -1;
  double best_val = -1.0;
  for (size_t ia = 0; ia < choice.family.size(); ++ia) {
    double val = detail::assortment_value(choice, s, static_cast<int>(ia), z, inst);
    bool better = val > best_val;
    bool tie = best >= 0 && val == best_val &&
               std::lexicographical_compare(choice.family[ia].begin(), choice.family[ia].end(),
                                            choice.family[best].begin(), choice.family[best].end());
    if (better || tie) {
      best = static_cast<int>(ia);
      best_val = val;
    }
  }
  return {choice.family[best], best_val};
}

// Assortment bid-price recursion: back up expected prices, then credit each
// product offered by the adjusted-best assortment with its weighted positive
// adjusted reward.
inline AssortBidPriceTable compute_assort_bid_prices(const Instance& inst, const ChoiceModel& choice,
                                                     int family_cap = 4096) {
  detail::check_valid_for_lp(inst);
  validate_choice(choice, inst.num_states(), inst.num_types());
  if (auto rep = check_substitutability(choice, inst.num_states()); !rep.ok)
    throw std::invalid_argument("choice model violates substitutability: " + rep.violation);

  const int T = inst.horizon(), n = inst.num_types(), S = inst.num_states();
  AssortBidPriceTable tab(T, n, S);
  auto consumers = detail::consumers_by_resource(inst);

  Matrix nu_next(n, S);
  for (int t = T; t >= 1; --t) {
    for (int j = 0; j < n; ++j)
      for (int s = 0; s < S; ++s) nu_next(j, s) = tab.at(t + 1, j, s);

    const Matrix* p = t < T ? &inst.arrival.transitions[t - 1] : nullptr;
    for (int s = 0; s < S; ++s) {
      if (p)
        for (int s2 = 0; s2 < S; ++s2) {
          double pr = (*p)(s, s2);
          if (pr == 0.0) continue;
          for (int j = 0; j < n; ++j) tab.at(t, j, s) += pr * nu_next(j, s2);
        }
      std::vector<double> z = detail::adjusted_rewards(inst, consumers, t, nu_next, s);
      auto [pick, val] = best_adjusted_assortment(inst, choice, t, s, nu_next, family_cap);
      (void)val;
      for (int j : pick) {
        if (inst.types[j].is_null()) continue;
        int a_idx = choice.assortment_index(pick);
        double ph = a_idx >= 0 ? choice.phi(s, a_idx, j) : choice.phi_subset(s, pick, j);
        tab.at(t, j, s) += ph * std::max(0.0, z[j]);
      }
      tab.chosen[t][s] = pick;
    }
  }
  return tab;
}

// Offered set: the chosen assortment filtered down to products that still fit.
inline std::vector<int> offer(const AssortBidPriceTable& tab, const Instance& inst, int t, int s,
                              std::span<const int> c) {
  std::vector<int> out;
  for (int j : tab.chosen[t][s])
    if (feasible(c, inst.types[j].consumes)) out.push_back(j);
  return out;
}

}  // namespace nrm
