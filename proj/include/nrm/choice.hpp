#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nrm {

// Customer choice model over product assortments.
//
// Products are type ids of the owning instance; product 0 is the null product
// (zero reward, zero consumption) and belongs to every assortment. Choice
// probabilities are given either as an explicit per-(state, assortment) table
// or as MNL weights v_j(s), in which case
//   phi_j(A, s) = v_j(s) / sum_{j' in A} v_{j'}(s).
struct ChoiceModel {
  // Feasible assortments, each sorted ascending and containing product 0.
  std::vector<std::vector<int>> family;

  // Explicit table: table[s][a][k] = phi of family[a][k] in state s.
  std::optional<std::vector<std::vector<std::vector<double>>>> table;

  // MNL weights: mnl[s][j] = v_j(s) for j = 0..n_products-1.
  std::optional<std::vector<std::vector<double>>> mnl;

  bool is_mnl() const { return mnl.has_value(); }

  int num_products() const {
    if (mnl) return mnl->empty() ? 0 : static_cast<int>((*mnl)[0].size());
    int n = 0;
    for (const auto& a : family)
      for (int j : a) n = std::max(n, j + 1);
    return n;
  }

  int assortment_index(const std::vector<int>& a) const {
    for (size_t k = 0; k < family.size(); ++k)
      if (family[k] == a) return static_cast<int>(k);
    return -1;
  }

  // Choice probability of product j when assortment family[a_idx] is offered in state s.
  double phi(int s, int a_idx, int j) const {
    const auto& a = family[a_idx];
    auto it = std::lower_bound(a.begin(), a.end(), j);
    if (it == a.end() || *it != j) return 0.0;
    if (mnl) {
      double denom = 0.0;
      for (int k : a) denom += (*mnl)[s][k];
      if (denom <= 0.0) throw std::runtime_error("MNL weights sum to zero over an assortment");
      return (*mnl)[s][j] / denom;
    }
    if (!table) throw std::runtime_error("choice model has neither a phi table nor MNL weights");
    return (*table)[s][a_idx][static_cast<size_t>(it - a.begin())];
  }

  // Choice probability for an arbitrary feasible subset (used when a policy
  // offers a capacity-filtered assortment). Falls back to the family entry.
  double phi_subset(int s, const std::vector<int>& a, int j) const {
    if (mnl) {
      if (std::find(a.begin(), a.end(), j) == a.end()) return 0.0;
      double denom = 0.0;
      for (int k : a) denom += (*mnl)[s][k];
      if (denom <= 0.0) throw std::runtime_error("MNL weights sum to zero over an assortment");
      return (*mnl)[s][j] / denom;
    }
    int idx = assortment_index(a);
    if (idx < 0) throw std::runtime_error("offered assortment is not in the family");
    return phi(s, idx, j);
  }
};

struct SubstitutabilityReport {
  bool ok = true;
  std::string violation;  // description of the first failure, empty when ok
};

// Checks downward closure of the family and that adding a product never
// increases an incumbent product's choice probability. Exhaustive over the
// explicit family; MNL models satisfy both by construction but are checked
// against the stated family anyway.
inline SubstitutabilityReport check_substitutability(const ChoiceModel& choice, int num_states) {
  SubstitutabilityReport rep;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    rep.violation = std::move(msg);
    return rep;
  };

  for (const auto& a : choice.family) {
    if (a.empty() || a.front() != 0)
      return fail("assortment missing the null product 0");
    if (!std::is_sorted(a.begin(), a.end()))
      return fail("assortment indices not sorted");
  }
  if (choice.assortment_index({0}) < 0) return fail("family does not contain {0}");

  // Downward closure: every subset (containing 0) of a family member is a member.
  for (const auto& a : choice.family) {
    int extras = static_cast<int>(a.size()) - 1;
    for (uint32_t mask = 0; mask < (1u << extras); ++mask) {
      std::vector<int> b{0};
      for (int k = 0; k < extras; ++k)
        if (mask & (1u << k)) b.push_back(a[k + 1]);
      if (choice.assortment_index(b) < 0) {
        std::string s = "{";
        for (int j : b) s += std::to_string(j) + ",";
        s.back() = '}';
        return fail("family not downward closed: missing subset " + s);
      }
    }
  }

  // phi_j(A, s) >= phi_j(A u {j'}, s) for every A, superset pair in the family.
  for (int s = 0; s < num_states; ++s) {
    for (size_t ia = 0; ia < choice.family.size(); ++ia) {
      const auto& a = choice.family[ia];
      for (size_t ib = 0; ib < choice.family.size(); ++ib) {
        const auto& b = choice.family[ib];
        if (b.size() != a.size() + 1) continue;
        if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) continue;
        for (int j : a) {
          double pa = choice.phi(s, static_cast<int>(ia), j);
          double pb = choice.phi(s, static_cast<int>(ib), j);
          if (pb > pa + 1e-12) {
            return fail("substitutability violated at state " + std::to_string(s) + ": phi_" +
                        std::to_string(j) + " rises from " + std::to_string(pa) + " to " +
                        std::to_string(pb) + " when enlarging the assortment");
          }
        }
      }
    }
  }
  return rep;
}

// Sum of phi over each assortment must be 1; basic shape checks.
inline void validate_choice(const ChoiceModel& choice, int num_states, int num_types) {
  if (!choice.table && !choice.mnl)
    throw std::invalid_argument("choice model needs a phi table or MNL weights");
  for (const auto& a : choice.family)
    for (int j : a)
      if (j < 0 || j >= num_types)
        throw std::invalid_argument("choice family references unknown product " + std::to_string(j));
  for (int s = 0; s < num_states; ++s) {
    for (size_t ia = 0; ia < choice.family.size(); ++ia) {
      double sum = 0.0;
      for (int j : choice.family[ia]) sum += choice.phi(s, static_cast<int>(ia), j);
      if (std::abs(sum - 1.0) > 1e-10)
        throw std::invalid_argument("choice probabilities over assortment " + std::to_string(ia) +
                                    " in state " + std::to_string(s) + " sum to " + std::to_string(sum));
    }
  }
}

}  // namespace nrm
