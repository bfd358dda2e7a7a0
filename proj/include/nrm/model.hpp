#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrm/choice.hpp"
#include "nrm/matrix.hpp"

namespace nrm {

// A customer type: one reward, one binary resource bundle.
struct CustomerType {
  double reward = 0.0;
  std::vector<int> consumes;  // a_{i,j} in {0,1}, length m

  // Null types model no-arrival states and the no-purchase product.
  bool is_null() const {
    if (reward != 0.0) return false;
    for (int a : consumes)
      if (a != 0) return false;
    return true;
  }

  int bundle_size() const {
    int s = 0;
    for (int a : consumes) s += a;
    return s;
  }

  bool operator==(const CustomerType&) const = default;
};

// Time-inhomogeneous Markov chain driving arrivals. States carry a type id;
// transitions exist for t = 1..T-1 only, anything referencing p_T is zero.
struct MarkovArrival {
  int horizon = 0;                       // T >= 1
  std::vector<std::string> state_names;  // |S| entries
  std::vector<int> state_type;           // j(s), indexes into Instance::types
  std::vector<double> initial;           // p_1(s)
  std::vector<Matrix> transitions;       // T-1 row-stochastic |S| x |S| matrices

  int num_states() const { return static_cast<int>(state_names.size()); }

  bool operator==(const MarkovArrival&) const = default;
};

struct Instance {
  std::vector<std::string> resource_names;  // m entries
  std::vector<int> capacities;              // C_i, nonnegative integers
  std::vector<CustomerType> types;
  MarkovArrival arrival;
  std::optional<ChoiceModel> choice;

  int num_resources() const { return static_cast<int>(capacities.size()); }
  int num_types() const { return static_cast<int>(types.size()); }
  int num_states() const { return arrival.num_states(); }
  int horizon() const { return arrival.horizon; }

  int type_of_state(int s) const { return arrival.state_type[s]; }
  const CustomerType& state_customer(int s) const { return types[arrival.state_type[s]]; }
  bool state_is_null(int s) const { return state_customer(s).is_null(); }
};

struct ValidationIssue {
  std::string severity;  // "error" or "warning"
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;

  void error(std::string msg) {
    ok = false;
    issues.push_back({"error", std::move(msg)});
  }
  void warning(std::string msg) { issues.push_back({"warning", std::move(msg)}); }
};

namespace detail {
inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}
}  // namespace detail

// Renormalizes the initial distribution and every transition row whose sum
// drifted by at most 1e-9 (file round-trips), and drops zero-capacity
// resources that no type consumes. Rows further off are left for validate().
inline void normalize(Instance& inst) {
  auto fix_row = [](std::span<double> row) {
    double sum = 0.0;
    for (double v : row) sum += v;
    // Rows already stochastic to machine precision stay untouched so that a
    // write/read cycle is a bitwise fixed point.
    if (sum > 0.0 && std::abs(sum - 1.0) > 1e-14 && std::abs(sum - 1.0) <= 1e-9)
      for (double& v : row) v /= sum;
  };
  fix_row(inst.arrival.initial);
  for (auto& p : inst.arrival.transitions)
    for (int r = 0; r < p.rows; ++r) fix_row(p.row(r));

  std::vector<int> keep;
  for (int i = 0; i < inst.num_resources(); ++i) {
    bool consumed = false;
    for (const auto& ty : inst.types)
      if (i < static_cast<int>(ty.consumes.size()) && ty.consumes[i] != 0) consumed = true;
    if (inst.capacities[i] > 0 || consumed) keep.push_back(i);
  }
  if (keep.size() != inst.capacities.size()) {
    std::vector<std::string> names;
    std::vector<int> caps;
    for (int i : keep) {
      names.push_back(inst.resource_names[i]);
      caps.push_back(inst.capacities[i]);
    }
    inst.resource_names = std::move(names);
    inst.capacities = std::move(caps);
    for (auto& ty : inst.types) {
      std::vector<int> row;
      for (int i : keep) row.push_back(i < static_cast<int>(ty.consumes.size()) ? ty.consumes[i] : 0);
      ty.consumes = std::move(row);
    }
  }
}

inline ValidationReport validate(const Instance& inst) {
  ValidationReport rep;
  const int m = inst.num_resources();
  const int S = inst.num_states();
  const int T = inst.arrival.horizon;

  if (T < 1) rep.error("horizon must be at least 1, got " + std::to_string(T));
  if (static_cast<int>(inst.resource_names.size()) != m)
    rep.error("resource name count does not match capacity count");
  for (int i = 0; i < m; ++i)
    if (inst.capacities[i] < 0)
      rep.error("negative capacity for resource " + inst.resource_names[i]);

  for (int j = 0; j < inst.num_types(); ++j) {
    const auto& ty = inst.types[j];
    if (ty.reward < 0.0) rep.error("negative reward for type " + std::to_string(j));
    if (static_cast<int>(ty.consumes.size()) != m)
      rep.error("type " + std::to_string(j) + " consumption vector has wrong length");
    for (int a : ty.consumes)
      if (a != 0 && a != 1) rep.error("type " + std::to_string(j) + " consumption entries must be 0 or 1");
  }

  if (static_cast<int>(inst.arrival.state_type.size()) != S)
    rep.error("state type map has wrong length");
  for (int s = 0; s < S; ++s) {
    int j = inst.arrival.state_type[s];
    if (j < 0 || j >= inst.num_types())
      rep.error("state " + std::to_string(s) + " references unknown type " + std::to_string(j));
  }

  // Capacity 0 on a consumed resource makes the bid-price normalization ill-defined.
  for (int i = 0; i < m; ++i) {
    bool consumed = false;
    for (const auto& ty : inst.types)
      if (i < static_cast<int>(ty.consumes.size()) && ty.consumes[i] != 0) consumed = true;
    if (consumed && inst.capacities[i] == 0)
      rep.error("consumed resource has zero capacity (" + inst.resource_names[i] + ")");
  }

  if (static_cast<int>(inst.arrival.initial.size()) != S) {
    rep.error("initial distribution has wrong length");
  } else {
    double sum = 0.0;
    bool in_range = true;
    for (double v : inst.arrival.initial) {
      sum += v;
      if (v < 0.0 || v > 1.0) in_range = false;
    }
    if (!in_range) rep.error("initial distribution has entries outside [0,1]");
    if (std::abs(sum - 1.0) > 1e-9) rep.error("initial distribution sums to " + detail::fmt_g(sum));
  }

  if (static_cast<int>(inst.arrival.transitions.size()) != T - 1) {
    rep.error("expected " + std::to_string(T - 1) + " transition matrices for horizon " +
              std::to_string(T) + ", got " + std::to_string(inst.arrival.transitions.size()));
  } else {
    for (int t = 0; t < T - 1; ++t) {
      const Matrix& p = inst.arrival.transitions[t];
      if (p.rows != S || p.cols != S) {
        rep.error("transition matrix t=" + std::to_string(t + 1) + " has wrong shape");
        continue;
      }
      for (int r = 0; r < S; ++r) {
        double sum = 0.0;
        bool in_range = true;
        for (double v : p.row(r)) {
          sum += v;
          if (v < 0.0 || v > 1.0) in_range = false;
        }
        if (!in_range)
          rep.error("transition row t=" + std::to_string(t + 1) + " state " +
                    inst.arrival.state_names[r] + " has entries outside [0,1]");
        if (std::abs(sum - 1.0) > 1e-9)
          rep.error("transition row t=" + std::to_string(t + 1) + " state " +
                    inst.arrival.state_names[r] + " sums to " + detail::fmt_g(sum));
      }
    }
  }

  if (inst.choice) {
    try {
      validate_choice(*inst.choice, S, inst.num_types());
    } catch (const std::exception& e) {
      rep.error(e.what());
    }
    if (!inst.types.empty() && !inst.types[0].is_null())
      rep.error("choice instances require type 0 to be the null product");
  }
  return rep;
}

// L = max_j sum_i a_{i,j}, the largest bundle any single customer requests.
inline int bundle_size_L(const Instance& inst) {
  int L = 0;
  for (const auto& ty : inst.types) L = std::max(L, ty.bundle_size());
  return L;
}

// Marginal state distributions P(s_t = s), rows t = 1..T.
inline Matrix state_marginals(const MarkovArrival& arrival) {
  const int S = arrival.num_states();
  Matrix out(arrival.horizon, S);
  for (int s = 0; s < S; ++s) out(0, s) = arrival.initial[s];
  for (int t = 1; t < arrival.horizon; ++t) {
    const Matrix& p = arrival.transitions[t - 1];
    for (int s = 0; s < S; ++s) {
      double mass = out(t - 1, s);
      if (mass == 0.0) continue;
      for (int s2 = 0; s2 < S; ++s2) out(t, s2) += mass * p(s, s2);
    }
  }
  return out;
}

// Componentwise capacity check behind every serve decision.
inline bool feasible(std::span<const int> c, std::span<const int> a) {
  if (c.size() != a.size()) throw std::invalid_argument("capacity/consumption length mismatch");
  for (size_t i = 0; i < c.size(); ++i)
    if (c[i] < a[i]) return false;
  return true;
}

}  // namespace nrm
