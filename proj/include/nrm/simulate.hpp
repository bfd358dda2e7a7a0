#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrm/choice.hpp"
#include "nrm/model.hpp"
#include "nrm/oracle.hpp"

namespace nrm {

// Counter-style 64-bit generator; the whole simulation stack draws from it so
// results are reproducible from the recorded seeds alone.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() { return (next() >> 11) * 0x1.0p-53; }
};

inline uint64_t splitmix64_once(uint64_t x) {
  SplitMix64 g(x);
  return g.next();
}

struct Trajectory {
  std::vector<int> states;  // s_1..s_T
  uint64_t seed = 0;
};

// Inverse-CDF sampling over cumulative row sums, one uniform draw per step.
inline Trajectory sample_trajectory(const MarkovArrival& arrival, uint64_t seed) {
  Trajectory traj;
  traj.seed = seed;
  traj.states.reserve(arrival.horizon);
  SplitMix64 rng(seed);
  const int S = arrival.num_states();

  auto draw = [&](std::span<const double> dist) {
    double u = rng.uniform();
    double acc = 0.0;
    for (int s = 0; s < S; ++s) {
      acc += dist[s];
      if (u < acc) return s;
    }
    return S - 1;  // guard against accumulated rounding
  };

  int s = draw(arrival.initial);
  traj.states.push_back(s);
  for (int t = 1; t < arrival.horizon; ++t) {
    s = draw(arrival.transitions[t - 1].row(s));
    traj.states.push_back(s);
  }
  return traj;
}

struct StepTrace {
  int t = 0;
  int state = 0;
  int product = -1;  // served/chosen product id, -1 when nothing was consumed
  double reward = 0.0;
  std::vector<int> remaining;  // capacities after the step
};

struct RunResult {
  double reward = 0.0;
  std::vector<StepTrace> trace;
};

// Plays one sample path under a serve/skip policy, maintaining capacities.
// A policy that claims an infeasible serve is a bug and faults loudly.
inline RunResult run_policy(const Instance& inst, const ServePolicy& policy,
                            const Trajectory& traj) {
  RunResult res;
  std::vector<int> c = inst.capacities;
  for (int t = 1; t <= inst.horizon(); ++t) {
    int s = traj.states[t - 1];
    const CustomerType& ty = inst.state_customer(s);
    StepTrace step;
    step.t = t;
    step.state = s;
    if (!ty.is_null()) {
      Decision d = policy(t, s, c);
      if (d.serve) {
        if (!feasible(c, ty.consumes))
          throw std::runtime_error("policy served an infeasible request at t=" + std::to_string(t));
        for (int i = 0; i < inst.num_resources(); ++i) c[i] -= ty.consumes[i];
        res.reward += ty.reward;
        step.product = inst.type_of_state(s);
        step.reward = ty.reward;
      }
    }
    step.remaining = c;
    res.trace.push_back(std::move(step));
  }
  return res;
}

// Assortment version: the offered set is filtered by the policy; the customer
// picks a product by inverse CDF over the offered choice probabilities.
inline RunResult run_assort_policy(const Instance& inst, const ChoiceModel& choice,
                                   const AssortPolicy& policy, const Trajectory& traj,
                                   uint64_t choice_seed) {
  RunResult res;
  std::vector<int> c = inst.capacities;
  SplitMix64 rng(choice_seed);
  for (int t = 1; t <= inst.horizon(); ++t) {
    int s = traj.states[t - 1];
    StepTrace step;
    step.t = t;
    step.state = s;
    std::vector<int> offered = policy(t, s, c);
    for (int j : offered)
      if (!feasible(c, inst.types[j].consumes))
        throw std::runtime_error("policy offered an infeasible product at t=" + std::to_string(t));
    double u = rng.uniform();
    double acc = 0.0;
    int picked = offered.empty() ? -1 : offered.back();
    for (int j : offered) {
      acc += choice.phi_subset(s, offered, j);
      if (u < acc) {
        picked = j;
        break;
      }
    }
    if (picked >= 0 && !inst.types[picked].is_null()) {
      for (int i = 0; i < inst.num_resources(); ++i) c[i] -= inst.types[picked].consumes[i];
      res.reward += inst.types[picked].reward;
      step.product = picked;
      step.reward = inst.types[picked].reward;
    }
    step.remaining = c;
    res.trace.push_back(std::move(step));
  }
  return res;
}

struct SimResult {
  std::vector<double> rewards;
  double mean = 0.0;
  double stderr_ = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  int replications = 0;
  uint64_t base_seed = 0;
  std::string generator = "splitmix64";
};

namespace detail {
// Pairwise summation keeps the aggregate independent of evaluation order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}
}  // namespace detail

inline SimResult summarize(std::vector<double> rewards, uint64_t base_seed) {
  SimResult res;
  res.rewards = std::move(rewards);
  res.replications = static_cast<int>(res.rewards.size());
  res.base_seed = base_seed;
  res.mean = detail::pairwise_sum(res.rewards) / res.replications;
  if (res.replications > 1) {
    std::vector<double> sq(res.rewards.size());
    for (size_t k = 0; k < sq.size(); ++k) {
      double d = res.rewards[k] - res.mean;
      sq[k] = d * d;
    }
    double var = detail::pairwise_sum(sq) / (res.replications - 1);
    res.stderr_ = std::sqrt(var / res.replications);
  }
  res.ci_lo = res.mean - 1.96 * res.stderr_;
  res.ci_hi = res.mean + 1.96 * res.stderr_;
  return res;
}

// Replication r draws its trajectory stream from splitmix64(base_seed xor r)
// and its choice stream from the following value, so replications are
// independent and order-insensitive.
inline SimResult monte_carlo(const Instance& inst, const ServePolicy& policy, int replications,
                             uint64_t base_seed) {
  if (replications < 1) throw std::invalid_argument("replication count must be at least 1");
  std::vector<double> rewards(replications);
  for (int r = 0; r < replications; ++r) {
    uint64_t rep_seed = splitmix64_once(base_seed ^ static_cast<uint64_t>(r));
    Trajectory traj = sample_trajectory(inst.arrival, rep_seed);
    rewards[r] = run_policy(inst, policy, traj).reward;
  }
  return summarize(std::move(rewards), base_seed);
}

inline SimResult monte_carlo_assort(const Instance& inst, const ChoiceModel& choice,
                                    const AssortPolicy& policy, int replications,
                                    uint64_t base_seed) {
  if (replications < 1) throw std::invalid_argument("replication count must be at least 1");
  std::vector<double> rewards(replications);
  for (int r = 0; r < replications; ++r) {
    SplitMix64 seeder(base_seed ^ static_cast<uint64_t>(r));
    uint64_t traj_seed = seeder.next();
    uint64_t choice_seed = seeder.next();
    Trajectory traj = sample_trajectory(inst.arrival, traj_seed);
    rewards[r] = run_assort_policy(inst, choice, policy, traj, choice_seed).reward;
  }
  return summarize(std::move(rewards), base_seed);
}

}  // namespace nrm
