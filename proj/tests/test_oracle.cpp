#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "nrm/generators.hpp"
#include "nrm/oracle.hpp"

using namespace nrm;

namespace {
// Structure-free recursive optimum, independent of the lattice DP's indexing.
double brute_value(const Instance& inst, int t, std::vector<int>& c, int s) {
  const CustomerType& ty = inst.state_customer(s);
  auto expect_next = [&](std::vector<int>& cap) {
    if (t >= inst.horizon()) return 0.0;
    const Matrix& p = inst.arrival.transitions[t - 1];
    double v = 0.0;
    for (int s2 = 0; s2 < inst.num_states(); ++s2)
      if (p(s, s2) != 0.0) v += p(s, s2) * brute_value(inst, t + 1, cap, s2);
    return v;
  };
  double skip = expect_next(c);
  if (ty.is_null() || !feasible(c, ty.consumes)) return skip;
  for (int i = 0; i < inst.num_resources(); ++i) c[i] -= ty.consumes[i];
  double serve = ty.reward + expect_next(c);
  for (int i = 0; i < inst.num_resources(); ++i) c[i] += ty.consumes[i];
  return std::max(skip, serve);
}

double brute_force_optimum(const Instance& inst) {
  std::vector<int> c = inst.capacities;
  double v = 0.0;
  for (int s = 0; s < inst.num_states(); ++s)
    if (inst.arrival.initial[s] != 0.0)
      v += inst.arrival.initial[s] * brute_value(inst, 1, c, s);
  return v;
}
}  // namespace

TEST_CASE("exact DP on the tiny fixture") {
  auto [value, tab] = exact_dp(fixtures::tiny1());
  CHECK(value == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("exact DP with zero capacity collects nothing") {
  auto inst = fixtures::tiny1();
  inst.capacities = {0};
  auto [value, tab] = exact_dp(inst);
  CHECK(value == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("exact DP with one period is the expected feasible reward") {
  auto inst = fixtures::tiny1();
  inst.arrival.horizon = 1;
  inst.arrival.transitions.clear();
  auto [value, tab] = exact_dp(inst);
  CHECK(value == Catch::Approx(0.5 * 5.0 + 0.5 * 2.0).margin(1e-12));
}

TEST_CASE("exact DP refuses oversized lattices") {
  auto inst = fixtures::tiny1();
  CHECK_THROWS_WITH(exact_dp(inst, 10), Catch::Matchers::ContainsSubstring("Monte-Carlo"));
}

TEST_CASE("exact DP matches structure-free brute force on micro instances") {
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    auto inst = gen_random_small(seed, {2, 3, 3, 3, 1});
    auto [value, tab] = exact_dp(inst);
    REQUIRE(value == Catch::Approx(brute_force_optimum(inst)).margin(1e-12));
  }
}

TEST_CASE("DP table is monotone in capacity") {
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 5, 4, 3});
    auto [value, tab] = exact_dp(inst);
    for (int t = 1; t <= tab.T; ++t)
      for (long long cell = 0; cell < tab.cells; ++cell) {
        std::vector<int> c(tab.m);
        tab.decode(cell, c);
        for (int i = 0; i < tab.m; ++i) {
          if (c[i] + 1 > tab.caps[i]) continue;
          long long up = cell + tab.strides[i];
          for (int s = 0; s < tab.S; ++s) REQUIRE(tab.at(t, cell, s) <= tab.at(t, up, s) + 1e-12);
        }
      }
  }
}

TEST_CASE("greedy readout of the DP table reproduces the DP value") {
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 5, 4, 3});
    auto [value, tab] = exact_dp(inst);
    double replay = exact_policy_value(inst, make_dp_policy(inst, tab));
    REQUIRE(replay == Catch::Approx(value).margin(1e-12));
  }
}

TEST_CASE("policy evaluation on the tiny fixture") {
  auto inst = fixtures::tiny1();
  ServePolicy never = [](int, int, std::span<const int>) { return Decision{}; };
  CHECK(exact_policy_value(inst, never) == Catch::Approx(0.0).margin(1e-15));

  ServePolicy greedy = [&inst](int t, int s, std::span<const int> c) {
    return decide_greedy(inst, t, s, c);
  };
  CHECK(exact_policy_value(inst, greedy) == Catch::Approx(3.5).margin(1e-12));
}

TEST_CASE("policy evaluation faults on infeasible serves") {
  auto inst = fixtures::tiny1();
  ServePolicy reckless = [](int, int, std::span<const int>) {
    Decision d;
    d.serve = true;
    d.feasible = true;
    return d;
  };
  CHECK_THROWS_WITH(exact_policy_value(inst, reckless),
                    Catch::Matchers::ContainsSubstring("infeasible"));
}
