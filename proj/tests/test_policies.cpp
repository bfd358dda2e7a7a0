#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "nrm/generators.hpp"
#include "nrm/oracle.hpp"
#include "nrm/policies.hpp"

using namespace nrm;

TEST_CASE("bid prices on the tiny fixture match hand backward induction") {
  auto inst = fixtures::tiny1();
  auto tab = compute_bid_prices(inst);
  // t = 2 (terminal prices zero beyond): arriving type keeps its full reward.
  CHECK(tab.at(2, 0, 0) == Catch::Approx(5.0).margin(1e-12));  // nu^2_1(A)
  CHECK(tab.at(2, 1, 1) == Catch::Approx(2.0).margin(1e-12));  // nu^2_2(B)
  CHECK(tab.at(2, 1, 0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(tab.at(2, 0, 1) == Catch::Approx(0.0).margin(1e-15));
  // t = 1.
  CHECK(tab.at(1, 0, 0) == Catch::Approx(3.0).margin(1e-12));  // nu^1_1(A)
  CHECK(tab.at(1, 1, 0) == Catch::Approx(2.0).margin(1e-12));  // nu^1_2(A)
  CHECK(tab.at(1, 0, 1) == Catch::Approx(5.0).margin(1e-12));  // nu^1_1(B)
  CHECK(tab.at(1, 1, 1) == Catch::Approx(0.0).margin(1e-15));  // nu^1_2(B)
}

TEST_CASE("bid prices degenerate cases") {
  auto inst = fixtures::tiny1();
  inst.arrival.horizon = 1;
  inst.arrival.transitions.clear();
  auto tab = compute_bid_prices(inst);
  CHECK(tab.at(1, 0, 0) == Catch::Approx(5.0));
  CHECK(tab.at(1, 1, 1) == Catch::Approx(2.0));

  auto zero = fixtures::tiny1();
  zero.types[0].reward = 0.0;
  zero.types[1].reward = 0.0;
  auto ztab = compute_bid_prices(zero);
  for (double v : ztab.nu) CHECK(v == 0.0);
}

TEST_CASE("opportunity cost on the tiny fixture") {
  auto inst = fixtures::tiny1();
  auto tab = compute_bid_prices(inst);
  CHECK(opportunity_cost(tab, inst, 1, 0) == Catch::Approx(2.0).margin(1e-12));
  CHECK(opportunity_cost(tab, inst, 1, 1) == Catch::Approx(5.0).margin(1e-12));
  CHECK(opportunity_cost(tab, inst, 2, 0) == 0.0);
  CHECK(opportunity_cost(tab, inst, 2, 1) == 0.0);
}

TEST_CASE("opportunity cost rejects no-arrival states") {
  std::vector<CustomerType> types{{3.0, {1}}};
  SurvivalSpec spec;
  spec.rho = {0.5};
  spec.lambdas = {{1.0}, {1.0}};
  auto inst = encode_high_variance(spec, types, {1});
  auto tab = compute_bid_prices(inst);
  CHECK_THROWS_AS(opportunity_cost(tab, inst, 1, 0), std::invalid_argument);
}

TEST_CASE("bid-price decisions on the tiny fixture") {
  auto inst = fixtures::tiny1();
  auto tab = compute_bid_prices(inst);
  std::vector<int> c1{1}, c0{0};

  auto d = decide_bid_price(tab, inst, 1, 0, c1);
  CHECK(d.serve);
  CHECK(d.feasible);
  d = decide_bid_price(tab, inst, 1, 1, c1);
  CHECK_FALSE(d.serve);
  CHECK(d.feasible);
  d = decide_bid_price(tab, inst, 2, 0, c0);
  CHECK_FALSE(d.serve);
  CHECK_FALSE(d.feasible);
}

TEST_CASE("lower bound value of the bid prices") {
  auto inst = fixtures::tiny1();
  auto tab = compute_bid_prices(inst);
  CHECK(lower_bound_value(tab, inst.arrival) == Catch::Approx(5.0).margin(1e-12));

  auto zero = fixtures::tiny1();
  zero.types[0].reward = 0.0;
  zero.types[1].reward = 0.0;
  CHECK(lower_bound_value(compute_bid_prices(zero), zero.arrival) == 0.0);

  auto one = fixtures::tiny1();
  one.arrival.horizon = 1;
  one.arrival.transitions.clear();
  CHECK(lower_bound_value(compute_bid_prices(one), one.arrival) ==
        Catch::Approx(3.5).margin(1e-12));
}

TEST_CASE("exact value of the bid-price policy on the tiny fixture") {
  auto inst = fixtures::tiny1();
  auto tab = compute_bid_prices(inst);
  ServePolicy policy = [&](int t, int s, std::span<const int> c) {
    return decide_bid_price(tab, inst, t, s, c);
  };
  CHECK(exact_policy_value(inst, policy) == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("constructed LP weights on the tiny fixture") {
  auto inst = fixtures::tiny1();
  auto tab = compute_bid_prices(inst);
  AdpWeights w = construct_lp_solution(tab, inst);
  CHECK(w.th(1, 0) == Catch::Approx(5.0).margin(1e-12));
  CHECK(w.be(1, 0, 0) == Catch::Approx(5.0).margin(1e-12));

  auto rep = check_adp_feasibility(w, inst);
  CHECK(rep.min_slack == Catch::Approx(0.0).margin(1e-12));
  CHECK(rep.objective == Catch::Approx(10.0).margin(1e-12));
  int L = bundle_size_L(inst);
  CHECK(rep.objective <=
        (1.0 + L) * lower_bound_value(tab, inst.arrival) + 1e-9);
}

TEST_CASE("all-zero weights violate the reward bracket") {
  auto inst = fixtures::tiny1();
  AdpWeights w(2, 1, 2);
  auto rep = check_adp_feasibility(w, inst);
  CHECK(rep.min_slack == Catch::Approx(-5.0).margin(1e-12));
  CHECK(rep.t_at == 2);
  CHECK(rep.s_at == 0);
}

TEST_CASE("bid-price table invariants hold on random instances") {
  for (uint64_t seed = 1; seed <= 80; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 6, 5, 3});
    auto tab = compute_bid_prices(inst);
    for (double v : tab.nu) REQUIRE(v >= 0.0);
    // Monotone backup: nu^t >= E[nu^{t+1}].
    for (int t = 1; t <= inst.horizon() - 1; ++t) {
      const Matrix& p = inst.arrival.transitions[t - 1];
      for (int j = 0; j < inst.num_types(); ++j)
        for (int s = 0; s < inst.num_states(); ++s) {
          double backup = 0.0;
          for (int s2 = 0; s2 < inst.num_states(); ++s2) backup += p(s, s2) * tab.at(t + 1, j, s2);
          REQUIRE(tab.at(t, j, s) >= backup - 1e-12);
        }
    }
  }
}

TEST_CASE("performance guarantees hold on a random corpus") {
  for (uint64_t seed = 1; seed <= 120; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 6, 5, 3});
    auto tab = compute_bid_prices(inst);
    ServePolicy policy = [&](int t, int s, std::span<const int> c) {
      return decide_bid_price(tab, inst, t, s, c);
    };
    double alg = exact_policy_value(inst, policy);
    auto [opt, dp] = exact_dp(inst);
    int L = bundle_size_L(inst);
    REQUIRE(alg >= opt / (1.0 + L) - 1e-9);
    REQUIRE(alg >= lower_bound_value(tab, inst.arrival) - 1e-9);

    AdpWeights w = construct_lp_solution(tab, inst);
    auto rep = check_adp_feasibility(w, inst);
    REQUIRE(rep.min_slack >= -1e-9);
    REQUIRE(rep.objective <= (1.0 + L) * lower_bound_value(tab, inst.arrival) + 1e-9);
  }
}

TEST_CASE("greedy decisions") {
  auto inst = fixtures::tiny1();
  std::vector<int> c1{1}, c0{0};
  CHECK(decide_greedy(inst, 1, 1, c1).serve);
  CHECK_FALSE(decide_greedy(inst, 1, 1, c0).serve);
  auto zero = fixtures::tiny1();
  zero.types[0].reward = 0.0;
  CHECK_FALSE(decide_greedy(zero, 1, 0, c1).serve);
}

TEST_CASE("ADP heuristic at the last period serves any feasible arrival") {
  auto inst = fixtures::tiny1();
  AdpWeights w(2, 1, 2);
  std::vector<int> c1{1}, c0{0};
  CHECK(decide_adp_heuristic(w, inst, 2, 0, c1).serve);
  CHECK_FALSE(decide_adp_heuristic(w, inst, 2, 0, c0).serve);
}
