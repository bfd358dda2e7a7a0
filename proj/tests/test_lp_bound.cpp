#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "nrm/adp.hpp"
#include "nrm/generators.hpp"
#include "nrm/oracle.hpp"
#include "nrm/policies.hpp"
#include "nrm/solver.hpp"

using namespace nrm;

TEST_CASE("bound LP value on the tiny fixture is 7") {
  auto [lp, ix] = build_adp_lp(fixtures::tiny1());
  auto sol = solve(lp, {LpBackend::dense});
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == Catch::Approx(7.0).margin(1e-9));
}

TEST_CASE("bound LP on a zero-reward instance is 0") {
  auto inst = fixtures::tiny1();
  inst.types[0].reward = 0.0;
  inst.types[1].reward = 0.0;
  auto [lp, ix] = build_adp_lp(inst);
  auto sol = solve(lp, {LpBackend::dense});
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("bound LP with one period and one state is the reward") {
  Instance inst;
  inst.resource_names = {"r0"};
  inst.capacities = {1};
  inst.types = {{7.0, {1}}};
  inst.arrival.horizon = 1;
  inst.arrival.state_names = {"s"};
  inst.arrival.state_type = {0};
  inst.arrival.initial = {1.0};
  auto [lp, ix] = build_adp_lp(inst);
  auto sol = solve(lp, {LpBackend::dense});
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == Catch::Approx(7.0).margin(1e-9));
}

TEST_CASE("extracted weights on the tiny fixture pin the terminal thetas") {
  auto inst = fixtures::tiny1();
  auto [lp, ix] = build_adp_lp(inst);
  auto sol = solve(lp, {LpBackend::dense});
  REQUIRE(sol.status == LpStatus::optimal);
  AdpWeights w = extract_weights(sol, ix);
  CHECK(w.th(2, 0) == Catch::Approx(5.0).margin(1e-7));
  CHECK(w.th(2, 1) == Catch::Approx(2.0).margin(1e-7));
  CHECK(w.min_entry() >= -1e-9);

  auto rep = check_adp_feasibility(w, inst);
  CHECK(rep.min_slack >= -1e-9);
  CHECK(rep.objective == Catch::Approx(7.0).margin(1e-7));

  // The heuristic threshold at (t=1, state A) is E[beta^2] = beta^2(B) <= 5,
  // so the reward-5 request is served at any optimal vertex.
  std::vector<int> c{1};
  auto d = decide_adp_heuristic(w, inst, 1, 0, c);
  CHECK(d.opportunity_cost == Catch::Approx(w.be(2, 0, 1)).margin(1e-12));
  CHECK(d.serve);
}

TEST_CASE("extract_weights rejects non-optimal solves") {
  auto [lp, ix] = build_adp_lp(fixtures::tiny1());
  LpSolution sol;
  sol.status = LpStatus::iteration_limit;
  CHECK_THROWS_AS(extract_weights(sol, ix), std::invalid_argument);
}

TEST_CASE("bound LP dominates the exact DP on a random corpus") {
  for (uint64_t seed = 1; seed <= 120; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 6, 5, 3});
    auto [lp, ix] = build_adp_lp(inst);
    auto sol = solve(lp, {LpBackend::dense});
    REQUIRE(sol.status == LpStatus::optimal);
    auto [opt, dp] = exact_dp(inst);
    REQUIRE(sol.objective >= opt - 1e-7);
  }
}

TEST_CASE("epigraph variables are tight at the solved vertex") {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 6, 5, 3});
    auto [lp, ix] = build_adp_lp(inst);
    auto sol = solve(lp, {LpBackend::dense});
    REQUIRE(sol.status == LpStatus::optimal);
    AdpWeights w = extract_weights(sol, ix);
    for (int t = 1; t <= inst.horizon(); ++t) {
      const Matrix* p = t < inst.horizon() ? &inst.arrival.transitions[t - 1] : nullptr;
      for (int s = 0; s < inst.num_states(); ++s) {
        const CustomerType& ty = inst.state_customer(s);
        double bracket = ty.reward;
        if (p)
          for (int i = 0; i < inst.num_resources(); ++i) {
            if (!ty.consumes[i]) continue;
            for (int s2 = 0; s2 < inst.num_states(); ++s2)
              bracket -= (*p)(s, s2) * w.be(t + 1, i, s2);
          }
        double u = sol.primal[ix.u(t, s)];
        REQUIRE(u >= std::max(0.0, bracket) - 1e-7);
        REQUIRE(u <= std::max(0.0, bracket) + 1e-7);
      }
    }
  }
}

TEST_CASE("round-trip: extracted weights are feasible for their own instance") {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 6, 5, 3});
    auto [lp, ix] = build_adp_lp(inst);
    auto sol = solve(lp, {LpBackend::dense});
    REQUIRE(sol.status == LpStatus::optimal);
    AdpWeights w = extract_weights(sol, ix);
    auto rep = check_adp_feasibility(w, inst);
    REQUIRE(rep.min_slack >= -1e-9);
    REQUIRE(rep.objective == Catch::Approx(sol.objective).margin(1e-6));
  }
}

TEST_CASE("fluid bound examples") {
  std::vector<CustomerType> types{{3.0, {1}}};

  SECTION("binding capacity") {
    SurvivalSpec spec;
    spec.rho = {1.0};
    spec.lambdas = {{1.0}, {1.0}};
    auto inst = encode_high_variance(spec, types, {1});
    auto lp = build_fluid_uf_lp(inst);
    auto sol = solve(lp, {LpBackend::dense});
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.objective == Catch::Approx(3.0).margin(1e-9));
  }

  SECTION("ample capacity hits the lambda caps") {
    SurvivalSpec spec;
    spec.rho = {0.6};
    spec.lambdas = {{1.0}, {1.0}};
    auto inst = encode_high_variance(spec, types, {100});
    auto lp = build_fluid_uf_lp(inst);
    auto sol = solve(lp, {LpBackend::dense});
    REQUIRE(sol.status == LpStatus::optimal);
    // P(s_1 typed) = 1, P(s_2 typed) = 0.6, lambda = 1 each period.
    CHECK(sol.objective == Catch::Approx(3.0 * (1.0 + 0.6)).margin(1e-9));
  }

  SECTION("zero rewards") {
    std::vector<CustomerType> zero{{0.0, {1}}};
    SurvivalSpec spec;
    spec.rho = {1.0};
    spec.lambdas = {{1.0}, {1.0}};
    auto inst = encode_high_variance(spec, zero, {1});
    auto lp = build_fluid_uf_lp(inst);
    auto sol = solve(lp, {LpBackend::dense});
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.objective == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("rejects instances without the high-variance shape") {
    CHECK_THROWS_AS(build_fluid_uf_lp(fixtures::tiny1()), std::invalid_argument);
  }
}

TEST_CASE("constructed bid-price weights are never better than the LP optimum") {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 6, 5, 3});
    auto tab = compute_bid_prices(inst);
    AdpWeights w = construct_lp_solution(tab, inst);
    auto rep = check_adp_feasibility(w, inst);
    REQUIRE(rep.min_slack >= -1e-9);
    auto [lp, ix] = build_adp_lp(inst);
    auto sol = solve(lp, {LpBackend::dense});
    REQUIRE(sol.status == LpStatus::optimal);
    REQUIRE(rep.objective >= sol.objective - 1e-7);
  }
}
