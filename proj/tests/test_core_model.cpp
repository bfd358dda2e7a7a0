#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "nrm/generators.hpp"
#include "nrm/model.hpp"

using namespace nrm;

namespace {
bool has_error(const ValidationReport& rep, const std::string& needle) {
  for (const auto& issue : rep.issues)
    if (issue.severity == "error" && issue.message.find(needle) != std::string::npos) return true;
  return false;
}
}  // namespace

TEST_CASE("validate accepts the tiny fixture") {
  auto rep = validate(fixtures::tiny1());
  CAPTURE(rep.issues.empty() ? "" : rep.issues[0].message);
  CHECK(rep.ok);
}

TEST_CASE("validate flags a sub-stochastic initial distribution") {
  auto inst = fixtures::tiny1();
  inst.arrival.initial = {0.5, 0.4};
  auto rep = validate(inst);
  CHECK_FALSE(rep.ok);
  CHECK(has_error(rep, "initial distribution sums to 0.9"));
}

TEST_CASE("validate flags zero capacity on a consumed resource") {
  auto inst = fixtures::tiny1();
  inst.capacities = {0};
  auto rep = validate(inst);
  CHECK_FALSE(rep.ok);
  CHECK(has_error(rep, "consumed resource has zero capacity"));
}

TEST_CASE("validate flags bad transition rows, rewards, and type ids") {
  auto inst = fixtures::tiny1();
  inst.arrival.transitions[0](0, 1) = 0.8;
  inst.types[1].reward = -1.0;
  inst.arrival.state_type[1] = 7;
  auto rep = validate(inst);
  CHECK(has_error(rep, "sums to 0.8"));
  CHECK(has_error(rep, "negative reward"));
  CHECK(has_error(rep, "unknown type"));
}

TEST_CASE("validate flags horizon/transition count mismatch") {
  auto inst = fixtures::tiny1();
  inst.arrival.horizon = 3;
  auto rep = validate(inst);
  CHECK(has_error(rep, "expected 2 transition matrices"));
}

TEST_CASE("normalize repairs small drift and strips idle zero-capacity resources") {
  auto inst = fixtures::tiny1();
  inst.arrival.initial = {0.5 + 3e-10, 0.5};
  inst.resource_names.push_back("idle");
  inst.capacities.push_back(0);
  inst.types[0].consumes.push_back(0);
  inst.types[1].consumes.push_back(0);
  normalize(inst);
  CHECK(inst.num_resources() == 1);
  double sum = inst.arrival.initial[0] + inst.arrival.initial[1];
  CHECK(std::abs(sum - 1.0) <= 1e-12);
  CHECK(validate(inst).ok);
}

TEST_CASE("bundle size L") {
  CHECK(bundle_size_L(fixtures::tiny1()) == 1);

  Instance inst;
  inst.resource_names = {"a", "b", "c"};
  inst.capacities = {1, 1, 1};
  inst.types = {
      {1.0, {1, 1, 0}},
      {1.0, {0, 1, 1}},
      {1.0, {1, 1, 1}},
  };
  inst.arrival.horizon = 1;
  inst.arrival.state_names = {"s"};
  inst.arrival.state_type = {0};
  inst.arrival.initial = {1.0};
  CHECK(bundle_size_L(inst) == 3);

  inst.types = {{0.0, {0, 0, 0}}};
  inst.arrival.state_type = {0};
  CHECK(bundle_size_L(inst) == 0);
}

TEST_CASE("state marginals on the tiny fixture") {
  Matrix marg = state_marginals(fixtures::tiny1().arrival);
  CHECK(marg(0, 0) == Catch::Approx(0.5));
  CHECK(marg(1, 0) == Catch::Approx(0.5));
}

TEST_CASE("state marginals of a deterministic self-loop stay put") {
  MarkovArrival arr;
  arr.horizon = 4;
  arr.state_names = {"A", "B"};
  arr.state_type = {0, 0};
  arr.initial = {1.0, 0.0};
  Matrix p(2, 2);
  p(0, 0) = 1.0;
  p(1, 1) = 1.0;
  arr.transitions = {p, p, p};
  Matrix marg = state_marginals(arr);
  for (int t = 0; t < 4; ++t) CHECK(marg(t, 0) == Catch::Approx(1.0));
}

TEST_CASE("uniform doubly stochastic transitions keep uniform marginals") {
  MarkovArrival arr;
  arr.horizon = 3;
  arr.state_names = {"A", "B", "C"};
  arr.state_type = {0, 0, 0};
  arr.initial = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  Matrix p(3, 3, 1.0 / 3);
  arr.transitions = {p, p};
  Matrix marg = state_marginals(arr);
  for (int t = 0; t < 3; ++t)
    for (int s = 0; s < 3; ++s) CHECK(marg(t, s) == Catch::Approx(1.0 / 3));
}

TEST_CASE("marginal rows sum to one on random instances") {
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 6, 5, 3});
    Matrix marg = state_marginals(inst.arrival);
    for (int t = 0; t < inst.horizon(); ++t) {
      double sum = 0.0;
      for (int s = 0; s < inst.num_states(); ++s) sum += marg(t, s);
      REQUIRE(std::abs(sum - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("bundle size dominates every type") {
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    auto inst = gen_random_small(seed, {3, 4, 6, 5, 3});
    int L = bundle_size_L(inst);
    for (const auto& ty : inst.types) REQUIRE(ty.bundle_size() <= L);
  }
}

TEST_CASE("feasible compares componentwise") {
  std::vector<int> c1{1}, a1{1};
  CHECK(feasible(c1, a1));
  std::vector<int> c2{0};
  CHECK_FALSE(feasible(c2, a1));
  std::vector<int> c3{2, 0}, a3{1, 0};
  CHECK(feasible(c3, a3));
  std::vector<int> short_a{1};
  CHECK_THROWS_AS(feasible(c3, short_a), std::invalid_argument);
}
