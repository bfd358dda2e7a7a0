#pragma once

#include "nrm/model.hpp"

namespace fixtures {

// Two-period alternating fixture: one unit of one resource, a high type in
// state A and a low type in state B, deterministic alternation, uniform start.
inline nrm::Instance tiny1() {
  nrm::Instance inst;
  inst.resource_names = {"r0"};
  inst.capacities = {1};
  inst.types = {
      {5.0, {1}},
      {2.0, {1}},
  };
  inst.arrival.horizon = 2;
  inst.arrival.state_names = {"A", "B"};
  inst.arrival.state_type = {0, 1};
  inst.arrival.initial = {0.5, 0.5};
  nrm::Matrix p(2, 2);
  p(0, 1) = 1.0;
  p(1, 0) = 1.0;
  inst.arrival.transitions.push_back(p);
  return inst;
}

// tiny1 with a null product prepended so it can carry choice models; states
// point at products 1 (reward 5) and 2 (reward 2).
inline nrm::Instance tiny1_products() {
  nrm::Instance inst = tiny1();
  inst.types = {
      {0.0, {0}},
      {5.0, {1}},
      {2.0, {1}},
  };
  inst.arrival.state_type = {1, 2};
  return inst;
}

// Single-state, single-period instance with products (5, 2) and the explicit
// substitutable phi table used throughout the assortment examples.
inline nrm::Instance assort_fixture() {
  nrm::Instance inst;
  inst.resource_names = {"r0"};
  inst.capacities = {1};
  inst.types = {
      {0.0, {0}},
      {5.0, {1}},
      {2.0, {1}},
  };
  inst.arrival.horizon = 1;
  inst.arrival.state_names = {"s"};
  inst.arrival.state_type = {1};
  inst.arrival.initial = {1.0};
  return inst;
}

inline nrm::ChoiceModel assort_fixture_choice() {
  nrm::ChoiceModel choice;
  choice.family = {{0}, {0, 1}, {0, 2}, {0, 1, 2}};
  choice.table = std::vector<std::vector<std::vector<double>>>{{
      {1.0},
      {0.5, 0.5},
      {0.5, 0.5},
      {0.3, 0.4, 0.3},
  }};
  return choice;
}

}  // namespace fixtures
