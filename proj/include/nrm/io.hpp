#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrm/model.hpp"
#include "nrm/policies.hpp"
#include "nrm/simulate.hpp"

namespace nrm {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kInstanceSchema = "nrm-instance/1";

namespace detail {
inline const ordered_json& require_field(const ordered_json& j, const char* key,
                                         const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw std::runtime_error(where + ": missing \"" + key + "\"");
  return *it;
}
}  // namespace detail

inline ordered_json choice_to_json(const ChoiceModel& choice) {
  ordered_json j;
  j["family"] = choice.family;
  if (choice.mnl) {
    j["phi"] = ordered_json{{"mnl", ordered_json{{"weights", *choice.mnl}}}};
  } else {
    j["phi"] = ordered_json{{"table", *choice.table}};
  }
  return j;
}

inline ChoiceModel choice_from_json(const ordered_json& j, const std::string& where) {
  ChoiceModel choice;
  choice.family = detail::require_field(j, "family", where).get<std::vector<std::vector<int>>>();
  const auto& phi = detail::require_field(j, "phi", where);
  if (phi.contains("mnl")) {
    choice.mnl = detail::require_field(phi["mnl"], "weights", where)
                     .get<std::vector<std::vector<double>>>();
  } else if (phi.contains("table")) {
    choice.table = phi["table"].get<std::vector<std::vector<std::vector<double>>>>();
  } else {
    throw std::runtime_error(where + ": \"phi\" needs either \"table\" or \"mnl\"");
  }
  return choice;
}

inline ordered_json instance_to_json(const Instance& inst, const std::string& manifest_ref = "") {
  ordered_json j;
  j["version"] = kInstanceSchema;
  j["horizon"] = inst.horizon();
  j["resources"] = ordered_json::array();
  for (int i = 0; i < inst.num_resources(); ++i)
    j["resources"].push_back({{"name", inst.resource_names[i]}, {"capacity", inst.capacities[i]}});
  j["types"] = ordered_json::array();
  for (const auto& ty : inst.types)
    j["types"].push_back({{"reward", ty.reward}, {"consumes", ty.consumes}});
  j["states"] = ordered_json::array();
  for (int s = 0; s < inst.num_states(); ++s)
    j["states"].push_back(
        {{"name", inst.arrival.state_names[s]}, {"type", inst.arrival.state_type[s]}});
  j["initial"] = inst.arrival.initial;
  j["transitions"] = ordered_json::array();
  for (const auto& p : inst.arrival.transitions) {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < p.rows; ++r)
      rows.push_back(std::vector<double>(p.row(r).begin(), p.row(r).end()));
    j["transitions"].push_back(std::move(rows));
  }
  if (inst.choice) j["choice"] = choice_to_json(*inst.choice);
  if (!manifest_ref.empty()) j["manifest"] = manifest_ref;
  return j;
}

inline Instance instance_from_json(const ordered_json& j, const std::string& where) {
  const auto& version = detail::require_field(j, "version", where);
  if (version.get<std::string>() != kInstanceSchema)
    throw std::runtime_error(where + ": unsupported schema version \"" +
                             version.get<std::string>() + "\"");
  Instance inst;
  int T = detail::require_field(j, "horizon", where).get<int>();
  for (const auto& r : detail::require_field(j, "resources", where)) {
    inst.resource_names.push_back(detail::require_field(r, "name", where).get<std::string>());
    inst.capacities.push_back(detail::require_field(r, "capacity", where).get<int>());
  }
  for (const auto& t : detail::require_field(j, "types", where)) {
    CustomerType ty;
    ty.reward = detail::require_field(t, "reward", where).get<double>();
    ty.consumes = detail::require_field(t, "consumes", where).get<std::vector<int>>();
    inst.types.push_back(std::move(ty));
  }
  inst.arrival.horizon = T;
  std::optional<int> null_type;
  for (int ty = 0; ty < inst.num_types(); ++ty)
    if (inst.types[ty].is_null() && !null_type) null_type = ty;
  for (const auto& s : detail::require_field(j, "states", where)) {
    inst.arrival.state_names.push_back(detail::require_field(s, "name", where).get<std::string>());
    const auto& ty = detail::require_field(s, "type", where);
    if (ty.is_null()) {
      if (!null_type) {
        null_type = inst.num_types();
        inst.types.push_back(CustomerType{0.0, std::vector<int>(inst.num_resources(), 0)});
      }
      inst.arrival.state_type.push_back(*null_type);
    } else {
      inst.arrival.state_type.push_back(ty.get<int>());
    }
  }
  inst.arrival.initial = detail::require_field(j, "initial", where).get<std::vector<double>>();
  const auto& trans = detail::require_field(j, "transitions", where);
  const int S = inst.num_states();
  for (const auto& pj : trans) {
    Matrix p(S, S);
    if (static_cast<int>(pj.size()) != S)
      throw std::runtime_error(where + ": transition matrix has wrong row count");
    for (int r = 0; r < S; ++r) {
      auto row = pj[r].get<std::vector<double>>();
      if (static_cast<int>(row.size()) != S)
        throw std::runtime_error(where + ": transition row has wrong length");
      for (int c2 = 0; c2 < S; ++c2) p(r, c2) = row[c2];
    }
    inst.arrival.transitions.push_back(std::move(p));
  }
  if (j.contains("choice")) inst.choice = choice_from_json(j["choice"], where);
  normalize(inst);
  return inst;
}

inline void write_instance(const Instance& inst, const std::string& path,
                           const std::string& manifest_ref = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << instance_to_json(inst, manifest_ref).dump(2) << "\n";
}

inline Instance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": parse error: " + e.what());
  }
  return instance_from_json(j, path);
}

inline ordered_json bid_price_table_to_json(const BidPriceTable& tab) {
  ordered_json nu = ordered_json::array();
  for (int t = 1; t <= tab.T + 1; ++t) {
    ordered_json per_type = ordered_json::array();
    for (int j = 0; j < tab.n; ++j) {
      std::vector<double> row(tab.S);
      for (int s = 0; s < tab.S; ++s) row[s] = tab.at(t, j, s);
      per_type.push_back(row);
    }
    nu.push_back(std::move(per_type));
  }
  return ordered_json{{"nu", std::move(nu)}};
}

inline ordered_json sim_result_to_json(const SimResult& res, bool include_rewards = false,
                                       const std::string& manifest_ref = "") {
  ordered_json j;
  j["mean"] = res.mean;
  j["stderr"] = res.stderr_;
  j["ci95"] = {res.ci_lo, res.ci_hi};
  j["replications"] = res.replications;
  j["base_seed"] = res.base_seed;
  j["generator"] = res.generator;
  if (include_rewards) j["rewards"] = res.rewards;
  if (!manifest_ref.empty()) j["manifest"] = manifest_ref;
  return j;
}

inline void dump_trace_csv(const RunResult& run, std::ostream& out) {
  out << "t,state,product,reward,remaining\n";
  for (const auto& step : run.trace) {
    out << step.t << "," << step.state << "," << step.product << "," << step.reward << ",";
    for (size_t i = 0; i < step.remaining.size(); ++i)
      out << (i ? ";" : "") << step.remaining[i];
    out << "\n";
  }
}

}  // namespace nrm
