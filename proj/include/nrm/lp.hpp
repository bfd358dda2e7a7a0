#pragma once

#include <limits>
#include <string>
#include <vector>

namespace nrm {

enum class LpSense { minimize, maximize };
enum class RowSense { le, eq, ge };
enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration-limit";
  }
  return "?";
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse-triplet LP in the usual c, A, b, bounds form.
struct LinearProgram {
  LpSense sense = LpSense::minimize;

  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> var_names;

  std::vector<int> a_row, a_col;
  std::vector<double> a_val;
  std::vector<RowSense> row_sense;
  std::vector<double> rhs;

  // Optional structure hint: row indices starting each period block of a
  // time-staged model. Large-scale solves rely on it.
  std::vector<int> row_block_starts;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }

  int add_var(double obj, double lb = 0.0, double ub = kInf, std::string name = "") {
    objective.push_back(obj);
    lower.push_back(lb);
    upper.push_back(ub);
    if (name.empty()) name = "x" + std::to_string(objective.size() - 1);
    var_names.push_back(std::move(name));
    return num_vars() - 1;
  }

  int add_row(RowSense s, double b) {
    row_sense.push_back(s);
    rhs.push_back(b);
    return num_rows() - 1;
  }

  void add_entry(int r, int c, double v) {
    if (v == 0.0) return;
    a_row.push_back(r);
    a_col.push_back(c);
    a_val.push_back(v);
  }
};

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
  std::vector<double> primal;
  long iterations = 0;
};

}  // namespace nrm
