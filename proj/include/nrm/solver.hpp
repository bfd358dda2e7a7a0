#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nrm/ipm.hpp"
#include "nrm/lp.hpp"
#include "nrm/simplex.hpp"

namespace nrm {

enum class LpBackend { automatic, dense, ipm };

struct SolveOptions {
  LpBackend backend = LpBackend::automatic;
  long max_iterations = 0;  // dense: 0 means 50*(rows+cols)
};

// Rough dense-tableau cell count; past this the tableau stops being sensible
// on a desk machine and the banded interior-point backend takes over.
inline bool dense_fits(const LinearProgram& lp) {
  double rows = lp.num_rows();
  double cols = lp.num_vars() + 2.0 * lp.num_rows();
  return rows <= 4000 && rows * cols <= 4e7;
}

// Solves an LP through the configured backend and enforces the LpSolution
// contract: an optimal solution satisfies every row within 1e-7 and its
// objective matches c'x within 1e-7*(1+|obj|).
inline LpSolution solve(const LinearProgram& lp, const SolveOptions& opt = {}) {
  LpBackend backend = opt.backend;
  if (backend == LpBackend::automatic)
    backend = dense_fits(lp) || !BandedIpm::applicable(lp) ? LpBackend::dense : LpBackend::ipm;

  LpSolution sol;
  if (backend == LpBackend::dense) {
    DenseSimplex::Options dopt;
    dopt.max_iterations = opt.max_iterations;
    sol = DenseSimplex(dopt).solve(lp);
  } else {
    sol = BandedIpm().solve(lp);
  }
  if (sol.status != LpStatus::optimal) return sol;

  std::vector<double> act(lp.num_rows(), 0.0);
  for (size_t k = 0; k < lp.a_val.size(); ++k)
    act[lp.a_row[k]] += lp.a_val[k] * sol.primal[lp.a_col[k]];
  for (int r = 0; r < lp.num_rows(); ++r) {
    double tol = 1e-7 * (1.0 + std::abs(lp.rhs[r]));
    double gap = act[r] - lp.rhs[r];
    bool ok = lp.row_sense[r] == RowSense::le   ? gap <= tol
              : lp.row_sense[r] == RowSense::ge ? gap >= -tol
                                                : std::abs(gap) <= tol;
    if (!ok) throw std::runtime_error("solver returned an infeasible point at row " + std::to_string(r));
  }
  double obj = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j) obj += lp.objective[j] * sol.primal[j];
  if (std::abs(obj - sol.objective) > 1e-7 * (1.0 + std::abs(obj)))
    throw std::runtime_error("solver objective does not match its primal point");
  return sol;
}

// CPLEX-style LP text export for cross-checking against external solvers.
inline std::string write_lp_text(const LinearProgram& lp) {
  std::ostringstream os;
  os.precision(17);
  auto term = [&](double v, const std::string& name, bool first) {
    if (v >= 0.0 && !first) os << " + ";
    if (v < 0.0) os << (first ? "- " : " - ");
    os << std::abs(v) << " " << name;
  };
  os << (lp.sense == LpSense::minimize ? "Minimize" : "Maximize") << "\n obj:";
  bool first = true;
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.objective[j] == 0.0) continue;
    os << " ";
    term(lp.objective[j], lp.var_names[j], first);
    first = false;
  }
  if (first) os << " 0 " << (lp.num_vars() ? lp.var_names[0] : "x0");
  os << "\nSubject To\n";
  std::vector<std::vector<std::pair<int, double>>> rows(lp.num_rows());
  for (size_t k = 0; k < lp.a_val.size(); ++k)
    rows[lp.a_row[k]].push_back({lp.a_col[k], lp.a_val[k]});
  for (int r = 0; r < lp.num_rows(); ++r) {
    os << " c" << r << ":";
    bool f = true;
    for (auto [j, v] : rows[r]) {
      os << " ";
      term(v, lp.var_names[j], f);
      f = false;
    }
    if (f) os << " 0 " << (lp.num_vars() ? lp.var_names[0] : "x0");
    const char* cmp = lp.row_sense[r] == RowSense::le ? "<=" : lp.row_sense[r] == RowSense::ge ? ">=" : "=";
    os << " " << cmp << " " << lp.rhs[r] << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    double lb = lp.lower[j], ub = lp.upper[j];
    if (!std::isfinite(lb) && !std::isfinite(ub)) {
      os << " " << lp.var_names[j] << " free\n";
    } else if (lb == 0.0 && !std::isfinite(ub)) {
      continue;  // default bound
    } else {
      if (std::isfinite(lb)) os << " " << lb << " <= " << lp.var_names[j];
      else os << " -inf <= " << lp.var_names[j];
      if (std::isfinite(ub)) os << " <= " << ub;
      os << "\n";
    }
  }
  os << "End\n";
  return os.str();
}

}  // namespace nrm
