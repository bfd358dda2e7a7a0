#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "nrm/lp.hpp"

namespace nrm {

// Dense two-phase primal simplex. Dantzig pricing with a Bland's-rule
// fallback once degenerate pivots pile up, so the highly degenerate
// value-approximation LPs still terminate.
class DenseSimplex {
 public:
  struct Options {
    double pivot_tol = 1e-9;
    double feas_tol = 1e-7;
    long max_iterations = 0;  // 0 means 50*(rows+cols)
  };

  DenseSimplex() : DenseSimplex(Options{}) {}
  explicit DenseSimplex(Options opt) : opt_(opt) {}

  LpSolution solve(const LinearProgram& lp) {
    // Normalize to: min c.x  s.t.  A x {<=,=,>=} b,  x >= 0, by shifting or
    // splitting bounded/free variables. Finite upper bounds become rows.
    const int n_orig = lp.num_vars();
    const double sign = lp.sense == LpSense::maximize ? -1.0 : 1.0;

    // Per original variable: x_orig = shift + scale * x_std (scale +-1), or a
    // free split x_orig = x_pos - x_neg.
    struct VarMap {
      int col = -1;
      int neg_col = -1;  // used by free variables
      double shift = 0.0;
      double scale = 1.0;
    };
    std::vector<VarMap> vmap(n_orig);

    std::vector<double> c;
    std::vector<std::string> extra_row_note;
    int n_std = 0;
    double obj_offset = 0.0;
    for (int j = 0; j < n_orig; ++j) {
      double lb = lp.lower[j], ub = lp.upper[j];
      double cj = sign * lp.objective[j];
      if (std::isfinite(lb)) {
        vmap[j] = {n_std, -1, lb, 1.0};
        c.push_back(cj);
        obj_offset += cj * lb;
        ++n_std;
      } else if (std::isfinite(ub)) {
        vmap[j] = {n_std, -1, ub, -1.0};
        c.push_back(-cj);
        obj_offset += cj * ub;
        ++n_std;
      } else {
        vmap[j] = {n_std, n_std + 1, 0.0, 1.0};
        c.push_back(cj);
        c.push_back(-cj);
        n_std += 2;
      }
    }

    // Rows: originals plus upper-bound rows for variables with both bounds.
    std::vector<RowSense> senses = lp.row_sense;
    std::vector<double> b = lp.rhs;
    std::vector<std::vector<std::pair<int, double>>> rows(lp.num_rows());
    for (size_t k = 0; k < lp.a_val.size(); ++k) {
      int r = lp.a_row[k], j = lp.a_col[k];
      double v = lp.a_val[k];
      const VarMap& m = vmap[j];
      b[r] -= v * m.shift;
      rows[r].push_back({m.col, v * m.scale});
      if (m.neg_col >= 0) rows[r].push_back({m.neg_col, -v});
    }
    for (int j = 0; j < n_orig; ++j) {
      if (std::isfinite(lp.lower[j]) && std::isfinite(lp.upper[j])) {
        rows.push_back({{vmap[j].col, 1.0}});
        senses.push_back(RowSense::le);
        b.push_back(lp.upper[j] - lp.lower[j]);
      }
    }
    const int m_rows = static_cast<int>(rows.size());

    // Flip rows to get b >= 0, then append slack/surplus/artificial columns.
    for (int r = 0; r < m_rows; ++r) {
      if (b[r] < 0.0) {
        b[r] = -b[r];
        for (auto& e : rows[r]) e.second = -e.second;
        senses[r] = senses[r] == RowSense::le   ? RowSense::ge
                    : senses[r] == RowSense::ge ? RowSense::le
                                                : RowSense::eq;
      }
    }

    int n_total = n_std;
    std::vector<int> slack_col(m_rows, -1), art_col(m_rows, -1);
    for (int r = 0; r < m_rows; ++r) {
      if (senses[r] == RowSense::le) {
        slack_col[r] = n_total++;
      } else if (senses[r] == RowSense::ge) {
        slack_col[r] = n_total++;  // surplus, coefficient -1
        art_col[r] = n_total++;
      } else {
        art_col[r] = n_total++;
      }
    }
    const int art_begin = n_std;  // artificials live past n_std among appended cols

    // Dense tableau: m_rows x (n_total + 1), rhs in the last column.
    width_ = n_total + 1;
    tab_.assign(static_cast<size_t>(m_rows) * width_, 0.0);
    basis_.assign(m_rows, -1);
    for (int r = 0; r < m_rows; ++r) {
      for (auto [j, v] : rows[r]) at(r, j) += v;
      if (slack_col[r] >= 0) at(r, slack_col[r]) = senses[r] == RowSense::le ? 1.0 : -1.0;
      if (art_col[r] >= 0) at(r, art_col[r]) = 1.0;
      at(r, n_total) = b[r];
      basis_[r] = art_col[r] >= 0 ? art_col[r] : slack_col[r];
    }

    m_ = m_rows;
    n_ = n_total;
    is_artificial_.assign(n_total, false);
    for (int r = 0; r < m_rows; ++r)
      if (art_col[r] >= 0) is_artificial_[art_col[r]] = true;

    long max_iter = opt_.max_iterations > 0 ? opt_.max_iterations : 50L * (m_ + n_);
    iterations_ = 0;

    LpSolution sol;

    // Phase I: minimize the sum of artificials.
    bool have_artificial = false;
    for (int r = 0; r < m_rows; ++r) have_artificial |= art_col[r] >= 0;
    if (have_artificial) {
      cost_.assign(n_total + 1, 0.0);
      for (int j = 0; j < n_total; ++j)
        if (is_artificial_[j]) cost_[j] = 1.0;
      // Price out the basic artificials.
      for (int r = 0; r < m_rows; ++r)
        if (art_col[r] >= 0)
          for (int j = 0; j <= n_total; ++j) cost_[j] -= at(r, j);
      bool artificial_phase = true;
      LpStatus st = run(max_iter, artificial_phase);
      if (st == LpStatus::iteration_limit) {
        sol.status = st;
        sol.iterations = iterations_;
        return sol;
      }
      if (-cost_[n_total] > opt_.feas_tol) {
        sol.status = LpStatus::infeasible;
        sol.iterations = iterations_;
        return sol;
      }
      // Pivot any basic artificial out at zero level. Slack and surplus
      // columns count; only a row whose whole non-artificial part vanished is
      // genuinely redundant and may keep its artificial parked at 0.
      for (int r = 0; r < m_; ++r) {
        if (!is_artificial_[basis_[r]]) continue;
        int enter = -1;
        for (int j = 0; j < n_total; ++j)
          if (!is_artificial_[j] && std::abs(at(r, j)) > opt_.pivot_tol) {
            enter = j;
            break;
          }
        if (enter >= 0)
          pivot(r, enter);
        else
          at(r, n_total) = 0.0;
      }
    }

    // Phase II.
    cost_.assign(n_total + 1, 0.0);
    for (int j = 0; j < n_std; ++j) cost_[j] = c[j];
    for (int r = 0; r < m_; ++r) {
      int jb = basis_[r];
      double cb = cost_[jb];
      if (cb != 0.0)
        for (int j = 0; j <= n_total; ++j) cost_[j] -= cb * at(r, j);
    }
    LpStatus st = run(max_iter, false);
    sol.status = st;
    sol.iterations = iterations_;
    if (st != LpStatus::optimal) return sol;

    std::vector<double> x_std(n_total, 0.0);
    for (int r = 0; r < m_; ++r) x_std[basis_[r]] = at(r, n_total);

    sol.primal.assign(n_orig, 0.0);
    for (int j = 0; j < n_orig; ++j) {
      double v = vmap[j].shift + vmap[j].scale * x_std[vmap[j].col];
      if (vmap[j].neg_col >= 0) v -= x_std[vmap[j].neg_col];
      sol.primal[j] = v;
    }
    double obj = 0.0;
    for (int j = 0; j < n_orig; ++j) obj += lp.objective[j] * sol.primal[j];
    sol.objective = obj;
    return sol;
  }

 private:
  double& at(int r, int j) { return tab_[static_cast<size_t>(r) * width_ + j]; }

  void pivot(int row, int col) {
    double piv = at(row, col);
    double inv = 1.0 / piv;
    for (int j = 0; j <= n_; ++j) at(row, j) *= inv;
    at(row, col) = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (r == row) continue;
      double f = at(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j <= n_; ++j) at(r, j) -= f * at(row, j);
      at(r, col) = 0.0;
    }
    double f = cost_[col];
    if (f != 0.0) {
      for (int j = 0; j <= n_; ++j) cost_[j] -= f * at(row, j);
      cost_[col] = 0.0;
    }
    basis_[row] = col;
  }

  // Runs pricing/ratio-test loops on the current tableau and cost row.
  LpStatus run(long max_iter, bool artificial_phase) {
    long degenerate = 0;
    bool bland = false;
    const long bland_after = 2L * (m_ + n_);
    while (true) {
      if (iterations_ >= max_iter) return LpStatus::iteration_limit;

      int enter = -1;
      if (bland) {
        for (int j = 0; j < n_; ++j) {
          if (!artificial_phase && is_artificial_[j]) continue;
          if (cost_[j] < -opt_.pivot_tol) {
            enter = j;
            break;
          }
        }
      } else {
        double best = -opt_.pivot_tol;
        for (int j = 0; j < n_; ++j) {
          if (!artificial_phase && is_artificial_[j]) continue;
          if (cost_[j] < best) {
            best = cost_[j];
            enter = j;
          }
        }
      }
      if (enter < 0) return LpStatus::optimal;

      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        double a = at(r, enter);
        if (a <= opt_.pivot_tol) continue;
        double ratio = at(r, n_) / a;
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (bland && std::abs(ratio - best_ratio) <= 1e-12 && basis_[r] < basis_[leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return artificial_phase ? LpStatus::optimal : LpStatus::unbounded;

      if (best_ratio <= 1e-12) {
        if (++degenerate > bland_after) bland = true;
      } else {
        degenerate = 0;
      }
      if (std::getenv("NRM_SIMPLEX_TRACE"))
        std::fprintf(stderr, "[simplex] phase%d it=%ld enter=%d leave_row=%d (basis %d) ratio=%g obj=%g\n",
                     artificial_phase ? 1 : 2, iterations_, enter, leave, basis_[leave], best_ratio, -cost_[n_]);
      pivot(leave, enter);
      ++iterations_;
    }
  }

  Options opt_;
  std::vector<double> tab_;
  std::vector<double> cost_;
  std::vector<int> basis_;
  std::vector<bool> is_artificial_;
  int m_ = 0, n_ = 0, width_ = 0;
  long iterations_ = 0;
};

}  // namespace nrm
