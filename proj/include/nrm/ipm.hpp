#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "nrm/kernels.hpp"
#include "nrm/lp.hpp"

namespace nrm {

// Symmetric positive definite solver for matrices that are block-tridiagonal
// under a given row partition: M(i, j) != 0 only when rows i and j fall in the
// same or adjacent partition blocks. The normal-equations matrix of a
// time-staged LP has exactly this shape when rows are grouped by period.
class BlockTridiagCholesky {
 public:
  // cols: column-wise sparse matrix entries (sorted, coalesced rows).
  // block_starts: partition starts; empty means one dense block.
  void set_structure(int m, const std::vector<int>& block_starts) {
    m_ = m;
    starts_ = block_starts;
    if (starts_.empty() || starts_.front() != 0) starts_.insert(starts_.begin(), 0);
    sizes_.clear();
    for (size_t k = 0; k < starts_.size(); ++k) {
      int end = k + 1 < starts_.size() ? starts_[k + 1] : m;
      sizes_.push_back(end - starts_[k]);
    }
    block_of_row_.assign(m, 0);
    for (size_t k = 0; k < starts_.size(); ++k)
      for (int r = starts_[k]; r < starts_[k] + sizes_[k]; ++r) block_of_row_[r] = static_cast<int>(k);
    diag_.assign(starts_.size(), {});
    sub_.assign(starts_.size(), {});
    for (size_t k = 0; k < starts_.size(); ++k) {
      diag_[k].assign(static_cast<size_t>(sizes_[k]) * sizes_[k], 0.0);
      if (k + 1 < starts_.size())
        sub_[k].assign(static_cast<size_t>(sizes_[k + 1]) * sizes_[k], 0.0);
    }
  }

  // Accumulates M = A diag(d) A'. Throws if a column straddles non-adjacent
  // blocks, which would break the tridiagonal layout.
  void form(const std::vector<std::vector<std::pair<int, double>>>& cols,
            const std::vector<double>& d) {
    for (auto& b : diag_) std::fill(b.begin(), b.end(), 0.0);
    for (auto& b : sub_) std::fill(b.begin(), b.end(), 0.0);
    for (size_t j = 0; j < cols.size(); ++j) {
      const auto& col = cols[j];
      if (col.empty()) continue;
      double dj = d[j];
      int k0 = block_of_row_[col.front().first];
      if (block_of_row_[col.back().first] > k0 + 1)
        throw std::runtime_error("LP rows are not block-tridiagonal under the given partition");
      for (size_t p = 0; p < col.size(); ++p) {
        double vp = col[p].second * dj;
        int rp = col[p].first, kp = block_of_row_[rp];
        for (size_t q = p; q < col.size(); ++q) {
          int rq = col[q].first, kq = block_of_row_[rq];
          double add = vp * col[q].second;
          if (kq == kp) {
            diag_[kp][static_cast<size_t>(rp - starts_[kp]) * sizes_[kp] + (rq - starts_[kp])] += add;
          } else {
            sub_[kp][static_cast<size_t>(rp - starts_[kp]) * sizes_[kp + 1] + (rq - starts_[kp + 1])] += add;
          }
        }
      }
    }
    have_matrix_ = true;
  }

  // Factors M + delta*I in place of internal copies. Returns false when a
  // pivot fails, so the caller can raise delta and retry.
  bool factor(double delta) {
    if (!have_matrix_) throw std::logic_error("factor() before form()");
    fd_ = diag_;
    fs_ = sub_;
    for (size_t k = 0; k < sizes_.size(); ++k) {
      int s = sizes_[k];
      double* dk = fd_[k].data();
      for (int i = 0; i < s; ++i) dk[static_cast<size_t>(i) * s + i] += delta;
      if (k > 0) {
        int sp = sizes_[k - 1];
        double* e = fs_[k - 1].data();
        // E = M_sub * L_prev^-T, then D -= E E'.
        detail::trsm_right_lt(s, sp, fd_[k - 1].data(), sp, e, s);
        detail::syrk_sub_lower(s, sp, e, s, dk, s);
      }
      if (!detail::chol_lower(s, dk, s)) return false;
    }
    factored_ = true;
    return true;
  }

  void solve(const std::vector<double>& rhs, std::vector<double>& out) const {
    if (!factored_) throw std::logic_error("solve() before factor()");
    out = rhs;
    const int kmax = static_cast<int>(sizes_.size());
    for (int k = 0; k < kmax; ++k) {
      int s = sizes_[k];
      double* yk = out.data() + starts_[k];
      if (k > 0)
        detail::gemv_n(s, sizes_[k - 1], -1.0, fs_[k - 1].data(), s, out.data() + starts_[k - 1], yk);
      detail::trsv_lower(s, fd_[k].data(), s, yk);
    }
    for (int k = kmax - 1; k >= 0; --k) {
      int s = sizes_[k];
      double* xk = out.data() + starts_[k];
      if (k + 1 < kmax)
        detail::gemv_t(sizes_[k + 1], s, -1.0, fs_[k].data(), sizes_[k + 1],
                       out.data() + starts_[k + 1], xk);
      detail::trsv_lower_t(s, fd_[k].data(), s, xk);
    }
  }

  // y = M x from the unfactored blocks, for iterative refinement.
  void matvec(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (size_t k = 0; k < sizes_.size(); ++k) {
      int s = sizes_[k], st = starts_[k];
      const double* dk = diag_[k].data();
      for (int c = 0; c < s; ++c) {
        double xc = x[st + c];
        y[st + c] += dk[static_cast<size_t>(c) * s + c] * xc;
        for (int r = c + 1; r < s; ++r) {
          double a = dk[static_cast<size_t>(c) * s + r];
          if (a == 0.0) continue;
          y[st + r] += a * xc;
          y[st + c] += a * x[st + r];
        }
      }
      if (k + 1 < sizes_.size()) {
        int sn = sizes_[k + 1], stn = starts_[k + 1];
        const double* e = sub_[k].data();
        for (int c = 0; c < s; ++c) {
          double xc = x[st + c];
          for (int r = 0; r < sn; ++r) {
            double a = e[static_cast<size_t>(c) * sn + r];
            if (a == 0.0) continue;
            y[stn + r] += a * xc;
            y[st + c] += a * x[stn + r];
          }
        }
      }
    }
  }

  double max_diag() const {
    double v = 0.0;
    for (size_t k = 0; k < sizes_.size(); ++k)
      for (int i = 0; i < sizes_[k]; ++i)
        v = std::max(v, diag_[k][static_cast<size_t>(i) * sizes_[k] + i]);
    return v;
  }

 private:
  int m_ = 0;
  std::vector<int> starts_, sizes_, block_of_row_;
  std::vector<std::vector<double>> diag_, sub_;  // M blocks
  std::vector<std::vector<double>> fd_, fs_;     // factored blocks
  bool have_matrix_ = false, factored_ = false;
};

// Mehrotra predictor-corrector interior-point solver for LPs whose rows are
// block-tridiagonal by period under the builder-provided partition (falls back
// to a bandwidth-derived partition). Dense tableaus stop fitting in memory at
// airline scale; the normal equations here factor in O(periods * block^3)
// through the in-project kernels.
//
// Variables must have zero lower bounds. Finite upper bounds are handled as
// a second complementarity pair; variables without one get a large inactive
// box, which keeps the optimal face bounded and the central path
// well-behaved on highly degenerate staircase LPs (verified inactive after
// the solve, with automatic enlargement otherwise).
class BandedIpm {
 public:
  struct Options {
    double gap_tol = 1e-10;
    double feas_tol = 1e-8;
    int max_iterations = 120;
  };

  BandedIpm() : BandedIpm(Options{}) {}
  explicit BandedIpm(Options opt) : opt_(opt) {}

  static bool applicable(const LinearProgram& lp) {
    for (int j = 0; j < lp.num_vars(); ++j)
      if (lp.lower[j] != 0.0) return false;
    return true;
  }

  LpSolution solve(const LinearProgram& lp) {
    if (!applicable(lp)) throw std::invalid_argument("BandedIpm requires x >= 0 variables");
    double box = 1e5;
    for (int attempt = 0; attempt < 4; ++attempt) {
      auto [sol, box_hit] = solve_boxed(lp, box);
      if (!box_hit) return sol;
      box *= 1e3;
    }
    throw std::runtime_error("auto box kept binding; problem looks unbounded");
  }

 private:
  std::pair<LpSolution, bool> solve_boxed(const LinearProgram& lp, double auto_box) {
    const int m = lp.num_rows();
    const int n_orig = lp.num_vars();
    const double sign = lp.sense == LpSense::maximize ? -1.0 : 1.0;

    // Fixed columns (upper bound zero) drop out entirely.
    std::vector<bool> fixed(n_orig, false);
    for (int j = 0; j < n_orig; ++j)
      if (lp.upper[j] == 0.0) fixed[j] = true;

    // Equality standard form: slack (+1) for <=, surplus (-1) for >=.
    int n = n_orig;
    std::vector<int> slack_of_row(m, -1);
    for (int r = 0; r < m; ++r)
      if (lp.row_sense[r] != RowSense::eq) slack_of_row[r] = n++;

    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (size_t k = 0; k < lp.a_val.size(); ++k)
      if (!fixed[lp.a_col[k]]) cols[lp.a_col[k]].push_back({lp.a_row[k], lp.a_val[k]});
    for (int r = 0; r < m; ++r)
      if (slack_of_row[r] >= 0)
        cols[slack_of_row[r]].push_back({r, lp.row_sense[r] == RowSense::le ? 1.0 : -1.0});

    int kd = 0;
    for (auto& col : cols) {
      if (col.empty()) continue;
      std::sort(col.begin(), col.end());
      size_t out = 0;
      for (size_t k = 1; k < col.size(); ++k) {
        if (col[k].first == col[out].first)
          col[out].second += col[k].second;
        else
          col[++out] = col[k];
      }
      col.resize(out + 1);
      kd = std::max(kd, col.back().first - col.front().first);
    }

    std::vector<double> c(n, 0.0);
    for (int j = 0; j < n_orig; ++j) c[j] = fixed[j] ? 0.0 : sign * lp.objective[j];
    std::vector<double> b = lp.rhs;

    // Ruiz equilibration; badly mixed magnitudes (transition probabilities vs
    // capacities) otherwise stall the centering steps.
    std::vector<double> row_scale(m, 1.0), col_scale(n, 1.0);
    for (int pass = 0; pass < 6; ++pass) {
      std::vector<double> rmax(m, 0.0);
      for (const auto& col : cols)
        for (auto [r, v] : col) rmax[r] = std::max(rmax[r], std::abs(v));
      std::vector<double> rfac(m, 1.0);
      for (int r = 0; r < m; ++r)
        if (rmax[r] > 0.0) rfac[r] = 1.0 / std::sqrt(rmax[r]);
      for (auto& col : cols)
        for (auto& [r, v] : col) v *= rfac[r];
      for (int r = 0; r < m; ++r) row_scale[r] *= rfac[r];
      for (int j = 0; j < n; ++j) {
        double cmax = 0.0;
        for (auto [r, v] : cols[j]) cmax = std::max(cmax, std::abs(v));
        if (cmax <= 0.0) continue;
        double f = 1.0 / std::sqrt(cmax);
        for (auto& [r, v] : cols[j]) v *= f;
        col_scale[j] *= f;
      }
    }
    for (int r = 0; r < m; ++r) b[r] *= row_scale[r];
    for (int j = 0; j < n; ++j) c[j] *= col_scale[j];

    // Upper bounds in scaled space; unbounded columns get the inactive box.
    std::vector<double> ub(n);
    bool any_auto = false;
    for (int j = 0; j < n; ++j) {
      double u = j < n_orig ? lp.upper[j] : kInf;
      if (std::isfinite(u)) {
        ub[j] = u / col_scale[j];
      } else {
        ub[j] = auto_box;
        any_auto = true;
      }
      if (j < n_orig && fixed[j]) ub[j] = auto_box;  // column already dropped
    }

    BlockTridiagCholesky chol;
    chol.set_structure(m, block_partition(lp, m, kd));

    double bnorm = 1.0, cnorm = 1.0;
    for (double v : b) bnorm = std::max(bnorm, std::abs(v));
    for (double v : c) cnorm = std::max(cnorm, std::abs(v));

    std::vector<double> x(n), y(m, 0.0), z(n), s(n), w(n);
    std::vector<double> rp(m), ru(n), rd(n), theta(n);
    std::vector<double> dx(n), dy(m), dz(n), ds(n), dw(n);
    std::vector<double> dx_aff(n), dz_aff(n), ds_aff(n), dw_aff(n);
    std::vector<double> rxz(n), rsw(n), rhs(m), h(n);

    // Least-squares start pushed inside the box.
    {
      std::vector<double> ones(n, 1.0);
      chol.form(cols, ones);
      if (!chol.factor(1e-12)) throw std::runtime_error("start factorization failed");
      std::vector<double> wls;
      refine_solve(chol, b, wls);
      for (int j = 0; j < n; ++j) {
        double t = 0.0;
        for (auto [r, v] : cols[j]) t += v * wls[r];
        x[j] = t;
      }
      for (int r = 0; r < m; ++r) rhs[r] = 0.0;
      for (int j = 0; j < n; ++j)
        for (auto [r, v] : cols[j]) rhs[r] += v * c[j];
      refine_solve(chol, rhs, y);
      for (int j = 0; j < n; ++j) {
        double t = 0.0;
        for (auto [r, v] : cols[j]) t += v * y[r];
        z[j] = c[j] - t;
      }
      double pad_x = 0.1 * std::max(1.0, bnorm), pad_z = 0.1 * std::max(1.0, cnorm);
      for (int j = 0; j < n; ++j) {
        x[j] = std::clamp(x[j], pad_x, ub[j] * 0.9);
        s[j] = ub[j] - x[j];
        double zj = z[j];
        z[j] = std::max(pad_z, zj);
        w[j] = std::max(pad_z, z[j] - zj);  // keeps z - w near the LS dual slack
      }
    }

    std::vector<double> best_x;
    double best_score = kInf;
    const bool trace = std::getenv("NRM_IPM_TRACE") != nullptr;

    LpSolution sol;
    sol.status = LpStatus::iteration_limit;
    long used_iters = opt_.max_iterations;
    for (int iter = 0; iter < opt_.max_iterations; ++iter) {
      for (int r = 0; r < m; ++r) rp[r] = b[r];
      for (int j = 0; j < n; ++j)
        for (auto [r, v] : cols[j]) rp[r] -= v * x[j];
      double gap = 0.0, obj = 0.0;
      for (int j = 0; j < n; ++j) {
        double aty = 0.0;
        for (auto [r, v] : cols[j]) aty += v * y[r];
        rd[j] = c[j] - aty - z[j] + w[j];
        ru[j] = ub[j] - x[j] - s[j];
        gap += x[j] * z[j] + s[j] * w[j];
        obj += c[j] * x[j];
      }
      double mu = gap / (2 * n);
      double rp_norm = 0.0, rd_norm = 0.0;
      for (double v : rp) rp_norm = std::max(rp_norm, std::abs(v));
      for (double v : rd) rd_norm = std::max(rd_norm, std::abs(v));

      // The box contributes s'w to the gap even when inactive; measure
      // optimality through the x'z part plus residuals.
      double xz = 0.0;
      for (int j = 0; j < n; ++j) xz += x[j] * z[j];
      double score = std::max({xz / (1.0 + std::abs(obj)), rp_norm / bnorm, rd_norm / cnorm});
      if (score < best_score) {
        best_score = score;
        best_x = x;
      }
      if (trace)
        std::fprintf(stderr, "[ipm] it=%d mu=%.3e xz=%.3e rp=%.3e rd=%.3e obj=%.10f\n", iter, mu,
                     xz, rp_norm, rd_norm, obj);

      if (xz <= opt_.gap_tol * (1.0 + std::abs(obj)) && rp_norm <= opt_.feas_tol * bnorm &&
          rd_norm <= opt_.feas_tol * cnorm) {
        sol.status = LpStatus::optimal;
        used_iters = iter;
        best_x = x;
        break;
      }
      if (score > 1e3 * best_score ||
          (mu < 1e-16 * (1.0 + std::abs(obj)) && score >= best_score)) {
        used_iters = iter;
        break;
      }

      for (int j = 0; j < n; ++j) theta[j] = 1.0 / (z[j] / x[j] + w[j] / s[j]);
      chol.form(cols, theta);
      double delta = 1e-13 * std::max(1.0, chol.max_diag());
      for (int tries = 0; !chol.factor(delta); ++tries) {
        if (tries >= 8) throw std::runtime_error("normal equations lost positive definiteness");
        delta = std::max(delta * 1e3, 1e-10);
      }

      // Affine scaling step.
      for (int j = 0; j < n; ++j) {
        rxz[j] = -x[j] * z[j];
        rsw[j] = -s[j] * w[j];
      }
      newton_step(cols, chol, theta, rp, ru, rd, x, z, s, w, rxz, rsw, dy, dx_aff, dz_aff, ds_aff,
                  dw_aff, rhs, h);
      double ap_aff = std::min(step_ratio(x, dx_aff, 1.0), step_ratio(s, ds_aff, 1.0));
      double ad_aff = std::min(step_ratio(z, dz_aff, 1.0), step_ratio(w, dw_aff, 1.0));
      double mu_aff = 0.0;
      for (int j = 0; j < n; ++j)
        mu_aff += (x[j] + ap_aff * dx_aff[j]) * (z[j] + ad_aff * dz_aff[j]) +
                  (s[j] + ap_aff * ds_aff[j]) * (w[j] + ad_aff * dw_aff[j]);
      mu_aff /= 2 * n;
      double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

      // Mehrotra corrector.
      for (int j = 0; j < n; ++j) {
        rxz[j] = sigma * mu - x[j] * z[j] - dx_aff[j] * dz_aff[j];
        rsw[j] = sigma * mu - s[j] * w[j] - ds_aff[j] * dw_aff[j];
      }
      newton_step(cols, chol, theta, rp, ru, rd, x, z, s, w, rxz, rsw, dy, dx, dz, ds, dw, rhs, h);
      double ap = std::min(step_ratio(x, dx, 0.9995), step_ratio(s, ds, 0.9995));
      double ad = std::min(step_ratio(z, dz, 0.9995), step_ratio(w, dw, 0.9995));

      // Gondzio centrality correctors.
      for (int extra = 0; extra < 3 && std::min(ap, ad) < 0.9; ++extra) {
        double ap_t = std::min(1.0, ap + 0.3), ad_t = std::min(1.0, ad + 0.3);
        double mu_g = std::max(sigma * mu, 1e-2 * mu);
        std::vector<double> rxz2(n), rsw2(n);
        for (int j = 0; j < n; ++j) {
          double px = (x[j] + ap_t * dx[j]) * (z[j] + ad_t * dz[j]);
          double ps = (s[j] + ap_t * ds[j]) * (w[j] + ad_t * dw[j]);
          rxz2[j] = rxz[j] + (std::clamp(px, 0.1 * mu_g, 10.0 * mu_g) - px);
          rsw2[j] = rsw[j] + (std::clamp(ps, 0.1 * mu_g, 10.0 * mu_g) - ps);
        }
        std::vector<double> dy2, dx2, dz2, ds2, dw2;
        newton_step(cols, chol, theta, rp, ru, rd, x, z, s, w, rxz2, rsw2, dy2, dx2, dz2, ds2, dw2,
                    rhs, h);
        double ap2 = std::min(step_ratio(x, dx2, 0.9995), step_ratio(s, ds2, 0.9995));
        double ad2 = std::min(step_ratio(z, dz2, 0.9995), step_ratio(w, dw2, 0.9995));
        if (ap2 + ad2 > ap + ad + 0.01) {
          dx = dx2; dy = dy2; dz = dz2; ds = ds2; dw = dw2;
          ap = ap2; ad = ad2;
          rxz = rxz2; rsw = rsw2;
        } else {
          break;
        }
      }

      for (int j = 0; j < n; ++j) {
        x[j] += ap * dx[j];
        s[j] += ap * ds[j];
        z[j] += ad * dz[j];
        w[j] += ad * dw[j];
      }
      for (int r = 0; r < m; ++r) y[r] += ad * dy[r];
    }

    if (sol.status != LpStatus::optimal && best_score <= 1e-7) sol.status = LpStatus::optimal;
    sol.iterations = used_iters;
    bool box_hit = false;
    if (sol.status == LpStatus::optimal) {
      sol.primal.assign(lp.objective.size(), 0.0);
      for (int j = 0; j < n_orig; ++j) sol.primal[j] = fixed[j] ? 0.0 : best_x[j] * col_scale[j];
      double true_obj = 0.0;
      for (int j = 0; j < n_orig; ++j) true_obj += lp.objective[j] * sol.primal[j];
      sol.objective = true_obj;
      if (any_auto)
        for (int j = 0; j < n; ++j) {
          bool native = j < n_orig && std::isfinite(lp.upper[j]) && !fixed[j];
          if (!native && best_x[j] > 0.5 * auto_box) box_hit = true;
        }
    }
    return {sol, box_hit};
  }

  // One Newton solve for given complementarity targets:
  //   A dx = rp, dx + ds = ru, A'dy + dz - dw = rd,
  //   Z dx + X dz = rxz,  W ds + S dw = rsw.
  static void newton_step(const std::vector<std::vector<std::pair<int, double>>>& cols,
                          const BlockTridiagCholesky& chol, const std::vector<double>& theta,
                          const std::vector<double>& rp, const std::vector<double>& ru,
                          const std::vector<double>& rd, const std::vector<double>& x,
                          const std::vector<double>& z, const std::vector<double>& s,
                          const std::vector<double>& w, const std::vector<double>& rxz,
                          const std::vector<double>& rsw, std::vector<double>& dy,
                          std::vector<double>& dx, std::vector<double>& dz, std::vector<double>& ds,
                          std::vector<double>& dw, std::vector<double>& rhs,
                          std::vector<double>& h) {
    const int m = static_cast<int>(rp.size());
    const int n = static_cast<int>(rd.size());
    for (int j = 0; j < n; ++j)
      h[j] = rd[j] - rxz[j] / x[j] + (rsw[j] - w[j] * ru[j]) / s[j];
    for (int r = 0; r < m; ++r) rhs[r] = rp[r];
    for (int j = 0; j < n; ++j) {
      double t = theta[j] * h[j];
      if (t == 0.0) continue;
      for (auto [r, v] : cols[j]) rhs[r] += v * t;
    }
    refine_solve(chol, rhs, dy);
    dx.resize(n);
    dz.resize(n);
    ds.resize(n);
    dw.resize(n);
    for (int j = 0; j < n; ++j) {
      double aty = 0.0;
      for (auto [r, v] : cols[j]) aty += v * dy[r];
      dx[j] = theta[j] * (aty - h[j]);
      dz[j] = (rxz[j] - z[j] * dx[j]) / x[j];
      ds[j] = ru[j] - dx[j];
      dw[j] = (rsw[j] - w[j] * ds[j]) / s[j];
    }
  }

  static std::vector<int> block_partition(const LinearProgram& lp, int m, int kd) {
    if (!lp.row_block_starts.empty()) return lp.row_block_starts;
    std::vector<int> starts;
    int width = std::max(kd + 1, 1);
    for (int r = 0; r < m; r += width) starts.push_back(r);
    return starts;
  }

  static double step_ratio(const std::vector<double>& v, const std::vector<double>& dv,
                           double damp) {
    double a = 1.0;
    for (size_t j = 0; j < v.size(); ++j)
      if (dv[j] < 0.0) a = std::min(a, -v[j] / dv[j] * damp);
    return std::min(a, 1.0);
  }

  // Cholesky solve plus one step of iterative refinement; the refinement buys
  // back the residual floor lost to normal-equation conditioning.
  static void refine_solve(const BlockTridiagCholesky& chol, const std::vector<double>& rhs,
                           std::vector<double>& out) {
    chol.solve(rhs, out);
    std::vector<double> mv;
    chol.matvec(out, mv);
    std::vector<double> corr(rhs.size());
    for (size_t r = 0; r < rhs.size(); ++r) corr[r] = rhs[r] - mv[r];
    std::vector<double> fix;
    chol.solve(corr, fix);
    for (size_t r = 0; r < rhs.size(); ++r) out[r] += fix[r];
  }

  Options opt_;
};

}  // namespace nrm
