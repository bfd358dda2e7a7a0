#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

// Self-contained dense kernels (column-major), used by the large-scale LP
// backend. Written in-project because the platform BLAS produces incorrect
// results at moderate sizes; these are packed, register-tiled loops that the
// compiler vectorizes, fast enough for desk-scale experiments.

namespace nrm::detail {

inline constexpr int kMr = 4, kNr = 4;
inline constexpr int kMc = 128, kNc = 128, kKc = 256;

// C (m x n, ldc) -= A (m x k, lda) * B (n x k, ldb)^T.
inline void gemm_sub_nt(int m, int n, int k, const double* A, int lda, const double* B, int ldb,
                        double* C, int ldc) {
  if (m <= 0 || n <= 0 || k <= 0) return;
  thread_local std::vector<double> ap, bp;

  for (int ll = 0; ll < k; ll += kKc) {
    int kc = std::min(kKc, k - ll);
    for (int jj = 0; jj < n; jj += kNc) {
      int nc = std::min(kNc, n - jj);
      // Pack B panel: strips of kNr rows, contiguous in l.
      bp.assign(static_cast<size_t>(kc) * ((nc + kNr - 1) / kNr) * kNr, 0.0);
      for (int js = 0; js < nc; js += kNr) {
        int jw = std::min(kNr, nc - js);
        double* dst = bp.data() + static_cast<size_t>(js) * kc;
        for (int l = 0; l < kc; ++l)
          for (int j = 0; j < jw; ++j)
            dst[static_cast<size_t>(l) * kNr + j] = B[static_cast<size_t>(ll + l) * ldb + jj + js + j];
      }
      for (int ii = 0; ii < m; ii += kMc) {
        int mc = std::min(kMc, m - ii);
        // Pack A panel: strips of kMr rows, contiguous in l.
        ap.assign(static_cast<size_t>(kc) * ((mc + kMr - 1) / kMr) * kMr, 0.0);
        for (int is = 0; is < mc; is += kMr) {
          int iw = std::min(kMr, mc - is);
          double* dst = ap.data() + static_cast<size_t>(is) * kc;
          for (int l = 0; l < kc; ++l)
            for (int i = 0; i < iw; ++i)
              dst[static_cast<size_t>(l) * kMr + i] = A[static_cast<size_t>(ll + l) * lda + ii + is + i];
        }
        // Micro tiles.
        for (int js = 0; js < nc; js += kNr) {
          int jw = std::min(kNr, nc - js);
          const double* bpan = bp.data() + static_cast<size_t>(js) * kc;
          for (int is = 0; is < mc; is += kMr) {
            int iw = std::min(kMr, mc - is);
            const double* apan = ap.data() + static_cast<size_t>(is) * kc;
            double acc[kMr][kNr] = {};
            for (int l = 0; l < kc; ++l) {
              const double* a = apan + static_cast<size_t>(l) * kMr;
              const double* b = bpan + static_cast<size_t>(l) * kNr;
              for (int i = 0; i < kMr; ++i)
                for (int j = 0; j < kNr; ++j) acc[i][j] += a[i] * b[j];
            }
            for (int j = 0; j < jw; ++j)
              for (int i = 0; i < iw; ++i)
                C[static_cast<size_t>(jj + js + j) * ldc + ii + is + i] -= acc[i][j];
          }
        }
      }
    }
  }
}

// B (m x n, ldb) := B * L^-T for lower-triangular L (n x n, ldl).
inline void trsm_right_lt(int m, int n, const double* L, int ldl, double* B, int ldb) {
  const int nb = 64;
  for (int c0 = 0; c0 < n; c0 += nb) {
    int cw = std::min(nb, n - c0);
    // Subtract contributions of already-solved panels.
    gemm_sub_nt(m, cw, c0, B, ldb, L + c0, ldl, B + static_cast<size_t>(c0) * ldb, ldb);
    // In-panel column sweep.
    for (int c = c0; c < c0 + cw; ++c) {
      double* bc = B + static_cast<size_t>(c) * ldb;
      for (int k2 = c0; k2 < c; ++k2) {
        double f = L[static_cast<size_t>(k2) * ldl + c];
        if (f == 0.0) continue;
        const double* bk = B + static_cast<size_t>(k2) * ldb;
        for (int i = 0; i < m; ++i) bc[i] -= f * bk[i];
      }
      double inv = 1.0 / L[static_cast<size_t>(c) * ldl + c];
      for (int i = 0; i < m; ++i) bc[i] *= inv;
    }
  }
}

// C (n x n lower, ldc) -= A (n x k, lda) * A^T, touching only tiles that meet
// the lower triangle.
inline void syrk_sub_lower(int n, int k, const double* A, int lda, double* C, int ldc) {
  const int tile = kMc;
  for (int j0 = 0; j0 < n; j0 += tile) {
    int jw = std::min(tile, n - j0);
    for (int i0 = j0; i0 < n; i0 += tile) {
      int iw = std::min(tile, n - i0);
      gemm_sub_nt(iw, jw, k, A + i0, lda, A + j0, lda, C + static_cast<size_t>(j0) * ldc + i0, ldc);
    }
  }
}

// Unblocked lower Cholesky. Returns false on a nonpositive pivot.
inline bool potf2_lower(int n, double* a, int lda) {
  for (int j = 0; j < n; ++j) {
    double d = a[static_cast<size_t>(j) * lda + j];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[static_cast<size_t>(j) * lda + j] = d;
    double inv = 1.0 / d;
    for (int i = j + 1; i < n; ++i) a[static_cast<size_t>(j) * lda + i] *= inv;
    for (int k = j + 1; k < n; ++k) {
      double f = a[static_cast<size_t>(j) * lda + k];
      if (f == 0.0) continue;
      double* colk = a + static_cast<size_t>(k) * lda;
      const double* colj = a + static_cast<size_t>(j) * lda;
      for (int i = k; i < n; ++i) colk[i] -= f * colj[i];
    }
  }
  return true;
}

// Blocked lower Cholesky on the kernels above.
inline bool chol_lower(int n, double* a, int lda) {
  const int nb = 96;
  for (int j0 = 0; j0 < n; j0 += nb) {
    int jb = std::min(nb, n - j0);
    if (!potf2_lower(jb, a + static_cast<size_t>(j0) * lda + j0, lda)) return false;
    int rest = n - j0 - jb;
    if (rest > 0) {
      trsm_right_lt(rest, jb, a + static_cast<size_t>(j0) * lda + j0, lda,
                    a + static_cast<size_t>(j0) * lda + j0 + jb, lda);
      syrk_sub_lower(rest, jb, a + static_cast<size_t>(j0) * lda + j0 + jb, lda,
                     a + static_cast<size_t>(j0 + jb) * lda + j0 + jb, lda);
    }
  }
  return true;
}

// y += alpha * A x and y += alpha * A^T x, plain loops.
inline void gemv_n(int m, int n, double alpha, const double* A, int lda, const double* x,
                   double* y) {
  for (int c = 0; c < n; ++c) {
    double f = alpha * x[c];
    if (f == 0.0) continue;
    const double* col = A + static_cast<size_t>(c) * lda;
    for (int r = 0; r < m; ++r) y[r] += f * col[r];
  }
}

inline void gemv_t(int m, int n, double alpha, const double* A, int lda, const double* x,
                   double* y) {
  for (int c = 0; c < n; ++c) {
    const double* col = A + static_cast<size_t>(c) * lda;
    double s = 0.0;
    for (int r = 0; r < m; ++r) s += col[r] * x[r];
    y[c] += alpha * s;
  }
}

// x := L^-1 x and x := L^-T x for lower-triangular L.
inline void trsv_lower(int n, const double* L, int ldl, double* x) {
  for (int c = 0; c < n; ++c) {
    x[c] /= L[static_cast<size_t>(c) * ldl + c];
    double f = x[c];
    const double* col = L + static_cast<size_t>(c) * ldl;
    for (int r = c + 1; r < n; ++r) x[r] -= f * col[r];
  }
}

inline void trsv_lower_t(int n, const double* L, int ldl, double* x) {
  for (int c = n - 1; c >= 0; --c) {
    const double* col = L + static_cast<size_t>(c) * ldl;
    double s = x[c];
    for (int r = c + 1; r < n; ++r) s -= col[r] * x[r];
    x[c] = s / col[c];
  }
}

}  // namespace nrm::detail
