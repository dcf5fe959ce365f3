#include "kinkflow/banded.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <lapacke.h>

#include "kinkflow/errors.hpp"

namespace kinkflow {

BandedMatrix::BandedMatrix(int dim, int half_bw) : dim(dim), half_bw(half_bw) {
  require(dim >= 1, "banded matrix needs dim >= 1");
  require(half_bw >= 0 && half_bw < dim, "half bandwidth must lie in [0, dim)");
  data.assign(static_cast<std::size_t>(ld()) * dim, 0.0);
}

double BandedMatrix::get(int i, int j) const {
  if (i < 0 || j < 0 || i >= dim || j >= dim || !in_band(i, j)) return 0.0;
  return at(i, j);
}

void BandedMatrix::set_zero() { std::fill(data.begin(), data.end(), 0.0); }

BandedMatrix BandedMatrix::identity(int dim, int half_bw) {
  BandedMatrix m(dim, half_bw);
  for (int j = 0; j < dim; ++j) m.at(j, j) = 1.0;
  return m;
}

int product_half_bw(const BandedMatrix& a, const BandedMatrix& b) {
  return std::min(a.half_bw + b.half_bw, a.dim - 1);
}

void banded_multiply(const BandedMatrix& a, const BandedMatrix& b, BandedMatrix& out) {
  require(a.dim == b.dim && a.dim == out.dim, "banded multiply dims must match");
  const int need = product_half_bw(a, b);
  if (out.half_bw < need)
    throw ValidationError("banded multiply workspace bandwidth too small");
  out.set_zero();
  const int n = a.dim;
  const int da = a.half_bw, db = b.half_bw, dc = out.half_bw;
  const int lda = a.ld(), ldb = b.ld(), ldc = out.ld();
  const double* ap = a.data.data();
  const double* bp = b.data.data();
  double* cp = out.data.data();
  for (int j = 0; j < n; ++j) {
    const int klo = std::max(0, j - db), khi = std::min(n - 1, j + db);
    double* ccol = cp + static_cast<std::size_t>(j) * ldc + dc - j;
    for (int k = klo; k <= khi; ++k) {
      const double bkj = bp[static_cast<std::size_t>(j) * ldb + db + k - j];
      if (bkj == 0.0) continue;
      const int ilo = std::max(0, k - da), ihi = std::min(n - 1, k + da);
      const double* acol = ap + static_cast<std::size_t>(k) * lda + da - k;
      for (int i = ilo; i <= ihi; ++i) ccol[i] += acol[i] * bkj;
    }
  }
}

BandedMatrix banded_multiply(const BandedMatrix& a, const BandedMatrix& b) {
  BandedMatrix out(a.dim, product_half_bw(a, b));
  banded_multiply(a, b, out);
  return out;
}

void banded_commutator(const BandedMatrix& a, const BandedMatrix& b, BandedMatrix& out) {
  BandedMatrix ab(a.dim, out.half_bw), ba(a.dim, out.half_bw);
  banded_multiply(a, b, ab);
  banded_multiply(b, a, ba);
  out.set_zero();
  for (std::size_t idx = 0; idx < out.data.size(); ++idx)
    out.data[idx] = ab.data[idx] - ba.data[idx];
}

BandedMatrix banded_commutator(const BandedMatrix& a, const BandedMatrix& b) {
  BandedMatrix out(a.dim, product_half_bw(a, b));
  banded_commutator(a, b, out);
  return out;
}

void banded_axpy(double alpha, const BandedMatrix& x, BandedMatrix& y) {
  require(x.dim == y.dim, "banded axpy dims must match");
  require(x.half_bw <= y.half_bw, "banded axpy target bandwidth too small");
  const int shift = y.half_bw - x.half_bw;
  const int ldx = x.ld(), ldy = y.ld();
  for (int j = 0; j < x.dim; ++j) {
    const double* xc = x.data.data() + static_cast<std::size_t>(j) * ldx;
    double* yc = y.data.data() + static_cast<std::size_t>(j) * ldy + shift;
    for (int r = 0; r < ldx; ++r) yc[r] += alpha * xc[r];
  }
}

void banded_scale(BandedMatrix& x, double alpha) {
  for (double& v : x.data) v *= alpha;
}

void banded_add_diagonal(BandedMatrix& x, double alpha) {
  for (int j = 0; j < x.dim; ++j) x.at(j, j) += alpha;
}

BandedMatrix banded_with_half_bw(const BandedMatrix& x, int half_bw) {
  BandedMatrix out(x.dim, half_bw);
  if (half_bw >= x.half_bw) {
    banded_axpy(1.0, x, out);
    return out;
  }
  for (int j = 0; j < x.dim; ++j) {
    const int ilo = std::max(0, j - x.half_bw), ihi = std::min(x.dim - 1, j + x.half_bw);
    for (int i = ilo; i <= ihi; ++i) {
      const double v = x.at(i, j);
      if (!out.in_band(i, j)) {
        if (v != 0.0)
          throw ValidationError("bandwidth narrowing would drop nonzero entries");
        continue;
      }
      out.at(i, j) = v;
    }
  }
  return out;
}

void banded_times_dense(const BandedMatrix& a, const double* x, int ldx,
                        double* y, int ldy, int ncols) {
  const int n = a.dim;
  const int d = a.half_bw;
  const int lda = a.ld();
  const double* ap = a.data.data();
  for (int c = 0; c < ncols; ++c) {
    const double* xc = x + static_cast<std::size_t>(c) * ldx;
    double* yc = y + static_cast<std::size_t>(c) * ldy;
    std::fill(yc, yc + n, 0.0);
    for (int k = 0; k < n; ++k) {
      const double xk = xc[k];
      if (xk == 0.0) continue;
      const int ilo = std::max(0, k - d), ihi = std::min(n - 1, k + d);
      const double* acol = ap + static_cast<std::size_t>(k) * lda + d - k;
      for (int i = ilo; i <= ihi; ++i) yc[i] += acol[i] * xk;
    }
  }
}

double banded_max_abs(const BandedMatrix& x) {
  double m = 0.0;
  for (int j = 0; j < x.dim; ++j) {
    const int ilo = std::max(0, j - x.half_bw), ihi = std::min(x.dim - 1, j + x.half_bw);
    for (int i = ilo; i <= ihi; ++i) m = std::max(m, std::abs(x.at(i, j)));
  }
  return m;
}

double banded_skew_defect(const BandedMatrix& x) {
  double m = 0.0;
  for (int j = 0; j < x.dim; ++j) {
    const int ilo = std::max(0, j - x.half_bw), ihi = std::min(x.dim - 1, j + x.half_bw);
    for (int i = ilo; i <= ihi; ++i)
      m = std::max(m, std::abs(x.at(i, j) + x.get(j, i)));
  }
  return m;
}

std::vector<double> banded_to_dense(const BandedMatrix& x) {
  std::vector<double> dense(static_cast<std::size_t>(x.dim) * x.dim, 0.0);
  for (int j = 0; j < x.dim; ++j) {
    const int ilo = std::max(0, j - x.half_bw), ihi = std::min(x.dim - 1, j + x.half_bw);
    for (int i = ilo; i <= ihi; ++i)
      dense[static_cast<std::size_t>(i) * x.dim + j] = x.at(i, j);
  }
  return dense;
}

BandedLU::BandedLU(const BandedMatrix& a) : dim_(a.dim), kl_(a.half_bw) {
  const int n = dim_, kl = kl_, ku = kl_;
  const int ldab = 2 * kl + ku + 1;
  ab_.assign(static_cast<std::size_t>(ldab) * n, 0.0);
  // Band rows shift down by kl inside the factorization workspace.
  for (int j = 0; j < n; ++j) {
    const double* src = a.data.data() + static_cast<std::size_t>(j) * a.ld();
    double* dst = ab_.data() + static_cast<std::size_t>(j) * ldab + kl;
    std::copy(src, src + a.ld(), dst);
  }
  ipiv_.resize(n);
  const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku,
                                         ab_.data(), ldab, ipiv_.data());
  if (info != 0) throw NumericError("banded LU factorization failed (singular factor)");
}

void BandedLU::solve_in_place(double* b, int ldb, int ncols) const {
  const int kl = kl_, ku = kl_;
  const int ldab = 2 * kl + ku + 1;
  const lapack_int info =
      LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', dim_, kl, ku, ncols,
                     ab_.data(), ldab, ipiv_.data(), b, ldb);
  if (info != 0) throw NumericError("banded solve failed");
}

}  // namespace kinkflow
