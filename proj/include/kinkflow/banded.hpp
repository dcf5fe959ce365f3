#pragma once

#include <vector>

namespace kinkflow {

// Square banded matrix, column-major diagonal storage: element (i, j) with
// |i - j| <= half_bw lives at data[j * ld() + (half_bw + i - j)]. The layout
// matches LAPACK band storage so factorizations can consume it directly.
struct BandedMatrix {
  int dim = 0;
  int half_bw = 0;
  std::vector<double> data;

  BandedMatrix() = default;
  BandedMatrix(int dim, int half_bw);

  int ld() const { return 2 * half_bw + 1; }
  bool in_band(int i, int j) const {
    const int d = i - j;
    return d >= -half_bw && d <= half_bw;
  }
  double& at(int i, int j) { return data[static_cast<std::size_t>(j) * ld() + half_bw + i - j]; }
  double at(int i, int j) const {
    return data[static_cast<std::size_t>(j) * ld() + half_bw + i - j];
  }
  // Zero for out-of-band entries.
  double get(int i, int j) const;

  void set_zero();
  static BandedMatrix identity(int dim, int half_bw);
};

// Bandwidth of a product, clipped to the largest representable value.
int product_half_bw(const BandedMatrix& a, const BandedMatrix& b);

// out = a * b. Requires matching dims and out.half_bw >= product_half_bw;
// insufficient workspace bandwidth is an error, never silent truncation.
void banded_multiply(const BandedMatrix& a, const BandedMatrix& b, BandedMatrix& out);
BandedMatrix banded_multiply(const BandedMatrix& a, const BandedMatrix& b);

// out = a * b - b * a, same workspace contract as banded_multiply.
void banded_commutator(const BandedMatrix& a, const BandedMatrix& b, BandedMatrix& out);
BandedMatrix banded_commutator(const BandedMatrix& a, const BandedMatrix& b);

// y += alpha * x; requires x.half_bw <= y.half_bw.
void banded_axpy(double alpha, const BandedMatrix& x, BandedMatrix& y);
void banded_scale(BandedMatrix& x, double alpha);
void banded_add_diagonal(BandedMatrix& x, double alpha);
// Widens (or narrows, if the dropped diagonals are zero) to half_bw.
BandedMatrix banded_with_half_bw(const BandedMatrix& x, int half_bw);

// y = a * x for a dense column-major block x of shape (a.dim, ncols).
void banded_times_dense(const BandedMatrix& a, const double* x, int ldx,
                        double* y, int ldy, int ncols);

double banded_max_abs(const BandedMatrix& x);
// max_ij |x + x^T|, zero for an exactly skew-symmetric band.
double banded_skew_defect(const BandedMatrix& x);

std::vector<double> banded_to_dense(const BandedMatrix& x);  // row-major dim*dim

// LU factorization of a banded matrix with partial pivoting (kl = ku =
// half_bw). Factoring never mutates the source matrix.
class BandedLU {
 public:
  explicit BandedLU(const BandedMatrix& a);

  // Solves a * X = b in place; b is column-major (n, ncols) with leading
  // dimension ldb.
  void solve_in_place(double* b, int ldb, int ncols) const;

  int dim() const { return dim_; }

 private:
  int dim_ = 0;
  int kl_ = 0;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
};

}  // namespace kinkflow
