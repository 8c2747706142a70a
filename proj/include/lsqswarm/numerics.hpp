#pragma once

#include <complex>
#include <vector>

#include "lsqswarm/dense.hpp"

namespace lsqswarm {

using ComplexScalar = std::complex<double>;

inline constexpr double kDefaultSpectralTol = 1e-8;
inline constexpr double kRankTol = 1e-10;
inline constexpr double kRankSquaredTol = 1e-12;

struct SpectralReport {
  std::vector<ComplexScalar> eigenvalues;
  std::size_t zero_eig_count = 0;
  double max_nonzero_real_part = 0.0;  // -inf when every eigenvalue is zero
  bool hurwitz_nonzero = false;        // all nonzero eigenvalues strictly stable
  bool zero_nondefective = false;      // zero eigenvalue carries full eigenspace
  std::size_t rank = 0;                // numerical rank of M
  std::size_t rank_squared = 0;        // numerical rank of M*M
};

// Minimum-norm least-squares solution via SVD.
DenseVector least_squares_oracle(const DenseMatrix& a, const DenseVector& b);

// A^T (A x - b)
DenseVector residual_gradient(const DenseMatrix& a, const DenseVector& b,
                              const DenseVector& x);

// True iff b lies in the range of A (exact solution exists).
bool consistency_check(const DenseMatrix& a, const DenseVector& b, double tol);

std::vector<ComplexScalar> eigenvalues(const DenseMatrix& m);
double spectral_radius(const DenseMatrix& m);

// Rank against the relative singular-value threshold tol * sigma_max.
std::size_t numerical_rank(const DenseMatrix& m, double tol);

// [ -L1      -Y        L1    ]
// [ -Y^T L1  -Y^T Y-L2 Y^T L1]
// [  0        Y       -L1    ]
// with L1 p-by-p, L2 q-by-q, Y p-by-q.
DenseMatrix build_lemma2_matrix(const DenseMatrix& l1, const DenseMatrix& l2,
                                const DenseMatrix& y);

// Classifies the spectrum: eigenvalues with |lambda| <= tol_spec*||M||_F count
// as zero; the rest must sit strictly in the open left half plane, and the
// zero eigenvalue must be semisimple (rank M == rank M^2).
SpectralReport spectral_verify(const DenseMatrix& m,
                               double tol_spec = kDefaultSpectralTol);

}  // namespace lsqswarm
