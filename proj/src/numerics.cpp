#include "lsqswarm/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "lsqswarm/errors.hpp"

namespace lsqswarm {
namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const EigenRowMajor> as_eigen(const DenseMatrix& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<const Eigen::VectorXd> as_eigen(const DenseVector& v) {
  return {v.data(), static_cast<Eigen::Index>(v.dim())};
}

DenseVector from_eigen(const Eigen::VectorXd& v) {
  return DenseVector(std::vector<double>(v.data(), v.data() + v.size()));
}

std::size_t rank_of(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double thresh = tol * sv(0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++r;
  return r;
}

}  // namespace

DenseVector least_squares_oracle(const DenseMatrix& a, const DenseVector& b) {
  if (a.rows() != b.dim())
    throw DimensionError("least squares: rhs length must match matrix rows");
  if (a.rows() == 0 || a.cols() == 0) return DenseVector(a.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_eigen(a),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  Eigen::VectorXd x = svd.solve(as_eigen(b));
  return from_eigen(x);
}

DenseVector residual_gradient(const DenseMatrix& a, const DenseVector& b,
                              const DenseVector& x) {
  if (a.rows() != b.dim() || a.cols() != x.dim())
    throw DimensionError("residual gradient shape mismatch");
  DenseVector r = a * x - b;
  return a.transposed() * r;
}

bool consistency_check(const DenseMatrix& a, const DenseVector& b, double tol) {
  DenseVector x = least_squares_oracle(a, b);
  const double resid = (a * x - b).norm();
  return resid <= tol * std::max(1.0, b.norm());
}

std::vector<ComplexScalar> eigenvalues(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("eigenvalues need a square matrix");
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> solver(as_eigen(m),
                                             /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigenvalue iteration failed to converge");
  std::vector<ComplexScalar> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    out[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
  return out;
}

double spectral_radius(const DenseMatrix& m) {
  double rho = 0.0;
  for (const auto& ev : eigenvalues(m)) rho = std::max(rho, std::abs(ev));
  return rho;
}

std::size_t numerical_rank(const DenseMatrix& m, double tol) {
  return rank_of(as_eigen(m), tol);
}

DenseMatrix build_lemma2_matrix(const DenseMatrix& l1, const DenseMatrix& l2,
                                const DenseMatrix& y) {
  const std::size_t p = l1.rows();
  const std::size_t q = l2.rows();
  if (l1.cols() != p || l2.cols() != q)
    throw DimensionError("L1 and L2 must be square");
  if (y.rows() != p || y.cols() != q)
    throw DimensionError("Y must be p-by-q for L1 p-by-p, L2 q-by-q");
  const double sym_tol_1 = 1e-10 * std::max(1.0, l1.max_abs());
  const double sym_tol_2 = 1e-10 * std::max(1.0, l2.max_abs());
  if (!l1.is_symmetric(sym_tol_1) || !l2.is_symmetric(sym_tol_2))
    throw InvalidInputError("L1 and L2 must be symmetric");
  DenseMatrix yt = y.transposed();
  DenseMatrix yt_l1 = yt * l1;
  DenseMatrix m(2 * p + q, 2 * p + q);
  m.set_block(0, 0, l1.scaled(-1.0));
  m.set_block(0, p, y.scaled(-1.0));
  m.set_block(0, p + q, l1);
  m.set_block(p, 0, yt_l1.scaled(-1.0));
  m.set_block(p, p, (yt * y + l2).scaled(-1.0));
  m.set_block(p, p + q, yt_l1);
  m.set_block(p + q, p, y);
  m.set_block(p + q, p + q, l1.scaled(-1.0));
  return m;
}

SpectralReport spectral_verify(const DenseMatrix& m, double tol_spec) {
  if (m.rows() != m.cols())
    throw DimensionError("spectral verification needs a square matrix");
  SpectralReport report;
  report.eigenvalues = eigenvalues(m);
  const double zero_thresh = tol_spec * m.frobenius_norm();
  report.max_nonzero_real_part = -std::numeric_limits<double>::infinity();
  for (const auto& ev : report.eigenvalues) {
    if (std::abs(ev) <= zero_thresh) {
      ++report.zero_eig_count;
    } else {
      report.max_nonzero_real_part =
          std::max(report.max_nonzero_real_part, ev.real());
    }
  }
  // -inf when the whole spectrum is classified zero, which passes vacuously.
  report.hurwitz_nonzero = report.max_nonzero_real_part < -tol_spec;
  Eigen::MatrixXd em = as_eigen(m);
  report.rank = rank_of(em, kRankTol);
  report.rank_squared = rank_of(em * em, kRankSquaredTol);
  report.zero_nondefective = report.rank == report.rank_squared;
  return report;
}

}  // namespace lsqswarm
