#ifndef STARTOMO_LINALG_HPP
#define STARTOMO_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace startomo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

inline bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// Hermitian part; guards eigen solvers against round-off asymmetry.
inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

/// exp(-i * t * H) for Hermitian H via eigendecomposition.
inline CMatrix expi_hermitian(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  CVector phases = (es.eigenvalues().cast<Complex>() * (-kI * t)).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues below
/// zero (round-off) are clipped.
inline CMatrix sqrt_psd(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
  RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Moore-Penrose pseudoinverse with singular values below rel_tol * sigma_max
/// treated as zero.
inline RMatrix pseudoinverse(const RMatrix& a, double rel_tol, int* rank_out = nullptr) {
  if (a.size() == 0) {
    if (rank_out) *rank_out = 0;
    return RMatrix::Zero(a.cols(), a.rows());
  }
  Eigen::BDCSVD<RMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() ? s(0) : 0.0);
  RVector inv = RVector::Zero(s.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) {
      inv(i) = 1.0 / s(i);
      ++rank;
    }
  }
  if (rank_out) *rank_out = rank;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline int numerical_rank(const RMatrix& a, double rel_tol) {
  if (rel_tol <= 0.0) throw std::invalid_argument("numerical_rank: tol must be positive");
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<RMatrix> svd(a);
  const RVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cutoff = rel_tol * s(0);
  return static_cast<int>((s.array() > cutoff).count());
}

inline std::int64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace startomo

#endif  // STARTOMO_LINALG_HPP
