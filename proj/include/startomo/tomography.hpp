#ifndef STARTOMO_TOMOGRAPHY_HPP
#define STARTOMO_TOMOGRAPHY_HPP

// Degree-of-freedom counting, transfer-matrix assembly with trace priors,
// pseudoinverse reconstruction and propagated variances.
//
// Unknowns are the expansion coefficients c of rho = sum_m c_m B_m. A
// measurement row (readout j, observable i) holds Tr(U_j^dag O_i U_j B_m);
// one prior row per included sector holds 1 on that sector's diagonal basis
// elements, with right-hand side lambda_p. Observables are traceless per
// block, so the prior rows are orthogonal to every measurement row.

#include "startomo/circuits.hpp"
#include "startomo/measurement.hpp"

#include <cmath>
#include <limits>

namespace startomo {

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

/// Number of free real parameters of a star-symmetric state.
inline int dof_count(int n_total, bool dicke_only = false) {
  if (n_total < 2) throw std::invalid_argument("dof_count: N must be >= 2");
  if (dicke_only) return 4 * n_total * n_total - 1;
  const BlockStructure s{RegisterSpec{n_total}};
  return s.basis_size() - static_cast<int>(s.sector_count());
}

/// Closed form 2N(N+1)(N+2)/3 - ceil(N/2).
inline int dof_count_closed_form(int n_total) {
  return 2 * n_total * (n_total + 1) * (n_total + 2) / 3 - ceil_div(n_total, 2);
}

inline int min_readouts(int n_total, bool dicke_only = false) {
  return ceil_div(dof_count(n_total, dicke_only), n_observables(n_total));
}

struct RowLabel {
  bool prior = false;
  int readout = -1;
  int observable = -1;
  std::size_t sector = 0;
};

struct TransferMatrix {
  RMatrix entries;
  int measurement_rows = 0;
  std::vector<RowLabel> rows;

  int total_rows() const { return static_cast<int>(entries.rows()); }
  int prior_rows() const { return total_rows() - measurement_rows; }
  int cols() const { return static_cast<int>(entries.cols()); }
  auto measurement_block() const { return entries.topRows(measurement_rows); }
};

/// Prior rows for the sectors covered by `basis`.
inline RMatrix trace_prior_rows(const OperatorBasis& basis) {
  RMatrix p = RMatrix::Zero(static_cast<Eigen::Index>(basis.sectors().size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t m = 0; m < basis.size(); ++m) {
    const auto& e = basis.element(m);
    if (e.kind != BasisKind::diagonal) continue;
    const auto it = std::find(basis.sectors().begin(), basis.sectors().end(), e.sector);
    p(it - basis.sectors().begin(), static_cast<Eigen::Index>(m)) = 1.0;
  }
  return p;
}

/// Measurement rows of one readout written into `out` (N_o x basis size).
inline void readout_rows(const std::vector<CMatrix>& u, const ObservableSet& obs, const OperatorBasis& basis,
                         Eigen::Ref<RMatrix> out) {
  std::vector<CMatrix> conj(u.size());
  RVector row(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t k = 0; k < u.size(); ++k) conj[k] = u[k].adjoint() * obs.items[i].block(k) * u[k];
    basis.traces_into(conj, row.data());
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
}

inline TransferMatrix build_transfer_matrix(std::span<const BlockUnitary> readouts, const ObservableSet& obs,
                                            const OperatorBasis& basis) {
  if (!(obs.structure == basis.structure())) throw std::invalid_argument("build_transfer_matrix: structure mismatch");
  for (const auto& u : readouts)
    if (!(u.structure() == basis.structure())) throw std::invalid_argument("build_transfer_matrix: readout structure mismatch");
  const Eigen::Index n_o = static_cast<Eigen::Index>(obs.size());
  const Eigen::Index n_meas = n_o * static_cast<Eigen::Index>(readouts.size());
  const RMatrix prior = trace_prior_rows(basis);
  TransferMatrix f;
  f.measurement_rows = static_cast<int>(n_meas);
  f.entries.resize(n_meas + prior.rows(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < readouts.size(); ++j) {
    readout_rows(readouts[j].blocks(), obs, basis, f.entries.middleRows(static_cast<Eigen::Index>(j) * n_o, n_o));
    for (Eigen::Index i = 0; i < n_o; ++i) f.rows.push_back({false, static_cast<int>(j), static_cast<int>(i), 0});
  }
  f.entries.bottomRows(prior.rows()) = prior;
  for (std::size_t p = 0; p < basis.sectors().size(); ++p) f.rows.push_back({true, -1, -1, basis.sectors()[p]});
  return f;
}

inline int numerical_rank(const TransferMatrix& f, double tol = 1e-10) { return numerical_rank(f.entries, tol); }

/// Noiseless measurement vector of `state` (measurement rows only).
inline RVector predicted_measurements(const TransferMatrix& f, const RVector& coefficients) {
  return f.entries.topRows(f.measurement_rows) * coefficients;
}

/// Per-sector traces of `state` restricted to the sectors a basis covers.
inline RVector sector_traces(const BlockState& state, const OperatorBasis& basis) {
  RVector l(static_cast<Eigen::Index>(basis.sectors().size()));
  for (std::size_t p = 0; p < basis.sectors().size(); ++p) l(static_cast<Eigen::Index>(p)) = state.trace_weights()[basis.sectors()[p]];
  return l;
}

struct ReconstructionResult {
  RVector coefficients;
  BlockState state;
  double residual_norm = 0.0;
  int rank = 0;
  bool rank_deficient = false;
};

/// Linear inversion with a cached pseudoinverse, for repeated reconstructions
/// against one transfer matrix.
class LinearInverter {
 public:
  LinearInverter(const TransferMatrix& f, OperatorBasis basis, double tol = 1e-10)
      : f_(f.entries), measurement_rows_(f.measurement_rows), basis_(std::move(basis)) {
    if (f_.cols() != static_cast<Eigen::Index>(basis_.size())) throw std::invalid_argument("LinearInverter: basis size mismatch");
    pinv_ = pseudoinverse(f_, tol, &rank_);
  }

  int rank() const { return rank_; }
  bool rank_deficient() const { return rank_ < f_.cols(); }
  const RMatrix& pinv() const { return pinv_; }

  ReconstructionResult reconstruct(const RVector& o, const RVector& lambda) const {
    if (o.size() != measurement_rows_) throw std::invalid_argument("reconstruct: measurement vector length mismatch");
    if (lambda.size() != f_.rows() - measurement_rows_) throw std::invalid_argument("reconstruct: prior vector length mismatch");
    RVector rhs(f_.rows());
    rhs << o, lambda;
    ReconstructionResult r;
    r.coefficients = pinv_ * rhs;
    r.state = BlockState(basis_.assemble(r.coefficients));
    r.residual_norm = (f_ * r.coefficients - rhs).norm();
    r.rank = rank_;
    r.rank_deficient = rank_deficient();
    return r;
  }

 private:
  RMatrix f_;
  int measurement_rows_;
  OperatorBasis basis_;
  RMatrix pinv_;
  int rank_ = 0;
};

/// c = pinv(F) [o; lambda]. Rank deficiency is flagged, not fatal; no
/// positivity is enforced.
inline ReconstructionResult reconstruct(const TransferMatrix& f, const RVector& o, const RVector& lambda,
                                        const OperatorBasis& basis) {
  return LinearInverter(f, basis).reconstruct(o, lambda);
}

/// Var(c_m) = sum_k pinv(F)_{mk}^2 var_o_k over all rows (prior rows normally 0).
inline RVector predicted_variances(const TransferMatrix& f, const RVector& var_o) {
  if (var_o.size() != f.total_rows()) throw std::invalid_argument("predicted_variances: variance vector length mismatch");
  const RMatrix pinv = pseudoinverse(f.entries, 1e-10);
  return pinv.array().square().matrix() * var_o;
}

/// Measurement-row variances v for every row, prior rows exact.
inline RVector uniform_row_variances(const TransferMatrix& f, double v) {
  RVector var = RVector::Zero(f.total_rows());
  var.head(f.measurement_rows).setConstant(v);
  return var;
}

/// f = sum_m w_m Var(c_m).
inline double cost(const TransferMatrix& f, const RVector& weights, const RVector& var_o) {
  if (weights.size() != f.cols()) throw std::invalid_argument("cost: weight vector length mismatch");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("cost: weights must be nonnegative");
  return weights.dot(predicted_variances(f, var_o));
}

/// Normal-equation evaluation of the variance cost and its derivative with
/// respect to the measurement rows of F. Valid when F has full column rank;
/// reports +inf otherwise.
///
/// With A = F^T F, G = A^-1, M = Fm^T V Fm and Q = G M G:
///   f = sum_m w_m Q_mm,
///   df/dFm = 2 V Fm (G W G) - 2 Fm (Q W G + G W Q).
class VarianceCost {
 public:
  VarianceCost(RMatrix prior, RVector weights) : prior_gram_(prior.transpose() * prior), weights_(std::move(weights)) {}

  /// `row_var` holds the variance of each measurement row.
  double value(const RMatrix& fm, const RVector& row_var) const {
    RMatrix g;
    if (!inverse_gram(fm, g)) return std::numeric_limits<double>::infinity();
    const RMatrix m = fm.transpose() * row_var.asDiagonal() * fm;
    const RMatrix mg = m * g;
    double f = 0.0;
    for (Eigen::Index c = 0; c < g.cols(); ++c) f += weights_(c) * g.col(c).dot(mg.col(c));
    return f;
  }

  double value_and_gradient(const RMatrix& fm, const RVector& row_var, RMatrix& dfm) const {
    RMatrix g;
    if (!inverse_gram(fm, g)) return std::numeric_limits<double>::infinity();
    const RMatrix m = fm.transpose() * row_var.asDiagonal() * fm;
    const RMatrix q = g * (m * g);
    const RMatrix wg = weights_.asDiagonal() * g;
    const RMatrix qwg = q * wg;
    const RMatrix s1 = qwg + qwg.transpose();
    const RMatrix t = g * wg;
    dfm = 2.0 * (row_var.asDiagonal() * (fm * t)) - 2.0 * (fm * s1);
    return weights_.dot(q.diagonal());
  }

 private:
  bool inverse_gram(const RMatrix& fm, RMatrix& g) const {
    RMatrix a = prior_gram_;
    a.selfadjointView<Eigen::Lower>().rankUpdate(fm.transpose());
    a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
    Eigen::LLT<RMatrix> llt(a);
    if (llt.info() != Eigen::Success || !(llt.rcond() > kMinRcond)) return false;
    g = llt.solve(RMatrix::Identity(a.rows(), a.cols()));
    return g.allFinite();
  }

  // cond(F)^2 above ~1e13 is treated as rank deficient.
  static constexpr double kMinRcond = 1e-13;
  RMatrix prior_gram_;
  RVector weights_;
};

}  // namespace startomo

#endif  // STARTOMO_TOMOGRAPHY_HPP
