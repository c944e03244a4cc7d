#ifndef STARTOMO_STATES_HPP
#define STARTOMO_STATES_HPP

// Benchmark states in brief block form and reconstruction-quality metrics.

#include "startomo/block_hilbert.hpp"

#include <bit>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace startomo {

/// Brief-representation density matrix with its per-sector traces.
class BlockState {
 public:
  BlockState() = default;
  explicit BlockState(BlockMatrix m) : matrix_(std::move(m)) {
    if (!matrix_.hermitian()) throw std::invalid_argument("BlockState: matrix must be Hermitian");
    for (std::size_t k = 0; k < matrix_.size(); ++k) lambda_.push_back(matrix_.block(k).trace().real());
  }

  const BlockMatrix& matrix() const { return matrix_; }
  const BlockStructure& structure() const { return matrix_.structure(); }
  const CMatrix& block(std::size_t k) const { return matrix_.block(k); }
  std::span<const double> trace_weights() const { return lambda_; }
  double trace() const {
    double t = 0.0;
    for (double l : lambda_) t += l;
    return t;
  }
  double min_eigenvalue() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& b : matrix_.blocks()) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(b), Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues()(0));
    }
    return lo;
  }
  bool is_psd(double floor = -1e-10) const { return min_eigenvalue() >= floor; }
  double purity() const {
    double p = 0.0;
    for (const auto& b : matrix_.blocks()) p += (b * b).trace().real();
    return p;
  }

 private:
  BlockMatrix matrix_;
  std::vector<double> lambda_;
};

enum class StateKind { mssm, ghz, coherent, squeezed, random, maximally_mixed };

inline std::string_view to_string(StateKind k) {
  switch (k) {
    case StateKind::mssm: return "mssm";
    case StateKind::ghz: return "ghz";
    case StateKind::coherent: return "coherent";
    case StateKind::squeezed: return "squeezed";
    case StateKind::random: return "random";
    case StateKind::maximally_mixed: return "maximally_mixed";
  }
  return "?";
}

inline StateKind parse_state_kind(std::string_view s) {
  for (StateKind k : {StateKind::mssm, StateKind::ghz, StateKind::coherent, StateKind::squeezed, StateKind::random,
                      StateKind::maximally_mixed})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown state kind: " + std::string(s));
}

/// Unset parameters take register-dependent defaults: mssm M = N-2,
/// coherent/squeezed theta = pi/2 and phi = 0, squeezing mu = pi/(2(N-1)).
struct StateSpec {
  StateKind kind = StateKind::maximally_mixed;
  std::optional<int> mssm_many;
  std::optional<double> theta;
  std::optional<double> phi;
  std::optional<double> mu;
  std::uint64_t seed = 0;
};

inline bool is_dicke_family(StateKind k) {
  return k == StateKind::ghz || k == StateKind::coherent || k == StateKind::squeezed;
}

namespace detail {

inline BlockState dicke_pure(const BlockStructure& s, const CVector& peripheral) {
  BlockMatrix m = BlockMatrix::zero(s);
  const int d = s.sector(0).peripheral_dim;
  CVector psi = CVector::Zero(2 * d);
  for (int a = 0; a < d; ++a) psi(2 * a) = peripheral(a);  // central |0>
  psi.normalize();
  m.block(0) = psi * psi.adjoint();
  return BlockState(std::move(m));
}

inline CVector coherent_vector(int j2, double theta, double phi) {
  const SpinMatrices jm = angular_momentum_ops_2j(j2);
  CVector top = CVector::Zero(j2 + 1);
  top(0) = 1.0;
  return expi_hermitian(jm.z, phi) * (expi_hermitian(jm.y, theta) * top);
}

// Full-space product vector |bits>|central>, bits over the peripheral qubits.
inline CVector basis_vector(int n_total, std::size_t peripheral_bits, int central) {
  CVector v = CVector::Zero(Eigen::Index{1} << n_total);
  v((peripheral_bits << 1) | static_cast<std::size_t>(central)) = 1.0;
  return v;
}

}  // namespace detail

/// Mixture over peripheral permutations of (|M,S>|0> + |S,M>|1>) cat states,
/// |M,S> having `many` spins up. Built in full space and compressed.
inline BlockState make_mssm(const BlockStructure& s, int many, int cap = kDefaultFullSpaceCap) {
  const int n = s.n_peripheral();
  if (many < 0 || many > n) throw std::invalid_argument("mssm: M must lie in [0, N-1]");
  if (n > cap) throw std::invalid_argument("mssm: register exceeds the full-space cap");
  const SchurBasis basis = build_schur_basis(n, cap);
  const std::size_t mask = (std::size_t{1} << n) - 1;
  std::vector<CVector> vecs;
  for (std::size_t bits = 0; bits <= mask; ++bits) {
    // |0> is up: `many` zero bits
    if (n - std::popcount(bits) != many) continue;
    vecs.push_back(detail::basis_vector(s.n_total(), bits, 0) + detail::basis_vector(s.n_total(), ~bits & mask, 1));
  }
  std::vector<double> w(vecs.size(), 1.0 / (2.0 * static_cast<double>(vecs.size())));
  return BlockState(compress_pure_sum(vecs, w, basis, s));
}

inline BlockState make_maximally_mixed(const BlockStructure& s) {
  BlockMatrix m = BlockMatrix::zero(s);
  const double dim = std::ldexp(1.0, s.n_total());
  for (std::size_t k = 0; k < s.sector_count(); ++k)
    m.block(k) = CMatrix::Identity(s.sector(k).block_dim, s.sector(k).block_dim) *
                 (static_cast<double>(s.sector(k).multiplicity) / dim);
  return BlockState(std::move(m));
}

/// Wishart blocks with Dirichlet trace weights of concentration mult * block_dim.
inline BlockState make_random_state(const BlockStructure& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> lambda;
  double total = 0.0;
  for (const auto& sec : s.sectors()) {
    std::gamma_distribution<double> g(static_cast<double>(sec.multiplicity) * sec.block_dim, 1.0);
    lambda.push_back(g(rng));
    total += lambda.back();
  }
  BlockMatrix m = BlockMatrix::zero(s);
  for (std::size_t k = 0; k < s.sector_count(); ++k) {
    const int d = s.sector(k).block_dim;
    CMatrix g(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) g(r, c) = Complex(normal(rng), normal(rng));
    CMatrix w = hermitian_part(g * g.adjoint());
    m.block(k) = w * (lambda[k] / total / w.trace().real());
  }
  return BlockState(std::move(m));
}

inline BlockState make_state(const StateSpec& spec, const BlockStructure& s) {
  const int n = s.n_peripheral();
  const int j2 = s.sector(0).j2;
  switch (spec.kind) {
    case StateKind::maximally_mixed: return make_maximally_mixed(s);
    case StateKind::random: return make_random_state(s, spec.seed);
    case StateKind::mssm: return make_mssm(s, spec.mssm_many.value_or(n - 1));
    case StateKind::ghz: {
      CVector v = CVector::Zero(j2 + 1);
      v(0) = 1.0;
      v(j2) = 1.0;
      return detail::dicke_pure(s, v);
    }
    case StateKind::coherent:
      return detail::dicke_pure(s, detail::coherent_vector(j2, spec.theta.value_or(kPi / 2), spec.phi.value_or(0.0)));
    case StateKind::squeezed: {
      const double mu = spec.mu.value_or(kPi / (2.0 * n));
      const SpinMatrices jm = angular_momentum_ops_2j(j2);
      const CVector css = detail::coherent_vector(j2, spec.theta.value_or(kPi / 2), spec.phi.value_or(0.0));
      return detail::dicke_pure(s, expi_hermitian(jm.z * jm.z, mu) * css);
    }
  }
  throw std::invalid_argument("make_state: unknown kind");
}

inline void check_same_structure(const BlockState& a, const BlockState& b) {
  if (!(a.structure() == b.structure())) throw std::invalid_argument("states have different block structures");
}

/// Uhlmann fidelity, blockwise. Both states should be PSD.
inline double fidelity(const BlockState& a, const BlockState& b) {
  check_same_structure(a, b);
  double root = 0.0;
  for (std::size_t k = 0; k < a.matrix().size(); ++k) {
    const CMatrix sa = sqrt_psd(a.block(k));
    const CMatrix inner = hermitian_part(sa * b.block(k) * sa);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(inner, Eigen::EigenvaluesOnly);
    root += es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  }
  return std::clamp(root * root, 0.0, 1.0);
}

/// Frobenius distance between brief representations.
inline double frobenius_distance(const BlockState& a, const BlockState& b) {
  check_same_structure(a, b);
  double s = 0.0;
  for (std::size_t k = 0; k < a.matrix().size(); ++k) s += (a.block(k) - b.block(k)).squaredNorm();
  return std::sqrt(s);
}

/// Clip negative eigenvalues per block and rescale each block back to its trace.
inline BlockState psd_project(const BlockState& st) {
  BlockMatrix m = BlockMatrix::zero(st.structure());
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double lambda = st.trace_weights()[k];
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(st.block(k)));
    RVector ev = es.eigenvalues().cwiseMax(0.0);
    const double pos = ev.sum();
    if (pos <= 0.0) {
      if (lambda > 1e-14)
        throw std::runtime_error("psd_project: sector " + std::to_string(k) +
                                 " has positive trace but no positive eigenvalue");
      continue;
    }
    ev *= std::max(lambda, 0.0) / pos;
    m.block(k) = hermitian_part(es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
  }
  return BlockState(std::move(m));
}

}  // namespace startomo

#endif  // STARTOMO_STATES_HPP
