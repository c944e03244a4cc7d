#ifndef STARTOMO_CIRCUITS_HPP
#define STARTOMO_CIRCUITS_HPP

// Readout unitaries from parameterized circuits, synthesized blockwise.
//
// A layer of single-qubit rotations has six angles (a, b, c) for the central
// spin and (a', b', c') for the collective peripheral rotation, each realizing
// Rx(a) Ry(b) Rx(c). An L-layer circuit is
//   U = R(p_L) E R(p_{L-1}) ... E R(p_1)
// with E = exp(-i (pi/2) Jz (x) sigma_z), free evolution for tau = 1/(2 J).

#include "startomo/block_hilbert.hpp"

#include <random>
#include <vector>

namespace startomo {

inline constexpr int kParamsPerLayer = 6;

struct CircuitLayout {
  int layers = 3;

  int params_per_circuit() const { return kParamsPerLayer * layers; }
  void validate() const {
    if (layers < 1) throw std::invalid_argument("CircuitLayout: layers must be >= 1");
  }
};

/// One row of angles per readout circuit. Rows with fewer layers than
/// `layers` (mixed-depth sets) use the leading 6 * row_layers columns; the
/// remaining columns are ignored.
struct ParamMatrix {
  int n_total = 2;
  int layers = 1;
  RMatrix theta;
  std::vector<int> row_layers;

  int readouts() const { return static_cast<int>(theta.rows()); }
  int layers_of(int row) const { return row_layers.empty() ? layers : row_layers.at(row); }
  bool mixed() const {
    for (int l : row_layers)
      if (l != layers) return true;
    return false;
  }
  void validate() const {
    if (layers < 1) throw std::invalid_argument("ParamMatrix: layers must be >= 1");
    if (theta.cols() != kParamsPerLayer * layers) throw std::invalid_argument("ParamMatrix: theta must have 6*layers columns");
    if (!row_layers.empty() && static_cast<Eigen::Index>(row_layers.size()) != theta.rows())
      throw std::invalid_argument("ParamMatrix: row_layers length mismatch");
    for (int l : row_layers)
      if (l < 1 || l > layers) throw std::invalid_argument("ParamMatrix: row layer count out of range");
    if (!theta.allFinite()) throw std::invalid_argument("ParamMatrix: non-finite angle");
  }
};

inline ParamMatrix random_params(int n_total, const CircuitLayout& layout, int n_readouts, std::uint64_t seed) {
  layout.validate();
  if (n_readouts < 1) throw std::invalid_argument("random_params: need at least one readout");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  ParamMatrix p;
  p.n_total = n_total;
  p.layers = layout.layers;
  p.theta.resize(n_readouts, layout.params_per_circuit());
  for (Eigen::Index r = 0; r < p.theta.rows(); ++r)
    for (Eigen::Index c = 0; c < p.theta.cols(); ++c) {
      double a = angle(rng);
      if (a >= 2.0 * kPi) a = 0.0;
      p.theta(r, c) = a;
    }
  return p;
}

/// Unitary per sector.
class BlockUnitary {
 public:
  BlockUnitary() = default;
  BlockUnitary(BlockStructure s, std::vector<CMatrix> blocks) : matrix_(std::move(s), std::move(blocks), false) {}
  explicit BlockUnitary(BlockMatrix m) : matrix_(std::move(m)) { matrix_.set_hermitian(false); }

  static BlockUnitary identity(const BlockStructure& s) { return BlockUnitary(BlockMatrix::identity(s)); }

  const BlockMatrix& matrix() const { return matrix_; }
  const BlockStructure& structure() const { return matrix_.structure(); }
  const CMatrix& block(std::size_t k) const { return matrix_.block(k); }
  const std::vector<CMatrix>& blocks() const { return matrix_.blocks(); }

  double unitarity_defect() const {
    double d = 0.0;
    for (const auto& b : matrix_.blocks())
      d = std::max(d, (b.adjoint() * b - CMatrix::Identity(b.rows(), b.cols())).cwiseAbs().maxCoeff());
    return d;
  }

  /// U^dagger O U, the observable measured after this readout.
  BlockMatrix heisenberg(const BlockMatrix& op) const {
    matrix_.check_same(op);
    std::vector<CMatrix> r;
    for (std::size_t k = 0; k < op.size(); ++k) r.push_back(hermitian_part(block(k).adjoint() * op.block(k) * block(k)));
    return BlockMatrix(structure(), std::move(r), op.hermitian());
  }
  /// U rho U^dagger.
  BlockMatrix apply(const BlockMatrix& rho) const {
    matrix_.check_same(rho);
    std::vector<CMatrix> r;
    for (std::size_t k = 0; k < rho.size(); ++k) r.push_back(hermitian_part(block(k) * rho.block(k) * block(k).adjoint()));
    return BlockMatrix(structure(), std::move(r), rho.hermitian());
  }

  friend BlockUnitary operator*(const BlockUnitary& a, const BlockUnitary& b) { return BlockUnitary(a.matrix_ * b.matrix_); }

 private:
  BlockMatrix matrix_;
};

/// Per-structure cache of rotation generators and the entangler, used for
/// synthesis and for parameter derivatives of synthesized circuits.
class CircuitKernel {
 public:
  /// Generator slot of each of the six layer angles: central x, y, x then
  /// peripheral x, y, x. Factor order within a layer matches the angle order
  /// (leftmost = angle 0); central and peripheral factors commute.
  enum Generator { central_x = 0, central_y = 1, peripheral_x = 2, peripheral_y = 3 };
  static constexpr Generator kAngleGenerator[kParamsPerLayer] = {central_x, central_y, central_x,
                                                                 peripheral_x, peripheral_y, peripheral_x};

  CircuitKernel() = default;
  explicit CircuitKernel(const BlockStructure& s) : structure_(s) {
    for (const auto& sec : s.sectors()) {
      SectorCache c;
      const SpinMatrices jm = angular_momentum_ops_2j(sec.j2);
      const int d = sec.peripheral_dim;
      c.generators[central_x] = kron_central(d, 0.5 * pauli_x());
      c.generators[central_y] = kron_central(d, 0.5 * pauli_y());
      c.generators[peripheral_x] = kron_peripheral(jm.x);
      c.generators[peripheral_y] = kron_peripheral(jm.y);
      for (int g = 0; g < 4; ++g) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(c.generators[g]);
        c.eigvecs[g] = es.eigenvectors();
        c.eigvals[g] = es.eigenvalues();
      }
      c.entangler = CVector(sec.block_dim);
      for (int a = 0; a < d; ++a) {
        const double m = 0.5 * sec.j2 - a;
        c.entangler(2 * a) = std::exp(-kI * (kPi / 2) * m);
        c.entangler(2 * a + 1) = std::exp(kI * (kPi / 2) * m);
      }
      sectors_.push_back(std::move(c));
    }
  }

  const BlockStructure& structure() const { return structure_; }

  const CMatrix& generator(std::size_t sector, int angle_slot) const {
    return sectors_.at(sector).generators[kAngleGenerator[angle_slot]];
  }

  /// exp(-i angle G) for the generator of layer slot `slot`.
  CMatrix factor(std::size_t sector, int slot, double angle) const {
    const SectorCache& c = sectors_[sector];
    const int g = kAngleGenerator[slot];
    if (angle == 0.0) return CMatrix::Identity(c.eigvecs[g].rows(), c.eigvecs[g].cols());
    CVector ph = (c.eigvals[g].cast<Complex>() * (-kI * angle)).array().exp();
    return c.eigvecs[g] * ph.asDiagonal() * c.eigvecs[g].adjoint();
  }

  std::vector<CMatrix> rotation_layer(std::span<const double> p) const {
    if (p.size() != kParamsPerLayer) throw std::invalid_argument("rotation_layer: need 6 angles");
    std::vector<CMatrix> out;
    for (std::size_t k = 0; k < sectors_.size(); ++k) {
      const int d = structure_.sector(k).block_dim;
      CMatrix u = CMatrix::Identity(d, d);
      for (int slot = 0; slot < kParamsPerLayer; ++slot) u = u * factor(k, slot, p[slot]);
      out.push_back(std::move(u));
    }
    return out;
  }

  const CVector& entangler_phases(std::size_t sector) const { return sectors_.at(sector).entangler; }

  /// Blocks of U for a circuit of `layers` layers using the leading 6*layers angles.
  std::vector<CMatrix> synthesize(std::span<const double> row, int layers) const {
    if (layers < 1 || row.size() < static_cast<std::size_t>(kParamsPerLayer * layers))
      throw std::invalid_argument("synthesize: parameter row length does not match the layout");
    std::vector<CMatrix> u = rotation_layer(row.subspan(0, kParamsPerLayer));
    for (int l = 1; l < layers; ++l) {
      const auto r = rotation_layer(row.subspan(static_cast<std::size_t>(kParamsPerLayer * l), kParamsPerLayer));
      for (std::size_t k = 0; k < u.size(); ++k) u[k] = r[k] * (sectors_[k].entangler.asDiagonal() * u[k]);
    }
    return u;
  }

  /// Derivatives of sum_i Tr(U^dag O_i U H_i) with respect to every angle of
  /// the circuit, given Z = (sum_i H_i U^dag O_i) U per sector:
  /// d/dtheta_p = 2 Im Tr(G_p R_p Z R_p^dag), with R_p the product of all
  /// factors applied up to and including p.
  void angle_gradient(std::span<const double> row, int layers, const std::vector<CMatrix>& z, double* grad) const {
    for (int p = 0; p < kParamsPerLayer * layers; ++p) grad[p] = 0.0;
    for (std::size_t k = 0; k < sectors_.size(); ++k) {
      const int d = structure_.sector(k).block_dim;
      CMatrix r = CMatrix::Identity(d, d);
      for (int l = 0; l < layers; ++l) {
        if (l > 0) r = sectors_[k].entangler.asDiagonal() * r;
        // within a layer the rightmost factor (slot 5) acts first
        for (int slot = kParamsPerLayer - 1; slot >= 0; --slot) {
          const int p = kParamsPerLayer * l + slot;
          r = factor(k, slot, row[static_cast<std::size_t>(p)]) * r;
          const CMatrix m = r * z[k] * r.adjoint();
          grad[p] += 2.0 * (generator(k, slot).cwiseProduct(m.transpose())).sum().imag();
        }
      }
    }
  }

 private:
  static CMatrix pauli_x() {
    CMatrix p(2, 2);
    p << 0, 1, 1, 0;
    return p;
  }
  static CMatrix pauli_y() {
    CMatrix p(2, 2);
    p << 0, -kI, kI, 0;
    return p;
  }

  struct SectorCache {
    CMatrix generators[4];
    CMatrix eigvecs[4];
    RVector eigvals[4];
    CVector entangler;
  };
  BlockStructure structure_;
  std::vector<SectorCache> sectors_;
};

inline BlockUnitary rotation_layer(std::span<const double> p, const BlockStructure& s) {
  return BlockUnitary(s, CircuitKernel(s).rotation_layer(p));
}

inline BlockUnitary entangling_layer(const BlockStructure& s) {
  CircuitKernel kernel(s);
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < s.sector_count(); ++k) blocks.push_back(kernel.entangler_phases(k).asDiagonal().toDenseMatrix());
  return BlockUnitary(s, std::move(blocks));
}

inline BlockUnitary synthesize(std::span<const double> theta_row, const CircuitLayout& layout, const BlockStructure& s) {
  layout.validate();
  if (theta_row.size() != static_cast<std::size_t>(layout.params_per_circuit()))
    throw std::invalid_argument("synthesize: row length must be 6 * layers");
  return BlockUnitary(s, CircuitKernel(s).synthesize(theta_row, layout.layers));
}

/// All readouts of a parameter matrix.
inline std::vector<BlockUnitary> synthesize_all(const ParamMatrix& p, const CircuitKernel& kernel) {
  p.validate();
  std::vector<BlockUnitary> out;
  std::vector<double> row(static_cast<std::size_t>(p.theta.cols()));
  for (int r = 0; r < p.readouts(); ++r) {
    for (Eigen::Index c = 0; c < p.theta.cols(); ++c) row[static_cast<std::size_t>(c)] = p.theta(r, c);
    out.emplace_back(kernel.structure(), kernel.synthesize(row, p.layers_of(r)));
  }
  return out;
}

inline std::vector<BlockUnitary> synthesize_all(const ParamMatrix& p, const BlockStructure& s) {
  return synthesize_all(p, CircuitKernel(s));
}

}  // namespace startomo

#endif  // STARTOMO_CIRCUITS_HPP
