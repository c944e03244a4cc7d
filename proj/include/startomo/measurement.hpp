#ifndef STARTOMO_MEASUREMENT_HPP
#define STARTOMO_MEASUREMENT_HPP

// Spectral observables of the register, the elementary Hermitian operator
// basis of block space, FID synthesis and the additive noise model.

#include "startomo/states.hpp"

#include <random>
#include <string>
#include <vector>

namespace startomo {

enum class Channel { central, peripheral };
enum class Axis { x, y };

struct ObservableLabel {
  Channel channel = Channel::central;
  int peak = 1;  ///< 1..N for central peaks, 1..2 for peripheral peaks
  Axis axis = Axis::x;

  std::string channel_label() const { return (channel == Channel::central ? "A" : "B") + std::to_string(peak); }
  std::string axis_label() const { return axis == Axis::x ? "x" : "y"; }
};

/// The 2N+4 observables of one measurement setting: N central-spin peaks and
/// two peripheral peaks, each read along x and y.
struct ObservableSet {
  BlockStructure structure;
  std::vector<BlockMatrix> items;
  std::vector<ObservableLabel> labels;

  std::size_t size() const { return items.size(); }
};

inline int n_observables(int n_total) { return 2 * n_total + 4; }

inline CMatrix pauli(Axis a) {
  CMatrix p(2, 2);
  if (a == Axis::x)
    p << 0, 1, 1, 0;
  else
    p << 0, -kI, kI, 0;
  return p;
}

inline ObservableSet build_observables(const BlockStructure& s) {
  ObservableSet set;
  set.structure = s;
  const int n = s.n_peripheral();
  for (int i = 1; i <= s.n_total(); ++i) {
    // i-1 peripheral spins up: Jz eigenvalue m = (i-1) - n/2, doubled below
    const int m2 = 2 * (i - 1) - n;
    for (Axis axis : {Axis::x, Axis::y}) {
      BlockMatrix op = BlockMatrix::zero(s);
      for (std::size_t k = 0; k < s.sector_count(); ++k) {
        const int j2 = s.sector(k).j2;
        if (std::abs(m2) > j2) continue;
        const int a = (j2 - m2) / 2;
        op.block(k).block(2 * a, 2 * a, 2, 2) = pauli(axis);
      }
      set.items.push_back(std::move(op));
      set.labels.push_back({Channel::central, i, axis});
    }
  }
  for (int peak = 1; peak <= 2; ++peak) {
    CMatrix proj = CMatrix::Zero(2, 2);
    proj(peak - 1, peak - 1) = 1.0;
    for (Axis axis : {Axis::x, Axis::y}) {
      BlockMatrix op = BlockMatrix::zero(s);
      for (std::size_t k = 0; k < s.sector_count(); ++k) {
        const SpinMatrices jm = angular_momentum_ops_2j(s.sector(k).j2);
        op.block(k) = kron(2.0 * (axis == Axis::x ? jm.x : jm.y), proj);
      }
      set.items.push_back(std::move(op));
      set.labels.push_back({Channel::peripheral, peak, axis});
    }
  }
  return set;
}

enum class BasisKind { diagonal, symmetric, antisymmetric };

/// Elementary Hermitian basis of block space: |q><q|, |q1><q2| + h.c. and
/// i|q1><q2| + h.c., supported on one sector each. A state is expanded as
/// rho = sum_m c_m B_m.
class OperatorBasis {
 public:
  struct Element {
    std::size_t sector;
    int q1, q2;
    BasisKind kind;
    double norm;  ///< Tr(B_m B_m)
  };

  OperatorBasis() = default;

  /// Basis restricted to `sectors` (all sectors when empty).
  explicit OperatorBasis(const BlockStructure& s, std::vector<std::size_t> sectors = {}) : structure_(s) {
    if (sectors.empty())
      for (std::size_t k = 0; k < s.sector_count(); ++k) sectors.push_back(k);
    std::sort(sectors.begin(), sectors.end());
    sectors_ = sectors;
    for (std::size_t k : sectors_) {
      if (k >= s.sector_count()) throw std::invalid_argument("OperatorBasis: sector out of range");
      const int d = s.sector(k).block_dim;
      sector_offsets_.push_back(static_cast<int>(elements_.size()));
      for (int q = 0; q < d; ++q) elements_.push_back({k, q, q, BasisKind::diagonal, 1.0});
      for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) elements_.push_back({k, a, b, BasisKind::symmetric, 2.0});
      for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) elements_.push_back({k, a, b, BasisKind::antisymmetric, 2.0});
    }
  }

  const BlockStructure& structure() const { return structure_; }
  std::size_t size() const { return elements_.size(); }
  const Element& element(std::size_t m) const { return elements_.at(m); }
  std::span<const Element> elements() const { return elements_; }
  std::span<const std::size_t> sectors() const { return sectors_; }
  /// First basis index of the i-th included sector.
  int sector_offset(std::size_t i) const { return sector_offsets_.at(i); }
  bool covers_all_sectors() const { return sectors_.size() == structure_.sector_count(); }

  BlockMatrix matrix(std::size_t m) const {
    const Element& e = elements_.at(m);
    BlockMatrix b = BlockMatrix::zero(structure_);
    CMatrix& blk = b.block(e.sector);
    switch (e.kind) {
      case BasisKind::diagonal: blk(e.q1, e.q1) = 1.0; break;
      case BasisKind::symmetric:
        blk(e.q1, e.q2) = 1.0;
        blk(e.q2, e.q1) = 1.0;
        break;
      case BasisKind::antisymmetric:
        blk(e.q1, e.q2) = kI;
        blk(e.q2, e.q1) = -kI;
        break;
    }
    return b;
  }

  /// Tr(H B_m) for every m.
  RVector traces(const BlockMatrix& h) const {
    RVector t(size());
    traces_into(h.blocks(), t.data());
    return t;
  }
  void traces_into(const std::vector<CMatrix>& blocks, double* out) const {
    for (std::size_t m = 0; m < elements_.size(); ++m) {
      const Element& e = elements_[m];
      const CMatrix& h = blocks[e.sector];
      switch (e.kind) {
        case BasisKind::diagonal: out[m] = h(e.q1, e.q1).real(); break;
        case BasisKind::symmetric: out[m] = (h(e.q1, e.q2) + h(e.q2, e.q1)).real(); break;
        case BasisKind::antisymmetric: out[m] = (kI * (h(e.q2, e.q1) - h(e.q1, e.q2))).real(); break;
      }
    }
  }

  /// Expansion coefficients c_m = Tr(H B_m) / Tr(B_m B_m).
  RVector coefficients(const BlockMatrix& h) const {
    RVector t = traces(h);
    for (std::size_t m = 0; m < size(); ++m) t(m) /= elements_[m].norm;
    return t;
  }

  /// sum_m c_m B_m.
  BlockMatrix assemble(const RVector& c) const {
    if (static_cast<std::size_t>(c.size()) != size()) throw std::invalid_argument("OperatorBasis::assemble: size mismatch");
    BlockMatrix h = BlockMatrix::zero(structure_);
    std::vector<CMatrix> blocks = h.blocks();
    assemble_into(c.data(), blocks);
    return BlockMatrix(structure_, std::move(blocks), true);
  }
  void assemble_into(const double* c, std::vector<CMatrix>& blocks) const {
    for (std::size_t m = 0; m < elements_.size(); ++m) {
      const Element& e = elements_[m];
      CMatrix& h = blocks[e.sector];
      switch (e.kind) {
        case BasisKind::diagonal: h(e.q1, e.q1) += c[m]; break;
        case BasisKind::symmetric:
          h(e.q1, e.q2) += c[m];
          h(e.q2, e.q1) += c[m];
          break;
        case BasisKind::antisymmetric:
          h(e.q1, e.q2) += kI * c[m];
          h(e.q2, e.q1) -= kI * c[m];
          break;
      }
    }
  }

 private:
  BlockStructure structure_;
  std::vector<std::size_t> sectors_;
  std::vector<int> sector_offsets_;
  std::vector<Element> elements_;
};

inline OperatorBasis build_operator_basis(const BlockStructure& s) { return OperatorBasis(s); }
/// Basis of the Dicke sector only.
inline OperatorBasis build_dicke_basis(const BlockStructure& s) { return OperatorBasis(s, {0}); }

inline double expectation(const BlockState& state, const BlockMatrix& op) {
  state.matrix().check_same(op);
  Complex t = 0.0;
  for (std::size_t k = 0; k < op.size(); ++k) t += (state.block(k).cwiseProduct(op.block(k).transpose())).sum();
  if (std::abs(t.imag()) > 1e-10 * std::max(1.0, std::abs(t.real())))
    throw std::invalid_argument("expectation: operator is not Hermitian");
  return t.real();
}

/// Central-spin transverse signal <sigma_x> + i<sigma_y> under the coupling
/// Hamiltonian pi J (Jz (x) sigma_z) plus Larmor terms. Evolution is exact: the
/// Hamiltonian is diagonal in block space.
inline CVector simulate_fid(const BlockState& state, std::span<const double> t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("simulate_fid: empty time grid");
  const RegisterSpec& reg = state.structure().register_spec();
  CVector sig = CVector::Zero(static_cast<Eigen::Index>(t_grid.size()));
  for (std::size_t k = 0; k < state.matrix().size(); ++k) {
    const int j2 = state.structure().sector(k).j2;
    const CMatrix& rho = state.block(k);
    for (int a = 0; a <= j2; ++a) {
      const double m = 0.5 * j2 - a;
      // E(m, s) = pi wA s + 2 pi wM m + pi J m s, s = +1 for |0>; the <1|rho|0>
      // coherence rotates as exp(+i (E(m,+1) - E(m,-1)) t)
      const double freq = reg.larmor_central + reg.coupling * m;
      const Complex amp = 2.0 * rho(2 * a + 1, 2 * a);
      for (std::size_t t = 0; t < t_grid.size(); ++t)
        sig(static_cast<Eigen::Index>(t)) += amp * std::exp(kI * (2.0 * kPi * freq * t_grid[t]));
    }
  }
  return sig;
}

/// Nominal frequency (Hz) of central peak i = 1..N.
inline double central_peak_frequency(const RegisterSpec& reg, int i) {
  return reg.larmor_central + reg.coupling * (i - 1 - 0.5 * reg.n_peripheral());
}

/// Complex amplitude of each central peak recovered from a sampled FID: the
/// DFT (normalized by the sample count) summed over a rectangular window of
/// +-J/4 around each nominal peak. With the analysis convention s(t) ~
/// A e^{+2 pi i f t}, peak i returns <O_A^{i,x}> + i <O_A^{i,y}>.
inline std::vector<Complex> spectrum_peaks(const CVector& fid, std::span<const double> t_grid, const RegisterSpec& reg) {
  const std::size_t K = t_grid.size();
  if (K < 2 || static_cast<std::size_t>(fid.size()) != K) throw std::invalid_argument("spectrum_peaks: bad grid");
  const double dt = t_grid[1] - t_grid[0];
  const double span = dt * static_cast<double>(K);
  std::vector<Complex> out;
  for (int i = 1; i <= reg.n_total; ++i) {
    const double f0 = central_peak_frequency(reg, i);
    Complex acc = 0.0;
    const long lo = static_cast<long>(std::ceil((f0 - reg.coupling / 4) * span - 1e-9));
    const long hi = static_cast<long>(std::floor((f0 + reg.coupling / 4) * span + 1e-9));
    for (long bin = lo; bin <= hi; ++bin) {
      const double f = static_cast<double>(bin) / span;
      Complex c = 0.0;
      for (std::size_t t = 0; t < K; ++t) c += fid(static_cast<Eigen::Index>(t)) * std::exp(-kI * (2.0 * kPi * f * t_grid[t]));
      acc += c / static_cast<double>(K);
    }
    out.push_back(acc);
  }
  return out;
}

struct NoiseModel {
  double sd = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sd >= 0.0)) throw std::invalid_argument("NoiseModel: sd must be >= 0");
  }
};

inline RVector apply_noise(const RVector& o, const NoiseModel& model) {
  model.validate();
  if (model.sd == 0.0) return o;
  std::mt19937_64 rng(model.seed);
  std::normal_distribution<double> normal(0.0, model.sd);
  RVector r = o;
  for (Eigen::Index k = 0; k < r.size(); ++k) r(k) += normal(rng);
  return r;
}

}  // namespace startomo

#endif  // STARTOMO_MEASUREMENT_HPP
