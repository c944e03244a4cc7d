#ifndef STARTOMO_BLOCK_HILBERT_HPP
#define STARTOMO_BLOCK_HILBERT_HPP

// Symmetry-reduced representation of a star-topology register.
//
// The N-1 peripheral spins decompose into total-spin sectors j with
// multiplicities; tensoring each sector with the central qubit gives blocks
// of dimension 2(2j+1). Operators invariant under peripheral permutations are
// block diagonal in this basis, and isomorphic copies of a sector carry the
// same information, so states are stored "briefly": one block per sector,
// summed over copies.
//
// Block index convention: row = 2 * (j - m) + s, with m = j..-j the peripheral
// Jz eigenvalue and s = 0 (central |0>, sigma_z = +1) or 1. Full-space index
// convention: peripheral qubits are the high bits (qubit 0 most significant),
// the central spin is bit 0. |0> is spin up.

#include "startomo/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace startomo {

struct RegisterSpec {
  int n_total = 2;        ///< central spin plus N-1 peripheral spins
  double coupling = 1.0;  ///< J_AM in Hz
  double larmor_central = 0.0;
  double larmor_peripheral = 0.0;

  void validate() const {
    if (n_total < 2) throw std::invalid_argument("RegisterSpec: n_total must be >= 2");
    if (!(coupling > 0.0)) throw std::invalid_argument("RegisterSpec: coupling must be > 0");
  }
  int n_peripheral() const { return n_total - 1; }

  friend bool operator==(const RegisterSpec&, const RegisterSpec&) = default;
};

struct SectorSpec {
  int j2 = 0;  ///< twice the total spin
  int peripheral_dim = 1;
  std::int64_t multiplicity = 1;
  int block_dim = 2;

  double j() const { return 0.5 * j2; }
  friend bool operator==(const SectorSpec&, const SectorSpec&) = default;
};

/// Multiplicity of the i-th sector (i = 1 is the Dicke sector) of an N-spin
/// register: (N+2-2i)/(N+1-i) * C(N-1, i-1).
inline std::int64_t sector_multiplicity(int n_total, int i) {
  const std::int64_t num = static_cast<std::int64_t>(n_total + 2 - 2 * i) * binomial(n_total - 1, i - 1);
  return num / (n_total + 1 - i);
}

/// Sector list of a register. Cheap to copy; the sector table is shared.
class BlockStructure {
 public:
  BlockStructure() = default;

  explicit BlockStructure(const RegisterSpec& spec) {
    spec.validate();
    auto data = std::make_shared<Data>();
    data->reg = spec;
    const int n_sectors = (spec.n_total + 1) / 2;
    int offset = 0;
    for (int i = 1; i <= n_sectors; ++i) {
      SectorSpec s;
      s.j2 = spec.n_total - 1 - 2 * (i - 1);
      s.peripheral_dim = s.j2 + 1;
      s.multiplicity = sector_multiplicity(spec.n_total, i);
      s.block_dim = 2 * s.peripheral_dim;
      data->sectors.push_back(s);
      data->basis_offsets.push_back(offset);
      offset += s.block_dim * s.block_dim;
    }
    data->basis_size = offset;
    data_ = std::move(data);
  }

  const RegisterSpec& register_spec() const { return data().reg; }
  int n_total() const { return data().reg.n_total; }
  int n_peripheral() const { return data().reg.n_total - 1; }
  std::span<const SectorSpec> sectors() const { return data().sectors; }
  const SectorSpec& sector(std::size_t i) const { return data().sectors.at(i); }
  std::size_t sector_count() const { return data().sectors.size(); }
  /// Sum of block_dim^2: number of real parameters of a block Hermitian matrix.
  int basis_size() const { return data().basis_size; }
  int basis_offset(std::size_t sector) const { return data().basis_offsets.at(sector); }
  int dicke_index() const { return 0; }

  bool valid() const { return static_cast<bool>(data_); }

  friend bool operator==(const BlockStructure& a, const BlockStructure& b) {
    if (a.data_ == b.data_) return true;
    if (!a.data_ || !b.data_) return false;
    return a.data_->reg == b.data_->reg;
  }

 private:
  struct Data {
    RegisterSpec reg;
    std::vector<SectorSpec> sectors;
    std::vector<int> basis_offsets;
    int basis_size = 0;
  };
  const Data& data() const {
    if (!data_) throw std::logic_error("BlockStructure: uninitialized");
    return *data_;
  }
  std::shared_ptr<const Data> data_;
};

inline BlockStructure build_block_structure(const RegisterSpec& spec) { return BlockStructure(spec); }

/// One complex matrix per sector.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(BlockStructure structure, std::vector<CMatrix> blocks, bool hermitian)
      : structure_(std::move(structure)), blocks_(std::move(blocks)), hermitian_(hermitian) {
    if (blocks_.size() != structure_.sector_count())
      throw std::invalid_argument("BlockMatrix: block count does not match structure");
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const int d = structure_.sector(i).block_dim;
      if (blocks_[i].rows() != d || blocks_[i].cols() != d)
        throw std::invalid_argument("BlockMatrix: block " + std::to_string(i) + " has wrong dimension");
    }
    if (hermitian_) {
      for (const auto& b : blocks_)
        if (!is_hermitian(b, 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff())))
          throw std::invalid_argument("BlockMatrix: block flagged Hermitian is not Hermitian");
    }
  }

  static BlockMatrix zero(const BlockStructure& s) {
    std::vector<CMatrix> b;
    for (const auto& sec : s.sectors()) b.push_back(CMatrix::Zero(sec.block_dim, sec.block_dim));
    return BlockMatrix(s, std::move(b), true);
  }
  static BlockMatrix identity(const BlockStructure& s) {
    std::vector<CMatrix> b;
    for (const auto& sec : s.sectors()) b.push_back(CMatrix::Identity(sec.block_dim, sec.block_dim));
    return BlockMatrix(s, std::move(b), true);
  }

  const BlockStructure& structure() const { return structure_; }
  std::size_t size() const { return blocks_.size(); }
  const CMatrix& block(std::size_t i) const { return blocks_.at(i); }
  CMatrix& block(std::size_t i) { return blocks_.at(i); }
  const std::vector<CMatrix>& blocks() const { return blocks_; }
  bool hermitian() const { return hermitian_; }
  void set_hermitian(bool h) { hermitian_ = h; }

  Complex trace() const {
    Complex t = 0.0;
    for (const auto& b : blocks_) t += b.trace();
    return t;
  }
  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& b : blocks_) s += b.squaredNorm();
    return std::sqrt(s);
  }
  double max_hermitian_deviation() const {
    double d = 0.0;
    for (const auto& b : blocks_) d = std::max(d, (b - b.adjoint()).cwiseAbs().maxCoeff());
    return d;
  }
  BlockMatrix adjoint() const {
    std::vector<CMatrix> b;
    for (const auto& x : blocks_) b.push_back(x.adjoint());
    return BlockMatrix(structure_, std::move(b), hermitian_);
  }

  BlockMatrix& operator+=(const BlockMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += o.blocks_[i];
    hermitian_ = hermitian_ && o.hermitian_;
    return *this;
  }
  BlockMatrix& operator-=(const BlockMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= o.blocks_[i];
    hermitian_ = hermitian_ && o.hermitian_;
    return *this;
  }
  BlockMatrix& operator*=(double s) {
    for (auto& b : blocks_) b *= s;
    return *this;
  }
  friend BlockMatrix operator+(BlockMatrix a, const BlockMatrix& b) { return a += b; }
  friend BlockMatrix operator-(BlockMatrix a, const BlockMatrix& b) { return a -= b; }
  friend BlockMatrix operator*(BlockMatrix a, double s) { return a *= s; }
  friend BlockMatrix operator*(double s, BlockMatrix a) { return a *= s; }
  /// Blockwise matrix product; the result is not flagged Hermitian.
  friend BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b) {
    a.check_same(b);
    std::vector<CMatrix> r;
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) r.push_back(a.blocks_[i] * b.blocks_[i]);
    return BlockMatrix(a.structure_, std::move(r), false);
  }

  void check_same(const BlockMatrix& o) const {
    if (!(structure_ == o.structure_)) throw std::invalid_argument("BlockMatrix: structure mismatch");
  }

 private:
  BlockStructure structure_;
  std::vector<CMatrix> blocks_;
  bool hermitian_ = false;
};

struct SpinMatrices {
  CMatrix x, y, z;
};

/// Spin-j angular momentum matrices in the |j,m> basis ordered m = j..-j.
inline SpinMatrices angular_momentum_ops_2j(int j2) {
  if (j2 < 0) throw std::invalid_argument("angular_momentum_ops: 2j must be nonnegative");
  const int d = j2 + 1;
  const double j = 0.5 * j2;
  CMatrix jp = CMatrix::Zero(d, d);  // J+
  SpinMatrices s;
  s.z = CMatrix::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    const double m = j - a;
    s.z(a, a) = m;
    if (a > 0) jp(a - 1, a) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  s.x = 0.5 * (jp + jp.adjoint());
  s.y = (-0.5 * kI) * (jp - jp.adjoint());
  return s;
}

inline SpinMatrices angular_momentum_ops(double j) {
  const double twice = 2.0 * j;
  const double r = std::round(twice);
  if (j < 0.0 || std::abs(twice - r) > 1e-12) throw std::invalid_argument("angular_momentum_ops: j must be a nonnegative half-integer");
  return angular_momentum_ops_2j(static_cast<int>(r));
}

/// Block-space operator A (x) I_2 for a peripheral-factor A.
inline CMatrix kron_peripheral(const CMatrix& a) {
  CMatrix r = CMatrix::Zero(2 * a.rows(), 2 * a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      r(2 * i, 2 * k) = a(i, k);
      r(2 * i + 1, 2 * k + 1) = a(i, k);
    }
  return r;
}

/// Block-space operator I_d (x) C for a central 2x2 factor C.
inline CMatrix kron_central(int peripheral_dim, const CMatrix& c) {
  CMatrix r = CMatrix::Zero(2 * peripheral_dim, 2 * peripheral_dim);
  for (int i = 0; i < peripheral_dim; ++i) r.block(2 * i, 2 * i, 2, 2) = c;
  return r;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) r.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
  return r;
}

inline constexpr int kDefaultFullSpaceCap = 12;

/// Orthonormal embedding of every (sector, copy) pair into the 2^n peripheral
/// space, built by coupling spin-1/2 particles one at a time with
/// Clebsch-Gordan coefficients (Condon-Shortley phases).
class SchurBasis {
 public:
  struct Copy {
    int j2 = 0;
    int copy_index = 0;
    RMatrix isometry;  ///< 2^n x (j2 + 1), columns ordered m = j..-j
  };

  static SchurBasis build(int n_peripheral, int cap = kDefaultFullSpaceCap) {
    if (n_peripheral < 1) throw std::invalid_argument("build_schur_basis: need at least one peripheral spin");
    if (n_peripheral > cap)
      throw std::invalid_argument("build_schur_basis: " + std::to_string(n_peripheral) +
                                  " peripheral spins exceed the full-space cap of " + std::to_string(cap));
    std::vector<Copy> copies;
    copies.push_back(Copy{1, 0, RMatrix::Identity(2, 2)});
    for (int k = 2; k <= n_peripheral; ++k) {
      std::vector<Copy> next;
      for (const auto& c : copies) {
        next.push_back(couple(c, +1));
        if (c.j2 > 0) next.push_back(couple(c, -1));
      }
      std::stable_sort(next.begin(), next.end(), [](const Copy& a, const Copy& b) { return a.j2 > b.j2; });
      copies = std::move(next);
    }
    int prev = -1, idx = 0;
    for (auto& c : copies) {
      idx = (c.j2 == prev) ? idx + 1 : 0;
      prev = c.j2;
      c.copy_index = idx;
    }
    SchurBasis b;
    b.n_ = n_peripheral;
    b.copies_ = std::move(copies);
    return b;
  }

  int n_peripheral() const { return n_; }
  std::size_t full_dim() const { return std::size_t{1} << n_; }
  std::span<const Copy> copies() const { return copies_; }

  /// Stacked isometry columns, copies in order; unitary on the peripheral space.
  RMatrix unitary() const {
    RMatrix u(full_dim(), full_dim());
    Eigen::Index col = 0;
    for (const auto& c : copies_) {
      u.middleCols(col, c.isometry.cols()) = c.isometry;
      col += c.isometry.cols();
    }
    return u;
  }

  /// Number of copies of each sector, ordered as in build_block_structure.
  std::vector<std::int64_t> copy_counts() const {
    std::vector<std::int64_t> counts;
    int prev = -1;
    for (const auto& c : copies_) {
      if (c.j2 != prev) counts.push_back(0);
      ++counts.back();
      prev = c.j2;
    }
    return counts;
  }

 private:
  // Couple one more spin-1/2 onto copy c, producing total spin j1 + dir/2.
  static Copy couple(const Copy& c, int dir) {
    const int j1_2 = c.j2;
    const double j1 = 0.5 * j1_2;
    const int J2 = j1_2 + dir;
    const double J = 0.5 * J2;
    const Eigen::Index half = c.isometry.rows();
    RMatrix out = RMatrix::Zero(2 * half, J2 + 1);
    auto col_of = [&](double m1) { return static_cast<Eigen::Index>(std::lround(j1 - m1)); };
    for (int a = 0; a <= J2; ++a) {
      const double M = J - a;
      const double norm = 2.0 * j1 + 1.0;
      double c_up, c_down;  // new spin up (m1 = M - 1/2) / down (m1 = M + 1/2)
      if (dir > 0) {
        c_up = std::sqrt(std::max(0.0, (j1 + M + 0.5) / norm));
        c_down = std::sqrt(std::max(0.0, (j1 - M + 0.5) / norm));
      } else {
        c_up = -std::sqrt(std::max(0.0, (j1 - M + 0.5) / norm));
        c_down = std::sqrt(std::max(0.0, (j1 + M + 0.5) / norm));
      }
      const double m_up = M - 0.5, m_down = M + 0.5;
      if (std::abs(m_up) <= j1 + 1e-9) {
        const auto src = c.isometry.col(col_of(m_up));
        for (Eigen::Index r = 0; r < half; ++r) out(2 * r, a) += c_up * src(r);
      }
      if (std::abs(m_down) <= j1 + 1e-9) {
        const auto src = c.isometry.col(col_of(m_down));
        for (Eigen::Index r = 0; r < half; ++r) out(2 * r + 1, a) += c_down * src(r);
      }
    }
    return Copy{J2, 0, std::move(out)};
  }

  int n_ = 0;
  std::vector<Copy> copies_;
};

inline SchurBasis build_schur_basis(int n_peripheral, int cap = kDefaultFullSpaceCap) {
  return SchurBasis::build(n_peripheral, cap);
}

namespace detail {

inline void check_basis_matches(const BlockStructure& s, const SchurBasis& basis) {
  if (s.n_peripheral() != basis.n_peripheral())
    throw std::invalid_argument("Schur basis and block structure disagree on the number of peripheral spins");
}

// Sector index of each copy.
inline std::vector<std::size_t> copy_sectors(const BlockStructure& s, const SchurBasis& basis) {
  std::vector<std::size_t> out;
  for (const auto& c : basis.copies()) {
    std::size_t k = 0;
    while (k < s.sector_count() && s.sector(k).j2 != c.j2) ++k;
    if (k == s.sector_count()) throw std::logic_error("Schur basis copy with unknown sector");
    out.push_back(k);
  }
  return out;
}

// Full-space column embedding V (x) I_2 of one copy.
inline CMatrix embed_with_central(const RMatrix& v) {
  CMatrix w = CMatrix::Zero(2 * v.rows(), 2 * v.cols());
  for (Eigen::Index r = 0; r < v.rows(); ++r)
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      w(2 * r, 2 * c) = v(r, c);
      w(2 * r + 1, 2 * c + 1) = v(r, c);
    }
  return w;
}

/// Full-space index permutation exchanging peripheral qubits q and q+1.
inline std::vector<std::size_t> adjacent_transposition(int n_total, int q) {
  const std::size_t dim = std::size_t{1} << n_total;
  const int bit_a = n_total - 1 - q;  // qubit q
  const int bit_b = bit_a - 1;        // qubit q+1
  std::vector<std::size_t> p(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t a = (i >> bit_a) & 1u, b = (i >> bit_b) & 1u;
    std::size_t j = i & ~((std::size_t{1} << bit_a) | (std::size_t{1} << bit_b));
    j |= (b << bit_a) | (a << bit_b);
    p[i] = j;
  }
  return p;
}

}  // namespace detail

/// Max deviation of rho from commuting with the adjacent peripheral transpositions.
inline double star_symmetry_defect(const CMatrix& rho_full, int n_total) {
  double worst = 0.0;
  for (int q = 0; q + 1 < n_total - 1; ++q) {
    const auto p = detail::adjacent_transposition(n_total, q);
    for (Eigen::Index c = 0; c < rho_full.cols(); ++c)
      for (Eigen::Index r = 0; r < rho_full.rows(); ++r)
        worst = std::max(worst, std::abs(rho_full(p[r], p[c]) - rho_full(r, c)));
  }
  return worst;
}

inline void check_full_operator(const CMatrix& m, const BlockStructure& s, bool require_hermitian) {
  const Eigen::Index dim = Eigen::Index{1} << s.n_total();
  if (m.rows() != dim || m.cols() != dim) throw std::invalid_argument("full-space matrix has wrong dimension");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (require_hermitian && !is_hermitian(m, 1e-12 * scale)) throw std::invalid_argument("full-space matrix is not Hermitian");
  if (star_symmetry_defect(m, s.n_total()) > 1e-10 * scale)
    throw std::invalid_argument("full-space matrix is not star-symmetric");
}

/// Brief representation of a star-symmetric full-space state: each sector block
/// is the sum over its isomorphic copies.
inline BlockMatrix compress(const CMatrix& rho_full, const SchurBasis& basis, const BlockStructure& s) {
  detail::check_basis_matches(s, basis);
  check_full_operator(rho_full, s, true);
  const auto sec = detail::copy_sectors(s, basis);
  BlockMatrix out = BlockMatrix::zero(s);
  const auto& copies = basis.copies();
  for (std::size_t c = 0; c < copies.size(); ++c) {
    const CMatrix w = detail::embed_with_central(copies[c].isometry);
    out.block(sec[c]) += w.adjoint() * rho_full * w;
  }
  for (std::size_t k = 0; k < out.size(); ++k) out.block(k) = hermitian_part(out.block(k));
  return out;
}

/// Brief representation of sum_l weight_l |psi_l><psi_l| without forming the
/// full density matrix. The caller is responsible for star symmetry of the sum.
inline BlockMatrix compress_pure_sum(std::span<const CVector> vectors, std::span<const double> weights,
                                     const SchurBasis& basis, const BlockStructure& s) {
  detail::check_basis_matches(s, basis);
  if (vectors.size() != weights.size()) throw std::invalid_argument("compress_pure_sum: size mismatch");
  const auto sec = detail::copy_sectors(s, basis);
  BlockMatrix out = BlockMatrix::zero(s);
  const auto& copies = basis.copies();
  for (std::size_t c = 0; c < copies.size(); ++c) {
    const CMatrix w = detail::embed_with_central(copies[c].isometry);
    for (std::size_t l = 0; l < vectors.size(); ++l) {
      const CVector p = w.adjoint() * vectors[l];
      out.block(sec[c]) += weights[l] * (p * p.adjoint());
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) out.block(k) = hermitian_part(out.block(k));
  return out;
}

/// Block form of a permutation-invariant full-space operator: its action on a
/// single copy (averaged over copies, which agree for invariant operators).
inline BlockMatrix compress_operator(const CMatrix& op_full, const SchurBasis& basis, const BlockStructure& s) {
  detail::check_basis_matches(s, basis);
  check_full_operator(op_full, s, false);
  const auto sec = detail::copy_sectors(s, basis);
  std::vector<CMatrix> blocks;
  for (const auto& sc : s.sectors()) blocks.push_back(CMatrix::Zero(sc.block_dim, sc.block_dim));
  const auto& copies = basis.copies();
  for (std::size_t c = 0; c < copies.size(); ++c) {
    const CMatrix w = detail::embed_with_central(copies[c].isometry);
    blocks[sec[c]] += (w.adjoint() * op_full * w) / static_cast<double>(s.sector(sec[c]).multiplicity);
  }
  const bool herm = is_hermitian(op_full, 1e-12 * std::max(1.0, op_full.cwiseAbs().maxCoeff()));
  if (herm)
    for (auto& b : blocks) b = hermitian_part(b);
  return BlockMatrix(s, std::move(blocks), herm);
}

/// Inverse of compress: each brief block is distributed uniformly over its copies.
inline CMatrix expand(const BlockMatrix& state, const SchurBasis& basis) {
  const BlockStructure& s = state.structure();
  detail::check_basis_matches(s, basis);
  const auto sec = detail::copy_sectors(s, basis);
  const Eigen::Index dim = Eigen::Index{1} << s.n_total();
  CMatrix full = CMatrix::Zero(dim, dim);
  const auto& copies = basis.copies();
  for (std::size_t c = 0; c < copies.size(); ++c) {
    const CMatrix w = detail::embed_with_central(copies[c].isometry);
    const double mult = static_cast<double>(s.sector(sec[c]).multiplicity);
    full += w * (state.block(sec[c]) / mult) * w.adjoint();
  }
  return state.hermitian() ? hermitian_part(full) : full;
}

}  // namespace startomo

#endif  // STARTOMO_BLOCK_HILBERT_HPP
