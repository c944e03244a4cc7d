#ifndef STARTOMO_FULL_SPACE_HPP
#define STARTOMO_FULL_SPACE_HPP

// Brute-force 2^N constructions used to cross-check the block machinery.
// Nothing here goes through the block representation except the Schur basis.

#include "startomo/block_hilbert.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

namespace startomo::full {

inline CMatrix pauli(char axis) {
  CMatrix p = CMatrix::Zero(2, 2);
  switch (axis) {
    case 'x': p << 0, 1, 1, 0; break;
    case 'y': p << 0, -kI, kI, 0; break;
    case 'z': p << 1, 0, 0, -1; break;
    default: p.setIdentity();
  }
  return p;
}

/// Single-qubit operator on qubit q of n (qubit 0 most significant; the central
/// spin is qubit n-1).
inline CMatrix on_qubit(const CMatrix& op, int q, int n) {
  CMatrix r = CMatrix::Identity(1, 1);
  for (int k = 0; k < n; ++k) r = kron(r, k == q ? op : CMatrix::Identity(2, 2));
  return r;
}

inline CMatrix tensor_all(const std::vector<CMatrix>& ops) {
  CMatrix r = CMatrix::Identity(1, 1);
  for (const auto& o : ops) r = kron(r, o);
  return r;
}

/// Collective sigma^M_axis = sum over peripheral qubits.
inline CMatrix collective(char axis, int n_total) {
  const Eigen::Index dim = Eigen::Index{1} << n_total;
  CMatrix r = CMatrix::Zero(dim, dim);
  for (int q = 0; q + 1 < n_total; ++q) r += on_qubit(pauli(axis), q, n_total);
  return r;
}

inline CMatrix central(char axis, int n_total) { return on_qubit(pauli(axis), n_total - 1, n_total); }

inline CMatrix single_rotation(double a, double b, double c) {
  auto r = [](char ax, double t) { return expi_hermitian(0.5 * pauli(ax), t); };
  return r('x', a) * r('y', b) * r('x', c);
}

/// Central rotation R(p0,p1,p2) and the same R(p3,p4,p5) on every peripheral qubit.
inline CMatrix rotation_layer(std::span<const double> p, int n_total) {
  std::vector<CMatrix> ops(static_cast<std::size_t>(n_total - 1), single_rotation(p[3], p[4], p[5]));
  ops.push_back(single_rotation(p[0], p[1], p[2]));
  return tensor_all(ops);
}

/// Rotating-frame coupling Hamiltonian (pi/2) J sigma_z^M sigma_z^A.
inline CMatrix coupling_hamiltonian(int n_total, double coupling) {
  return (kPi / 2) * coupling * collective('z', n_total) * central('z', n_total);
}

/// exp(-i H0 tau) with tau = 1 / (2 J).
inline CMatrix entangler(int n_total, double coupling = 1.0) {
  return expi_hermitian(coupling_hamiltonian(n_total, coupling), 1.0 / (2.0 * coupling));
}

inline CMatrix circuit(std::span<const double> row, int layers, int n_total) {
  CMatrix u = rotation_layer(row.subspan(0, 6), n_total);
  const CMatrix e = entangler(n_total);
  for (int l = 1; l < layers; ++l) u = rotation_layer(row.subspan(static_cast<std::size_t>(6 * l), 6), n_total) * e * u;
  return u;
}

/// The 2N+4 spectral observables in full space, ordered central peaks
/// (ascending Jz) then peripheral peaks, x before y.
inline std::vector<CMatrix> observables(int n_total) {
  const int n = n_total - 1;
  const Eigen::Index pdim = Eigen::Index{1} << n;
  std::vector<CMatrix> out;
  for (int i = 1; i <= n_total; ++i) {
    const int up = i - 1;
    CMatrix proj = CMatrix::Zero(pdim, pdim);
    for (Eigen::Index b = 0; b < pdim; ++b)
      if (n - std::popcount(static_cast<unsigned long>(b)) == up) proj(b, b) = 1.0;
    out.push_back(kron(proj, pauli('x')));
    out.push_back(kron(proj, pauli('y')));
  }
  for (int peak = 0; peak < 2; ++peak) {
    CMatrix proj = CMatrix::Zero(2, 2);
    proj(peak, peak) = 1.0;
    for (char ax : {'x', 'y'}) {
      const CMatrix coll = collective(ax, n_total);
      out.push_back(coll * on_qubit(proj, n_total - 1, n_total));
    }
  }
  return out;
}

/// Permute the peripheral qubits of a full-space operator: qubit q -> perm[q].
inline CMatrix permute_peripheral(const CMatrix& m, std::span<const int> perm, int n_total) {
  const Eigen::Index dim = Eigen::Index{1} << n_total;
  std::vector<Eigen::Index> map(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    Eigen::Index j = i & 1;
    for (int q = 0; q + 1 < n_total; ++q) {
      const Eigen::Index bit = (i >> (n_total - 1 - q)) & 1;
      j |= bit << (n_total - 1 - perm[static_cast<std::size_t>(q)]);
    }
    map[static_cast<std::size_t>(i)] = j;
  }
  CMatrix r(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index a = 0; a < dim; ++a) r(map[a], map[c]) = m(a, c);
  return r;
}

/// Average of X over all peripheral permutations.
inline CMatrix symmetrize(const CMatrix& x, int n_total) {
  std::vector<int> perm(static_cast<std::size_t>(n_total - 1));
  std::iota(perm.begin(), perm.end(), 0);
  CMatrix acc = CMatrix::Zero(x.rows(), x.cols());
  int count = 0;
  do {
    acc += permute_peripheral(x, perm, n_total);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc / static_cast<double>(count);
}

/// Random unit-trace star-symmetric density matrix (symmetrized Wishart).
inline CMatrix random_symmetric_state(int n_total, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index dim = Eigen::Index{1} << n_total;
  CMatrix g(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) g(r, c) = Complex(normal(rng), normal(rng));
  CMatrix rho = symmetrize(g * g.adjoint(), n_total);
  rho = hermitian_part(rho);
  return rho / rho.trace().real();
}

inline double expectation(const CMatrix& rho, const CMatrix& op) { return (rho * op).trace().real(); }

}  // namespace startomo::full

#endif  // STARTOMO_FULL_SPACE_HPP
