#include "startomo/circuits.hpp"
#include "startomo/full_space.hpp"

#include <gtest/gtest.h>

using namespace startomo;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

double max_block_diff(const BlockMatrix& a, const BlockMatrix& b) {
  double e = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, max_abs(a.block(k) - b.block(k)));
  return e;
}

std::vector<double> row_of(const ParamMatrix& p, int r) {
  std::vector<double> v(static_cast<std::size_t>(p.theta.cols()));
  for (Eigen::Index c = 0; c < p.theta.cols(); ++c) v[static_cast<std::size_t>(c)] = p.theta(r, c);
  return v;
}

}  // namespace

TEST(RotationLayer, ZeroIsIdentity) {
  const BlockStructure s{RegisterSpec{5}};
  const std::vector<double> p(6, 0.0);
  EXPECT_LT(max_block_diff(rotation_layer(p, s).matrix(), BlockMatrix::identity(s)), 1e-15);
}

TEST(RotationLayer, CentralPiIsSigmaX) {
  const BlockStructure s{RegisterSpec{4}};
  const std::vector<double> p{kPi, 0, 0, 0, 0, 0};
  const BlockUnitary u = rotation_layer(p, s);
  for (std::size_t k = 0; k < s.sector_count(); ++k)
    EXPECT_LT(max_abs(u.block(k) - (-kI) * kron_central(s.sector(k).peripheral_dim, full::pauli('x'))), 1e-14);
}

TEST(RotationLayer, MatchesFullSpace) {
  const int n_total = 4;
  const BlockStructure s{RegisterSpec{n_total}};
  const SchurBasis b = build_schur_basis(n_total - 1);
  const ParamMatrix p = random_params(n_total, CircuitLayout{1}, 5, 17);
  for (int r = 0; r < p.readouts(); ++r) {
    const auto row = row_of(p, r);
    const CMatrix full_u = full::rotation_layer(row, n_total);
    EXPECT_LT(max_block_diff(compress_operator(full_u, b, s), rotation_layer(row, s).matrix()), 1e-10);
  }
}

TEST(Entangler, SpinHalfPhases) {
  const BlockStructure s{RegisterSpec{2}};
  const BlockUnitary e = entangling_layer(s);
  const Complex minus = std::exp(Complex(0, -kPi / 4)), plus = std::exp(Complex(0, kPi / 4));
  // order (m, s): (+1/2, 0), (+1/2, 1), (-1/2, 0), (-1/2, 1)
  EXPECT_LT(std::abs(e.block(0)(0, 0) - minus), 1e-15);
  EXPECT_LT(std::abs(e.block(0)(1, 1) - plus), 1e-15);
  EXPECT_LT(std::abs(e.block(0)(2, 2) - plus), 1e-15);
  EXPECT_LT(std::abs(e.block(0)(3, 3) - minus), 1e-15);
}

TEST(Entangler, EightfoldPeriodic) {
  const BlockStructure s{RegisterSpec{6}};
  const BlockUnitary e = entangling_layer(s);
  BlockUnitary acc = BlockUnitary::identity(s);
  for (int k = 0; k < 8; ++k) acc = e * acc;
  EXPECT_LT(max_block_diff(acc.matrix(), BlockMatrix::identity(s)), 1e-13);
}

TEST(Entangler, MatchesFullSpace) {
  for (int n_total : {3, 4, 5}) {
    const BlockStructure s{RegisterSpec{n_total}};
    const SchurBasis b = build_schur_basis(n_total - 1);
    EXPECT_LT(max_block_diff(compress_operator(full::entangler(n_total), b, s), entangling_layer(s).matrix()), 1e-10);
  }
}

TEST(Entangler, CommutesWithZButNotX) {
  const BlockStructure s{RegisterSpec{4}};
  const BlockUnitary e = entangling_layer(s);
  for (std::size_t k = 0; k < s.sector_count(); ++k) {
    const SpinMatrices m = angular_momentum_ops_2j(s.sector(k).j2);
    const CMatrix zz = kron(m.z, full::pauli('z'));
    EXPECT_LT(max_abs(e.block(k) * zz - zz * e.block(k)), 1e-14);
  }
  const std::vector<double> x{0.7, 0, 0, 0, 0, 0.4};
  const BlockUnitary r = rotation_layer(x, s);
  EXPECT_GT(max_block_diff((e * r).matrix(), (r * e).matrix()), 1e-3);
}

TEST(Synthesize, SingleLayerIsRotation) {
  const BlockStructure s{RegisterSpec{4}};
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  EXPECT_LT(max_block_diff(synthesize(p, CircuitLayout{1}, s).matrix(), rotation_layer(p, s).matrix()), 1e-15);
}

TEST(Synthesize, ZeroAnglesGiveTwoEntanglers) {
  const BlockStructure s{RegisterSpec{5}};
  const std::vector<double> p(18, 0.0);
  const BlockUnitary e = entangling_layer(s);
  EXPECT_LT(max_block_diff(synthesize(p, CircuitLayout{3}, s).matrix(), (e * e).matrix()), 1e-14);
}

TEST(Synthesize, LayerOrder) {
  // U = R(p2) E R(p1)
  const BlockStructure s{RegisterSpec{3}};
  std::vector<double> p{0.3, 1.1, -0.4, 0.9, 0.2, 1.7, -0.8, 0.5, 2.1, 0.6, -1.2, 0.35};
  const BlockUnitary r1 = rotation_layer(std::span<const double>(p).subspan(0, 6), s);
  const BlockUnitary r2 = rotation_layer(std::span<const double>(p).subspan(6, 6), s);
  const BlockUnitary ref = r2 * entangling_layer(s) * r1;
  EXPECT_LT(max_block_diff(synthesize(p, CircuitLayout{2}, s).matrix(), ref.matrix()), 1e-14);
}

TEST(Synthesize, MatchesFullSpaceCircuits) {
  for (int n_total : {3, 4, 5}) {
    const BlockStructure s{RegisterSpec{n_total}};
    const SchurBasis b = build_schur_basis(n_total - 1);
    const ParamMatrix p = random_params(n_total, CircuitLayout{3}, 4, 100 + static_cast<std::uint64_t>(n_total));
    const auto us = synthesize_all(p, s);
    for (int r = 0; r < p.readouts(); ++r) {
      const CMatrix full_u = full::circuit(row_of(p, r), 3, n_total);
      EXPECT_LT(max_block_diff(compress_operator(full_u, b, s), us[static_cast<std::size_t>(r)].matrix()), 1e-10);
    }
  }
}

TEST(Synthesize, UnitaryAtTenSpins) {
  const BlockStructure s{RegisterSpec{10}};
  const ParamMatrix p = random_params(10, CircuitLayout{3}, 100, 1);
  for (const auto& u : synthesize_all(p, s)) EXPECT_LT(u.unitarity_defect(), 1e-12);
}

TEST(Synthesize, LengthMismatch) {
  const BlockStructure s{RegisterSpec{3}};
  const std::vector<double> p(12, 0.0);
  EXPECT_THROW(synthesize(p, CircuitLayout{3}, s), std::invalid_argument);
  EXPECT_THROW(synthesize(p, CircuitLayout{0}, s), std::invalid_argument);
}

TEST(Synthesize, MixedDepthRowsUseLeadingAngles) {
  const BlockStructure s{RegisterSpec{4}};
  ParamMatrix p = random_params(4, CircuitLayout{3}, 3, 8);
  p.row_layers = {2, 3, 1};
  const auto us = synthesize_all(p, s);
  const auto row0 = row_of(p, 0);
  const BlockUnitary two = synthesize(std::span<const double>(row0).subspan(0, 12), CircuitLayout{2}, s);
  EXPECT_LT(max_block_diff(us[0].matrix(), two.matrix()), 1e-15);
  const auto row2 = row_of(p, 2);
  EXPECT_LT(max_block_diff(us[2].matrix(), rotation_layer(std::span<const double>(row2).subspan(0, 6), s).matrix()), 1e-15);
  p.row_layers = {2, 4, 1};
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(RandomParams, ShapeRangeDeterminism) {
  const ParamMatrix a = random_params(10, CircuitLayout{3}, 37, 5);
  EXPECT_EQ(a.theta.rows(), 37);
  EXPECT_EQ(a.theta.cols(), 18);
  EXPECT_GE(a.theta.minCoeff(), 0.0);
  EXPECT_LT(a.theta.maxCoeff(), 2.0 * kPi);
  EXPECT_EQ(a.theta, random_params(10, CircuitLayout{3}, 37, 5).theta);
  EXPECT_NE(a.theta, random_params(10, CircuitLayout{3}, 37, 6).theta);
  EXPECT_THROW(random_params(10, CircuitLayout{3}, 0, 5), std::invalid_argument);
}

TEST(Heisenberg, ConjugationConsistentWithApply) {
  const BlockStructure s{RegisterSpec{5}};
  const ParamMatrix p = random_params(5, CircuitLayout{3}, 1, 3);
  const BlockUnitary u = synthesize_all(p, s).front();
  const BlockMatrix rho = [&] {
    std::vector<CMatrix> blocks;
    for (const auto& sec : s.sectors()) blocks.push_back(CMatrix::Identity(sec.block_dim, sec.block_dim) * 0.01);
    blocks[0](0, 1) = blocks[0](1, 0) = 0.003;
    return BlockMatrix(s, blocks, true);
  }();
  const SpinMatrices m0 = angular_momentum_ops_2j(s.sector(0).j2);
  std::vector<CMatrix> ob;
  for (const auto& sec : s.sectors()) ob.push_back(kron_central(sec.peripheral_dim, full::pauli('x')));
  ob[0] += kron_peripheral(m0.y);
  const BlockMatrix op(s, ob, true);
  EXPECT_NEAR((u.apply(rho) * op).trace().real(), (rho * u.heisenberg(op)).trace().real(), 1e-14);
}
