#include "startomo/block_hilbert.hpp"
#include "startomo/full_space.hpp"
#include "startomo/states.hpp"

#include <gtest/gtest.h>

using namespace startomo;

namespace {

// Independent count of spin-j copies among n spin-1/2 particles.
std::int64_t copies_by_binomial(int n, int j2) {
  const int k = (n - j2) / 2;
  return binomial(n, k) - (k > 0 ? binomial(n, k - 1) : 0);
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(BlockStructure, TenSpinSectors) {
  const BlockStructure s{RegisterSpec{10}};
  ASSERT_EQ(s.sector_count(), 5u);
  const std::int64_t mult[] = {1, 8, 27, 48, 42};
  const int j2[] = {9, 7, 5, 3, 1};
  std::int64_t dim = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(s.sector(k).multiplicity, mult[k]);
    EXPECT_EQ(s.sector(k).j2, j2[k]);
    EXPECT_EQ(s.sector(k).block_dim, 2 * (j2[k] + 1));
    dim += s.sector(k).multiplicity * (s.sector(k).j2 + 1);
  }
  EXPECT_EQ(dim, 512);
  EXPECT_EQ(s.basis_size(), 880);
}

TEST(BlockStructure, SmallRegisters) {
  const BlockStructure two{RegisterSpec{2}};
  ASSERT_EQ(two.sector_count(), 1u);
  EXPECT_EQ(two.sector(0).j2, 1);
  EXPECT_EQ(two.sector(0).multiplicity, 1);
  EXPECT_EQ(two.sector(0).block_dim, 4);

  const BlockStructure three{RegisterSpec{3}};
  ASSERT_EQ(three.sector_count(), 2u);
  EXPECT_EQ(three.sector(0).j2, 2);
  EXPECT_EQ(three.sector(1).j2, 0);
  EXPECT_EQ(three.sector(0).multiplicity, 1);
  EXPECT_EQ(three.sector(1).multiplicity, 1);

  const BlockStructure four{RegisterSpec{4}};
  ASSERT_EQ(four.sector_count(), 2u);
  EXPECT_EQ(four.sector(0).multiplicity, 1);
  EXPECT_EQ(four.sector(1).multiplicity, 2);
  EXPECT_EQ(four.basis_size(), 64 + 16);
}

TEST(BlockStructure, MultiplicityMatchesBinomialCount) {
  for (int n_total = 2; n_total <= 16; ++n_total) {
    const BlockStructure s{RegisterSpec{n_total}};
    std::int64_t dim = 0;
    for (const auto& sec : s.sectors()) {
      EXPECT_EQ(sec.multiplicity, copies_by_binomial(n_total - 1, sec.j2)) << "N=" << n_total << " 2j=" << sec.j2;
      dim += sec.multiplicity * (sec.j2 + 1);
    }
    EXPECT_EQ(dim, std::int64_t{1} << (n_total - 1)) << "N=" << n_total;
    EXPECT_EQ(static_cast<int>(s.sector_count()), (n_total + 1) / 2);
  }
}

TEST(BlockStructure, RejectsBadRegister) {
  EXPECT_THROW(BlockStructure{RegisterSpec{1}}, std::invalid_argument);
  EXPECT_THROW((BlockStructure{RegisterSpec{4, 0.0}}), std::invalid_argument);
  EXPECT_THROW((BlockStructure{RegisterSpec{4, -1.0}}), std::invalid_argument);
  EXPECT_THROW(BlockStructure{}.n_total(), std::logic_error);
}

TEST(BlockMatrix, ShapeAndHermiticityChecks) {
  const BlockStructure s{RegisterSpec{3}};
  std::vector<CMatrix> wrong_count{CMatrix::Identity(6, 6)};
  EXPECT_THROW(BlockMatrix(s, wrong_count, true), std::invalid_argument);
  std::vector<CMatrix> wrong_dim{CMatrix::Identity(6, 6), CMatrix::Identity(3, 3)};
  EXPECT_THROW(BlockMatrix(s, wrong_dim, true), std::invalid_argument);
  std::vector<CMatrix> skew{CMatrix::Identity(6, 6), CMatrix::Zero(2, 2)};
  skew[1](0, 1) = 1.0;
  EXPECT_THROW(BlockMatrix(s, skew, true), std::invalid_argument);
  EXPECT_NO_THROW(BlockMatrix(s, skew, false));
}

TEST(BlockMatrix, Arithmetic) {
  const BlockStructure s{RegisterSpec{4}};
  const BlockMatrix id = BlockMatrix::identity(s);
  EXPECT_NEAR(id.trace().real(), 8.0 + 4.0, 1e-14);
  const BlockMatrix two = id + id;
  EXPECT_NEAR(two.trace().real(), 24.0, 1e-14);
  EXPECT_NEAR((two - id).frobenius_norm(), id.frobenius_norm(), 1e-14);
  EXPECT_NEAR((id * id).trace().real(), 12.0, 1e-14);
  EXPECT_THROW(id + BlockMatrix::identity(BlockStructure{RegisterSpec{5}}), std::invalid_argument);
}

TEST(AngularMomentum, CommutationAndCasimir) {
  for (int j2 = 0; j2 <= 9; ++j2) {
    const SpinMatrices m = angular_momentum_ops_2j(j2);
    const double j = 0.5 * j2;
    const CMatrix comm = m.x * m.y - m.y * m.x;
    EXPECT_LT(max_abs(comm - kI * m.z), 1e-12);
    const CMatrix cas = m.x * m.x + m.y * m.y + m.z * m.z;
    EXPECT_LT(max_abs(cas - j * (j + 1) * CMatrix::Identity(j2 + 1, j2 + 1)), 1e-12);
  }
}

TEST(AngularMomentum, SpinHalfIsHalfPauli) {
  const SpinMatrices m = angular_momentum_ops(0.5);
  EXPECT_LT(max_abs(m.x - 0.5 * full::pauli('x')), 1e-15);
  EXPECT_LT(max_abs(m.y - 0.5 * full::pauli('y')), 1e-15);
  EXPECT_LT(max_abs(m.z - 0.5 * full::pauli('z')), 1e-15);
}

TEST(AngularMomentum, RejectsNonHalfInteger) {
  EXPECT_THROW(angular_momentum_ops(0.3), std::invalid_argument);
  EXPECT_THROW(angular_momentum_ops(-0.5), std::invalid_argument);
  EXPECT_EQ(angular_momentum_ops(0.0).z.rows(), 1);
}

TEST(SchurBasis, OrthonormalAndComplete) {
  for (int n = 1; n <= 7; ++n) {
    const SchurBasis b = build_schur_basis(n);
    const RMatrix u = b.unitary();
    ASSERT_EQ(u.rows(), Eigen::Index{1} << n);
    ASSERT_EQ(u.cols(), u.rows());
    EXPECT_LT((u.transpose() * u - RMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff(), 1e-12) << "n=" << n;
    const BlockStructure s{RegisterSpec{n + 1}};
    const auto counts = b.copy_counts();
    for (std::size_t k = 0; k < s.sector_count(); ++k) EXPECT_EQ(counts[k], s.sector(k).multiplicity);
  }
}

TEST(SchurBasis, SingletPhase) {
  const SchurBasis b = build_schur_basis(2);
  const auto copies = b.copies();
  const auto it = std::find_if(copies.begin(), copies.end(), [](const auto& c) { return c.j2 == 0; });
  ASSERT_NE(it, copies.end());
  // |01> - |10>, qubit 0 most significant
  EXPECT_NEAR(it->isometry(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(it->isometry(2, 0), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(SchurBasis, CopiesCarryCollectiveSpin) {
  const int n = 4;
  const SchurBasis b = build_schur_basis(n);
  CMatrix jz = CMatrix::Zero(16, 16), jp = CMatrix::Zero(16, 16);
  const CMatrix sp = (CMatrix(2, 2) << 0, 1, 0, 0).finished();
  for (int q = 0; q < n; ++q) {
    jz += 0.5 * full::on_qubit(full::pauli('z'), q, n);
    jp += full::on_qubit(sp, q, n);
  }
  for (const auto& c : b.copies()) {
    const SpinMatrices m = angular_momentum_ops_2j(c.j2);
    const CMatrix w = c.isometry.cast<Complex>();
    EXPECT_LT(max_abs(w.adjoint() * jz * w - m.z), 1e-12);
    EXPECT_LT(max_abs(w.adjoint() * jp * w - (m.x + kI * m.y)), 1e-12);
  }
}

TEST(SchurBasis, CapEnforced) {
  EXPECT_THROW(build_schur_basis(6, 5), std::invalid_argument);
  EXPECT_THROW(build_schur_basis(0), std::invalid_argument);
  EXPECT_NO_THROW(build_schur_basis(5, 5));
}

TEST(Compress, ExpandRoundTripThreeSpins) {
  const BlockStructure s{RegisterSpec{3}};
  const SchurBasis b = build_schur_basis(2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CMatrix rho = full::random_symmetric_state(3, seed);
    const BlockMatrix br = compress(rho, b, s);
    EXPECT_LT(max_abs(expand(br, b) - rho), 1e-12);
    EXPECT_NEAR(br.trace().real(), 1.0, 1e-12);
  }
}

TEST(Compress, BlockRoundTripMultiplicityTwo) {
  const BlockStructure s{RegisterSpec{4}};
  const SchurBasis b = build_schur_basis(3);
  const BlockState st = make_random_state(s, 11);
  const BlockMatrix back = compress(expand(st.matrix(), b), b, s);
  for (std::size_t k = 0; k < s.sector_count(); ++k) EXPECT_LT(max_abs(back.block(k) - st.block(k)), 1e-12);
}

TEST(Compress, PureSumMatchesDensity) {
  const BlockStructure s{RegisterSpec{4}};
  const SchurBasis b = build_schur_basis(3);
  CVector v = CVector::Zero(16);
  v(0) = 1.0 / std::sqrt(2.0);
  v(15) = 1.0 / std::sqrt(2.0);
  const std::vector<CVector> vs{v};
  const std::vector<double> ws{1.0};
  const BlockMatrix a = compress_pure_sum(vs, ws, b, s);
  const BlockMatrix c = compress(v * v.adjoint(), b, s);
  for (std::size_t k = 0; k < s.sector_count(); ++k) EXPECT_LT(max_abs(a.block(k) - c.block(k)), 1e-13);
}

TEST(Compress, RejectsAsymmetricState) {
  const BlockStructure s{RegisterSpec{3}};
  const SchurBasis b = build_schur_basis(2);
  CMatrix rho = CMatrix::Zero(8, 8);
  rho(0b010, 0b010) = 1.0;  // one peripheral spin flipped, not symmetrized
  EXPECT_THROW(compress(rho, b, s), std::invalid_argument);
  EXPECT_THROW(compress(CMatrix::Identity(4, 4), b, s), std::invalid_argument);
}

TEST(Compress, OperatorIsPerCopyAction) {
  const int n_total = 4;
  const BlockStructure s{RegisterSpec{n_total}};
  const SchurBasis b = build_schur_basis(3);
  const CMatrix jx = 0.5 * full::collective('x', n_total);
  const BlockMatrix bx = compress_operator(jx, b, s);
  for (std::size_t k = 0; k < s.sector_count(); ++k) {
    const SpinMatrices m = angular_momentum_ops_2j(s.sector(k).j2);
    EXPECT_LT(max_abs(bx.block(k) - kron_peripheral(m.x)), 1e-12);
  }
  const BlockMatrix az = compress_operator(full::central('z', n_total), b, s);
  for (std::size_t k = 0; k < s.sector_count(); ++k)
    EXPECT_LT(max_abs(az.block(k) - kron_central(s.sector(k).j2 + 1, full::pauli('z'))), 1e-12);
}

TEST(Compress, TracePreservedAndWeightsSumToOne) {
  const BlockStructure s{RegisterSpec{5}};
  const SchurBasis b = build_schur_basis(4);
  const BlockState st(compress(full::random_symmetric_state(5, 3), b, s));
  double total = 0.0;
  for (double l : st.trace_weights()) {
    EXPECT_GE(l, -1e-14);
    total += l;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}
