#include "startomo/design_optimizer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace startomo;

namespace {

DesignCost small_cost(int n_total, int extra = 0, bool dicke = false) {
  const BlockStructure s{RegisterSpec{n_total}};
  return DesignCost(DesignProblem::standard(s, 3, min_readouts(n_total, dicke) + extra, dicke));
}

}  // namespace

TEST(DesignCost, MatchesTransferMatrixCost) {
  const DesignCost c = small_cost(4);
  const ParamMatrix p = c.problem().random_theta(3);
  const TransferMatrix f = c.transfer(p);
  const double ref = cost(f, c.problem().weights, c.problem().all_row_variances());
  EXPECT_NEAR(c.value(p), ref, 1e-9 * ref);
}

TEST(DesignCost, AnalyticGradientMatchesFiniteDifference) {
  for (int n_total : {3, 4}) {
    const DesignCost c = small_cost(n_total);
    const ParamMatrix p = c.problem().random_theta(11);
    RMatrix ga, gf;
    const double fa = c.value_and_gradient(p, ga);
    const double ff = c.value_and_fd_gradient(p, 1e-5, gf);
    EXPECT_NEAR(fa, ff, 1e-12 * fa);
    EXPECT_LT((ga - gf).cwiseAbs().maxCoeff(), 1e-5 * gf.cwiseAbs().maxCoeff()) << "N=" << n_total;
  }
}

TEST(DesignCost, MixedDepthGradient) {
  const BlockStructure s{RegisterSpec{4}};
  DesignProblem prob = DesignProblem::standard(s, 3, min_readouts(4) + 2);
  prob.set_shallow(3, 2);
  const DesignCost c(prob);
  const ParamMatrix p = prob.random_theta(2);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(p.theta.row(r).tail(6).cwiseAbs().maxCoeff(), 0.0);
  RMatrix ga, gf;
  c.value_and_gradient(p, ga);
  c.value_and_fd_gradient(p, 1e-5, gf);
  EXPECT_LT((ga - gf).cwiseAbs().maxCoeff(), 1e-5 * gf.cwiseAbs().maxCoeff());
  for (int r = 0; r < 3; ++r) EXPECT_EQ(ga.row(r).tail(6).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DesignCost, DickeProblem) {
  const DesignCost c = small_cost(5, 0, true);
  EXPECT_EQ(c.problem().basis.size(), 100u);
  const ParamMatrix p = c.problem().random_theta(1);
  RMatrix ga, gf;
  c.value_and_gradient(p, ga);
  c.value_and_fd_gradient(p, 1e-5, gf);
  EXPECT_LT((ga - gf).cwiseAbs().maxCoeff(), 1e-5 * gf.cwiseAbs().maxCoeff());
}

TEST(DesignCost, RejectsWrongRegisterAndNegativeWeights) {
  const DesignCost c = small_cost(4);
  EXPECT_THROW(c.value(random_params(5, CircuitLayout{3}, min_readouts(4), 1)), std::invalid_argument);
  DesignProblem p = DesignProblem::standard(BlockStructure{RegisterSpec{3}}, 3, 4);
  p.weights(0) = -1.0;
  EXPECT_THROW(DesignCost{p}, std::invalid_argument);
}

TEST(DesignCost, CostScalesWithVariance) {
  const BlockStructure s{RegisterSpec{3}};
  const DesignCost a(DesignProblem::standard(s, 3, 5, false, 1.0));
  const DesignCost b(DesignProblem::standard(s, 3, 5, false, 3.0));
  const ParamMatrix p = a.problem().random_theta(4);
  EXPECT_NEAR(b.value(p), 3.0 * a.value(p), 1e-9 * b.value(p));
}

TEST(Optimize, ZeroIterationsIsPassthrough) {
  const DesignCost c = small_cost(4);
  const ParamMatrix p = c.problem().random_theta(5);
  OptimizerConfig cfg;
  cfg.max_iterations = 0;
  const DesignResult r = optimize(p, cfg, c);
  EXPECT_EQ(r.theta_star.theta, p.theta);
  EXPECT_EQ(r.f_final, r.f_initial);
  EXPECT_EQ(r.trajectory.size(), 1u);
}

TEST(Optimize, MonotoneAndFullRank) {
  const DesignCost c = small_cost(4);
  OptimizerConfig cfg;
  cfg.max_iterations = 15;
  const DesignResult r = optimize(c.problem().random_theta(9), cfg, c);
  ASSERT_GE(r.trajectory.size(), 2u);
  for (std::size_t k = 1; k < r.trajectory.size(); ++k) EXPECT_LE(r.trajectory[k], r.trajectory[k - 1]);
  EXPECT_LE(r.f_final, r.f_initial);
  EXPECT_EQ(r.trajectory.back(), r.f_final);
  EXPECT_EQ(numerical_rank(c.transfer(r.theta_star)), c.problem().structure.basis_size());
  EXPECT_NEAR(c.value(r.theta_star), r.f_final, 1e-12 * r.f_final);
}

TEST(Optimize, HalvesCostAtFourSpins) {
  const DesignCost c = small_cost(4);
  OptimizerConfig cfg;
  cfg.max_iterations = 30;
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DesignResult r = optimize(c.problem().random_theta(derive_seed(7, seed)), cfg, c);
    ratios.push_back(r.f_final / r.f_initial);
  }
  std::nth_element(ratios.begin(), ratios.begin() + 2, ratios.end());
  EXPECT_LE(ratios[2], 0.5);
}

TEST(Optimize, FiniteDifferenceModeDescends) {
  const DesignCost c = small_cost(3);
  OptimizerConfig cfg;
  cfg.max_iterations = 5;
  cfg.gradient_mode = GradientMode::finite_difference;
  const DesignResult r = optimize(c.problem().random_theta(2), cfg, c);
  EXPECT_LT(r.f_final, r.f_initial);
}

TEST(Optimize, RankDeficientStartRejected) {
  const BlockStructure s{RegisterSpec{4}};
  const DesignCost c(DesignProblem::standard(s, 3, min_readouts(4) - 1));
  OptimizerConfig cfg;
  EXPECT_THROW(optimize(c.problem().random_theta(1), cfg, c), std::domain_error);
}

TEST(Optimize, ConfigValidation) {
  OptimizerConfig cfg;
  cfg.fd_step = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = OptimizerConfig{};
  cfg.restarts = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = OptimizerConfig{};
  cfg.max_iterations = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(MultiRestart, DeterministicAndConsistent) {
  const DesignCost c = small_cost(3);
  OptimizerConfig cfg;
  cfg.max_iterations = 8;
  cfg.restarts = 4;
  cfg.seed = 99;
  const DesignResult a = multi_restart(cfg, c);
  const DesignResult b = multi_restart(cfg, c);
  EXPECT_EQ(a.theta_star.theta, b.theta_star.theta);
  EXPECT_EQ(a.trajectory, b.trajectory);
  ASSERT_EQ(a.restart_stats.size(), 4u);
  std::vector<double> finals;
  for (const auto& st : a.restart_stats) {
    EXPECT_LE(a.f_final, st.f_initial);
    EXPECT_LE(a.f_final, st.f_final);
    finals.push_back(st.f_final);
  }
  std::sort(finals.begin(), finals.end());
  EXPECT_LE(a.f_final, 0.5 * (finals[1] + finals[2]));
  EXPECT_EQ(a.restart_stats[static_cast<std::size_t>(a.best_restart)].f_final, a.f_final);
  EXPECT_GE(a.sd_f_final(), 0.0);
  EXPECT_EQ(a.theta_initial.theta, c.problem().random_theta(derive_seed(99, static_cast<std::uint64_t>(a.best_restart))).theta);
}

TEST(MultiRestart, SingleRestartReducesToOptimize) {
  const DesignCost c = small_cost(3);
  OptimizerConfig cfg;
  cfg.max_iterations = 6;
  cfg.restarts = 1;
  cfg.seed = 5;
  const DesignResult m = multi_restart(cfg, c);
  OptimizerConfig one = cfg;
  one.seed = derive_seed(5, 0);
  const DesignResult o = optimize(c.problem().random_theta(one.seed), one, c);
  EXPECT_EQ(m.theta_star.theta, o.theta_star.theta);
  EXPECT_EQ(m.f_final, o.f_final);
}

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m)
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(m, i));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(3, 4), derive_seed(3, 4));
}
