#ifndef STARTOMO_DESIGN_OPTIMIZER_HPP
#define STARTOMO_DESIGN_OPTIMIZER_HPP

// Minimization of the propagated-variance cost over the circuit parameters.
// The cost is a function of the readout parameters alone; no state enters.

#include "startomo/parallel.hpp"
#include "startomo/tomography.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace startomo {

enum class GradientMode { finite_difference, analytic_if_available };

struct OptimizerConfig {
  int max_iterations = 30;
  int restarts = 10;
  std::uint64_t seed = 0;
  GradientMode gradient_mode = GradientMode::analytic_if_available;
  double fd_step = 1e-6;
  double convergence_tol = 1e-6;
  /// Largest change of any single angle per line-search trial, radians.
  double max_step = 0.3;

  void validate() const {
    if (max_iterations < 0) throw std::invalid_argument("OptimizerConfig: max_iterations must be >= 0");
    if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts must be >= 1");
    if (!(fd_step > 0.0)) throw std::invalid_argument("OptimizerConfig: fd_step must be > 0");
    if (!(max_step > 0.0)) throw std::invalid_argument("OptimizerConfig: max_step must be > 0");
  }
};

/// Everything the cost depends on: register, readout layout, basis, weights
/// and the per-observable measurement variance.
struct DesignProblem {
  BlockStructure structure;
  ObservableSet observables;
  OperatorBasis basis;
  RVector weights;
  RVector observable_variance;  ///< one entry per observable, shared by all readouts
  int layers = 3;
  int readouts = 1;
  std::vector<int> row_layers;  ///< empty: every circuit has `layers` layers

  static DesignProblem standard(const BlockStructure& s, int layers, int readouts, bool dicke_only = false,
                                double var_o = 1.0) {
    DesignProblem p;
    p.structure = s;
    p.observables = build_observables(s);
    p.basis = dicke_only ? build_dicke_basis(s) : build_operator_basis(s);
    p.weights = RVector::Ones(static_cast<Eigen::Index>(p.basis.size()));
    p.observable_variance = RVector::Constant(static_cast<Eigen::Index>(p.observables.size()), var_o);
    p.layers = layers;
    p.readouts = readouts;
    return p;
  }

  /// Mixed-depth readout set: the first `shallow` circuits use `shallow_layers`.
  void set_shallow(int shallow, int shallow_layers) {
    if (shallow < 0 || shallow > readouts) throw std::invalid_argument("set_shallow: count out of range");
    row_layers.assign(static_cast<std::size_t>(readouts), layers);
    for (int r = 0; r < shallow; ++r) row_layers[static_cast<std::size_t>(r)] = shallow_layers;
  }

  RVector row_variances() const {
    const Eigen::Index n_o = observable_variance.size();
    RVector v(n_o * readouts);
    for (int j = 0; j < readouts; ++j) v.segment(j * n_o, n_o) = observable_variance;
    return v;
  }
  RVector all_row_variances() const {
    RVector v = RVector::Zero(readouts * observable_variance.size() + static_cast<Eigen::Index>(basis.sectors().size()));
    v.head(readouts * observable_variance.size()) = row_variances();
    return v;
  }

  ParamMatrix random_theta(std::uint64_t seed) const {
    ParamMatrix p = random_params(structure.n_total(), CircuitLayout{layers}, readouts, seed);
    p.row_layers = row_layers;
    // unused trailing angles of shallow circuits are zeroed
    for (int r = 0; r < p.readouts(); ++r)
      for (Eigen::Index c = kParamsPerLayer * p.layers_of(r); c < p.theta.cols(); ++c) p.theta(r, c) = 0.0;
    return p;
  }
};

/// Variance cost f(Theta) of a design problem, with analytic or
/// finite-difference gradients.
class DesignCost {
 public:
  explicit DesignCost(DesignProblem problem)
      : problem_(std::move(problem)),
        kernel_(problem_.structure),
        variance_(trace_prior_rows(problem_.basis), problem_.weights),
        row_var_(problem_.row_variances()) {
    if ((problem_.weights.array() < 0.0).any()) throw std::invalid_argument("DesignCost: weights must be nonnegative");
  }

  const DesignProblem& problem() const { return problem_; }

  TransferMatrix transfer(const ParamMatrix& theta) const {
    check(theta);
    const auto us = synthesize_all(theta, kernel_);
    return build_transfer_matrix(us, problem_.observables, problem_.basis);
  }

  double value(const ParamMatrix& theta) const {
    check(theta);
    std::vector<std::vector<CMatrix>> us;
    return variance_.value(measurement_rows(theta, us), row_var_);
  }

  double value_and_gradient(const ParamMatrix& theta, RMatrix& grad) const {
    check(theta);
    std::vector<std::vector<CMatrix>> us;
    const RMatrix fm = measurement_rows(theta, us);
    RMatrix dfm;
    const double f = variance_.value_and_gradient(fm, row_var_, dfm);
    grad = RMatrix::Zero(theta.theta.rows(), theta.theta.cols());
    if (!std::isfinite(f)) return f;
    const auto& obs = problem_.observables;
    const Eigen::Index n_o = static_cast<Eigen::Index>(obs.size());
    const std::size_t n_sec = problem_.structure.sector_count();
    std::vector<double> row(static_cast<std::size_t>(theta.theta.cols()));
    std::vector<double> g(row.size());
    for (int j = 0; j < theta.readouts(); ++j) {
      const auto& u = us[static_cast<std::size_t>(j)];
      std::vector<CMatrix> z(n_sec);
      for (std::size_t k = 0; k < n_sec; ++k) z[k] = CMatrix::Zero(u[k].rows(), u[k].cols());
      std::vector<CMatrix> h(n_sec);
      for (Eigen::Index i = 0; i < n_o; ++i) {
        for (std::size_t k = 0; k < n_sec; ++k) h[k] = CMatrix::Zero(u[k].rows(), u[k].cols());
        const RVector coeffs = dfm.row(j * n_o + i).transpose();
        problem_.basis.assemble_into(coeffs.data(), h);
        for (std::size_t k = 0; k < n_sec; ++k) {
          const CMatrix& o = obs.items[static_cast<std::size_t>(i)].block(k);
          if (h[k].squaredNorm() == 0.0) continue;
          z[k] += h[k] * (u[k].adjoint() * o);
        }
      }
      for (std::size_t k = 0; k < n_sec; ++k) z[k] = z[k] * u[k];
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = theta.theta(j, static_cast<Eigen::Index>(c));
      const int layers = theta.layers_of(j);
      kernel_.angle_gradient(row, layers, z, g.data());
      for (int c = 0; c < kParamsPerLayer * layers; ++c) grad(j, c) = g[static_cast<std::size_t>(c)];
    }
    return f;
  }

  /// Central differences over every active angle.
  double value_and_fd_gradient(const ParamMatrix& theta, double step, RMatrix& grad) const {
    const double f = value(theta);
    grad = RMatrix::Zero(theta.theta.rows(), theta.theta.cols());
    if (!std::isfinite(f)) return f;
    ParamMatrix probe = theta;
    for (int r = 0; r < theta.readouts(); ++r)
      for (int c = 0; c < kParamsPerLayer * theta.layers_of(r); ++c) {
        const double x = theta.theta(r, c);
        probe.theta(r, c) = x + step;
        const double fp = value(probe);
        probe.theta(r, c) = x - step;
        const double fm = value(probe);
        probe.theta(r, c) = x;
        grad(r, c) = (fp - fm) / (2.0 * step);
      }
    return f;
  }

 private:
  void check(const ParamMatrix& theta) const {
    theta.validate();
    if (theta.n_total != problem_.structure.n_total()) throw std::invalid_argument("DesignCost: theta is for a different register");
  }

  RMatrix measurement_rows(const ParamMatrix& theta, std::vector<std::vector<CMatrix>>& us) const {
    const Eigen::Index n_o = static_cast<Eigen::Index>(problem_.observables.size());
    RMatrix fm(n_o * theta.readouts(), static_cast<Eigen::Index>(problem_.basis.size()));
    std::vector<double> row(static_cast<std::size_t>(theta.theta.cols()));
    for (int j = 0; j < theta.readouts(); ++j) {
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = theta.theta(j, static_cast<Eigen::Index>(c));
      us.push_back(kernel_.synthesize(row, theta.layers_of(j)));
      readout_rows(us.back(), problem_.observables, problem_.basis, fm.middleRows(j * n_o, n_o));
    }
    return fm;
  }

  DesignProblem problem_;
  CircuitKernel kernel_;
  VarianceCost variance_;
  RVector row_var_;
};

struct RestartStat {
  std::uint64_t seed = 0;
  double f_initial = 0.0;
  double f_final = 0.0;
  int iterations = 0;
  std::vector<double> trajectory;
};

struct DesignResult {
  ParamMatrix theta_initial;
  ParamMatrix theta_star;
  double f_initial = 0.0;
  double f_final = 0.0;
  std::vector<double> trajectory;  ///< f before the first step, then after each accepted step
  std::vector<RestartStat> restart_stats;
  int best_restart = 0;

  double mean_f_final() const {
    double s = 0.0;
    for (const auto& r : restart_stats) s += r.f_final;
    return s / static_cast<double>(restart_stats.size());
  }
  double sd_f_final() const {
    const double m = mean_f_final();
    double s = 0.0;
    for (const auto& r : restart_stats) s += (r.f_final - m) * (r.f_final - m);
    return restart_stats.size() > 1 ? std::sqrt(s / static_cast<double>(restart_stats.size() - 1)) : 0.0;
  }
  double mean_f_initial() const {
    double s = 0.0;
    for (const auto& r : restart_stats) s += r.f_initial;
    return s / static_cast<double>(restart_stats.size());
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seed of the i-th independent work item derived from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return detail::splitmix64(master ^ detail::splitmix64(index + 1));
}

/// Quasi-Newton (BFGS) descent with an Armijo backtracking line search.
/// Steps into rank-deficient designs evaluate to +inf and are rejected, so
/// the accepted trajectory is monotone and stays full rank.
inline DesignResult optimize(const ParamMatrix& theta0, const OptimizerConfig& config, const DesignCost& cost) {
  config.validate();
  const Eigen::Index rows = theta0.theta.rows(), cols = theta0.theta.cols();
  const Eigen::Index n = rows * cols;
  auto to_params = [&](const RVector& x) {
    ParamMatrix p = theta0;
    p.theta = Eigen::Map<const RMatrix>(x.data(), rows, cols);
    return p;
  };
  auto eval = [&](const RVector& x, RVector& g) {
    RMatrix gm;
    const ParamMatrix p = to_params(x);
    const double f = config.gradient_mode == GradientMode::finite_difference
                         ? cost.value_and_fd_gradient(p, config.fd_step, gm)
                         : cost.value_and_gradient(p, gm);
    g = Eigen::Map<const RVector>(gm.data(), n);
    return f;
  };

  RVector x = Eigen::Map<const RVector>(theta0.theta.data(), n);
  RVector g;
  double f = eval(x, g);
  if (!std::isfinite(f)) throw std::domain_error("optimize: cost at the initial parameters is not finite (rank-deficient design)");

  DesignResult res;
  res.theta_initial = theta0;
  res.f_initial = f;
  res.trajectory.push_back(f);

  RMatrix h = RMatrix::Identity(n, n);
  bool h_is_identity = true, scaled = false;
  constexpr double c1 = 1e-4;
  int it = 0;
  while (it < config.max_iterations) {
    RVector d = -(h * g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h.setIdentity();
      h_is_identity = true;
      d = -g;
      slope = g.dot(d);
      if (!(slope < 0.0)) break;  // stationary
    }
    const double dmax = d.cwiseAbs().maxCoeff();
    double alpha = std::min(1.0, config.max_step / dmax);
    bool accepted = false;
    RVector x_new, g_new;
    double f_new = f;
    for (int trial = 0; trial < 40; ++trial) {
      x_new = x + alpha * d;
      f_new = eval(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (h_is_identity) break;
      h.setIdentity();
      h_is_identity = true;
      continue;
    }
    const RVector s = x_new - x;
    const RVector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const RVector hy = h * y;
      const double yhy = y.dot(hy);
      h.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
      h.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
      h_is_identity = false;
    }
    const double f_prev = f;
    x = x_new;
    g = g_new;
    f = f_new;
    ++it;
    res.trajectory.push_back(f);
    if (f_prev - f <= config.convergence_tol * std::abs(f_prev)) break;
  }

  res.theta_star = to_params(x);
  res.f_final = f;
  res.restart_stats.push_back({config.seed, res.f_initial, res.f_final, it, res.trajectory});
  return res;
}

/// Independent optimizations from `config.restarts` seeded random
/// initializations; returns the best by final cost with every restart's stats.
/// Restarts run in parallel and are merged by restart index.
inline DesignResult multi_restart(const OptimizerConfig& config, const DesignCost& cost) {
  config.validate();
  std::vector<DesignResult> runs(static_cast<std::size_t>(config.restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    OptimizerConfig c = config;
    c.seed = derive_seed(config.seed, r);
    runs[r] = optimize(cost.problem().random_theta(c.seed), c, cost);
  });
  std::size_t best = 0;
  std::vector<RestartStat> stats;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    stats.push_back(runs[r].restart_stats.front());
    if (runs[r].f_final < runs[best].f_final) best = r;
  }
  DesignResult out = std::move(runs[best]);
  out.best_restart = static_cast<int>(best);
  out.restart_stats = std::move(stats);
  return out;
}

}  // namespace startomo

#endif  // STARTOMO_DESIGN_OPTIMIZER_HPP
