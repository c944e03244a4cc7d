#ifndef STARTOMO_APP_ORACLE_HPP
#define STARTOMO_APP_ORACLE_HPP

// Cross-checks of the block machinery against full 2^N brute force.

#include "startomo/full_space.hpp"
#include "startomo/startomo.hpp"

#include <string>
#include <vector>

namespace startomo::app {

struct OracleCheck {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass() const { return max_error <= tolerance; }
};

struct OracleOptions {
  int cap = 5;
  int circuits = 20;
  int states = 10;
  int layers = 3;
  std::uint64_t seed = 0;
};

inline double max_block_error(const BlockMatrix& a, const BlockMatrix& b) {
  double e = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, (a.block(k) - b.block(k)).cwiseAbs().maxCoeff());
  return e;
}

inline std::vector<OracleCheck> run_oracle(int n_total, const OracleOptions& opt = {}) {
  if (n_total > opt.cap)
    throw std::invalid_argument("oracle: N=" + std::to_string(n_total) + " exceeds the full-space cap of " + std::to_string(opt.cap));
  const BlockStructure s{RegisterSpec{n_total}};
  const SchurBasis schur = build_schur_basis(n_total - 1, opt.cap);
  const ObservableSet obs = build_observables(s);
  const auto full_obs = full::observables(n_total);

  std::vector<OracleCheck> out;

  {
    OracleCheck c{"schur_orthonormal", 0.0, 1e-12};
    const RMatrix u = schur.unitary();
    c.max_error = (u.transpose() * u - RMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
    const auto counts = schur.copy_counts();
    for (std::size_t k = 0; k < s.sector_count(); ++k)
      if (counts[k] != s.sector(k).multiplicity) c.max_error = std::numeric_limits<double>::infinity();
    out.push_back(c);
  }

  std::vector<CMatrix> full_states;
  std::vector<BlockState> block_states;
  for (int t = 0; t < opt.states; ++t) {
    full_states.push_back(full::random_symmetric_state(n_total, derive_seed(opt.seed, static_cast<std::uint64_t>(t))));
    block_states.emplace_back(compress(full_states.back(), schur, s));
  }

  {
    OracleCheck c{"compress_expand_identity", 0.0, 1e-12};
    for (std::size_t t = 0; t < full_states.size(); ++t) {
      c.max_error = std::max(c.max_error, (expand(block_states[t].matrix(), schur) - full_states[t]).cwiseAbs().maxCoeff());
      const BlockState r = make_random_state(s, derive_seed(opt.seed + 1, t));
      c.max_error = std::max(c.max_error, max_block_error(compress(expand(r.matrix(), schur), schur, s), r.matrix()));
    }
    out.push_back(c);
  }

  {
    OracleCheck c{"observable_blocks", 0.0, 1e-10};
    for (std::size_t i = 0; i < obs.size(); ++i)
      c.max_error = std::max(c.max_error, max_block_error(compress_operator(full_obs[i], schur, s), obs.items[i]));
    out.push_back(c);
  }

  {
    OracleCheck c{"observable_expectations", 0.0, 1e-10};
    for (std::size_t t = 0; t < full_states.size(); ++t)
      for (std::size_t i = 0; i < obs.size(); ++i)
        c.max_error = std::max(c.max_error, std::abs(expectation(block_states[t], obs.items[i]) -
                                                     full::expectation(full_states[t], full_obs[i])));
    out.push_back(c);
  }

  const ParamMatrix theta = random_params(n_total, CircuitLayout{opt.layers}, opt.circuits, derive_seed(opt.seed, 1000));
  const auto us = synthesize_all(theta, s);
  {
    OracleCheck circ{"circuit_blocks", 0.0, 1e-10};
    OracleCheck ex{"circuit_expectations", 0.0, 1e-10};
    for (int r = 0; r < theta.readouts(); ++r) {
      const RVector row_v = theta.theta.row(r).transpose();
      const std::span<const double> row(row_v.data(), static_cast<std::size_t>(row_v.size()));
      const CMatrix uf = full::circuit(row, opt.layers, n_total);
      const auto& ub = us[static_cast<std::size_t>(r)];
      circ.max_error = std::max(circ.max_error, max_block_error(compress_operator(uf, schur, s), ub.matrix()));
      for (std::size_t t = 0; t < full_states.size(); ++t) {
        const CMatrix rho_f = uf * full_states[t] * uf.adjoint();
        const BlockState rho_b(ub.apply(block_states[t].matrix()));
        for (std::size_t i = 0; i < obs.size(); ++i)
          ex.max_error = std::max(ex.max_error, std::abs(expectation(rho_b, obs.items[i]) - full::expectation(rho_f, full_obs[i])));
      }
    }
    out.push_back(circ);
    out.push_back(ex);
  }

  {
    OracleCheck c{"noiseless_round_trip", 0.0, 1e-8};
    const OperatorBasis basis = build_operator_basis(s);
    const int k = min_readouts(n_total);
    const ParamMatrix p = random_params(n_total, CircuitLayout{opt.layers}, k, derive_seed(opt.seed, 2000));
    const TransferMatrix f = build_transfer_matrix(synthesize_all(p, s), obs, basis);
    const LinearInverter inv(f, basis);
    for (const auto& st : block_states) {
      const RVector o = predicted_measurements(f, basis.coefficients(st.matrix()));
      const auto r = inv.reconstruct(o, sector_traces(st, basis));
      c.max_error = std::max(c.max_error, frobenius_distance(r.state, st));
      if (r.rank_deficient) c.max_error = std::numeric_limits<double>::infinity();
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace startomo::app

#endif  // STARTOMO_APP_ORACLE_HPP
