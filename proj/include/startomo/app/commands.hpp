#ifndef STARTOMO_APP_COMMANDS_HPP
#define STARTOMO_APP_COMMANDS_HPP

// The decompose / design / tomo / rank / sweep / oracle workflows. Each
// command writes its files under RunConfig::out and returns its result for
// programmatic use.

#include "startomo/app/config.hpp"
#include "startomo/app/oracle.hpp"
#include "startomo/parallel.hpp"

#include <iostream>

namespace startomo::app {

namespace fs = std::filesystem;
using io::json;

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return s;
}

inline std::string csv_provenance(const RunConfig& cfg) { return "# config_hash=" + config_hash(cfg) + "\n"; }

// ---------------------------------------------------------------- decompose

inline json cmd_decompose(const RunConfig& cfg, std::ostream& os = std::cout) {
  const BlockStructure s = cfg.structure();
  json j = io::to_json(s);
  j["dof"] = dof_count(cfg.n);
  j["dof_dicke"] = dof_count(cfg.n, true);
  j["n_observables"] = n_observables(cfg.n);
  j["min_readouts"] = min_readouts(cfg.n);
  j["min_readouts_dicke"] = min_readouts(cfg.n, true);
  j["basis_size"] = s.basis_size();
  j["config_hash"] = config_hash(cfg);

  os << "N=" << cfg.n << "  peripheral spins=" << s.n_peripheral() << "\n";
  os << "  j      mult  block_dim\n";
  for (const auto& sec : s.sectors()) {
    std::ostringstream jj;
    if (sec.j2 % 2) jj << sec.j2 << "/2";
    else jj << sec.j2 / 2;
    os << "  " << std::left << std::setw(6) << jj.str() << " " << std::right << std::setw(5) << sec.multiplicity << "  "
       << std::setw(9) << sec.block_dim << "\n";
  }
  os << "basis size " << s.basis_size() << ", DOF " << j["dof"] << " (Dicke " << j["dof_dicke"] << "), N_o "
     << j["n_observables"] << ", min readouts " << j["min_readouts"] << " (Dicke " << j["min_readouts_dicke"] << ")\n";
  io::write_json_file(fs::path(cfg.out) / "decompose.json", j);
  return j;
}

// ---------------------------------------------------------------- design

inline DesignProblem design_problem(const RunConfig& cfg) {
  DesignProblem p = DesignProblem::standard(cfg.structure(), cfg.layers, cfg.effective_readouts(), cfg.dicke);
  if (cfg.shallow > 0) p.set_shallow(cfg.shallow, 2);
  return p;
}

inline OptimizerConfig optimizer_config(const RunConfig& cfg) {
  OptimizerConfig oc;
  oc.max_iterations = cfg.iters;
  oc.restarts = cfg.restarts;
  oc.seed = cfg.seed;
  return oc;
}

inline DesignResult cmd_design(const RunConfig& cfg, std::ostream& os = std::cout) {
  cfg.validate();
  const DesignCost cost(design_problem(cfg));
  const DesignResult r = multi_restart(optimizer_config(cfg), cost);
  json j = io::to_json(r);
  j["dicke"] = cfg.dicke;
  j["underdetermined"] = cfg.underdetermined();
  j["config_hash"] = config_hash(cfg);
  io::write_json_file(fs::path(cfg.out) / "theta.json", j);
  std::ostringstream traj;
  traj << csv_provenance(cfg);
  io::write_trajectory_csv(traj, r.trajectory);
  io::write_text_file(fs::path(cfg.out) / "trajectory.csv", traj.str());
  os << "design: " << r.theta_star.readouts() << " readouts x " << r.theta_star.theta.cols() << " angles, best restart "
     << r.best_restart << ": f " << r.f_initial << " -> " << r.f_final << " Var(o)  (mean over restarts "
     << r.mean_f_initial() << " -> " << r.mean_f_final() << " +- " << r.sd_f_final() << ")\n";
  return r;
}

// ---------------------------------------------------------------- tomo

struct RepMetrics {
  int rep = 0;
  std::uint64_t seed = 0;
  double infidelity = 0.0;          ///< after psd_project
  double frobenius_distance = 0.0;  ///< raw linear-inversion estimate
  double projected_distance = 0.0;
  double residual = 0.0;
};

struct CampaignReport {
  std::vector<RepMetrics> reps;
  Summary infidelity, frobenius_distance, projected_distance, residual;
  int rank = 0;
  int cols = 0;
  bool underdetermined = false;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string theta_file;
  std::string state;

  void aggregate() {
    std::vector<double> a, b, c, d;
    for (const auto& r : reps) {
      a.push_back(r.infidelity);
      b.push_back(r.frobenius_distance);
      c.push_back(r.projected_distance);
      d.push_back(r.residual);
    }
    infidelity = summarize(a);
    frobenius_distance = summarize(b);
    projected_distance = summarize(c);
    residual = summarize(d);
  }
};

inline json to_json(const CampaignReport& r) {
  auto s = [](const Summary& x) { return json{{"mean", x.mean}, {"sd", x.sd}}; };
  return {{"repetitions", r.reps.size()},
          {"infidelity", s(r.infidelity)},
          {"frobenius_distance", s(r.frobenius_distance)},
          {"projected_distance", s(r.projected_distance)},
          {"residual", s(r.residual)},
          {"rank", r.rank},
          {"cols", r.cols},
          {"underdetermined", r.underdetermined},
          {"state", r.state},
          {"seed", r.seed},
          {"theta_file", r.theta_file},
          {"config_hash", r.config_hash}};
}

inline void write_metrics_csv(std::ostream& os, const CampaignReport& r) {
  os << "rep,seed,infidelity,frobenius_distance,projected_distance,residual\n" << std::setprecision(17);
  for (const auto& m : r.reps)
    os << m.rep << ',' << m.seed << ',' << m.infidelity << ',' << m.frobenius_distance << ',' << m.projected_distance << ','
       << m.residual << '\n';
}

/// Noisy reconstruction campaign against a fixed design. Repetition r draws
/// its noise from derive_seed(seed, r), so two designs run with the same
/// seed see identical noise streams.
inline CampaignReport run_campaign(const ParamMatrix& theta, const BlockState& truth, const OperatorBasis& basis,
                                   double noise_sd, int reps, std::uint64_t seed,
                                   std::optional<ReconstructionResult>* first = nullptr) {
  const BlockStructure& s = truth.structure();
  if (theta.n_total != s.n_total()) throw std::invalid_argument("campaign: theta is for a different register");
  if (!basis.covers_all_sectors())
    for (std::size_t k = 0; k < s.sector_count(); ++k)
      if (std::find(basis.sectors().begin(), basis.sectors().end(), k) == basis.sectors().end() &&
          std::abs(truth.trace_weights()[k]) > 1e-12)
        throw std::invalid_argument("campaign: state has weight outside the sectors covered by the basis");
  const TransferMatrix f = build_transfer_matrix(synthesize_all(theta, s), build_observables(s), basis);
  const LinearInverter inv(f, basis);
  const RVector o = predicted_measurements(f, basis.coefficients(truth.matrix()));
  const RVector lambda = sector_traces(truth, basis);

  CampaignReport rep;
  rep.rank = inv.rank();
  rep.cols = f.cols();
  rep.seed = seed;
  rep.reps.resize(static_cast<std::size_t>(reps));
  std::vector<std::optional<ReconstructionResult>> kept(1);
  parallel_for(rep.reps.size(), [&](std::size_t r) {
    RepMetrics& m = rep.reps[r];
    m.rep = static_cast<int>(r);
    m.seed = derive_seed(seed, r);
    const auto res = inv.reconstruct(apply_noise(o, NoiseModel{noise_sd, m.seed}), lambda);
    const BlockState proj = psd_project(res.state);
    m.infidelity = 1.0 - fidelity(proj, truth);
    m.frobenius_distance = frobenius_distance(res.state, truth);
    m.projected_distance = frobenius_distance(proj, truth);
    m.residual = res.residual_norm;
    if (r == 0) kept[0] = res;
  });
  if (first) *first = kept[0];
  rep.aggregate();
  return rep;
}

inline ParamMatrix load_theta(const RunConfig& cfg) {
  if (cfg.theta_file.empty()) return random_params(cfg.n, CircuitLayout{cfg.layers}, cfg.effective_readouts(), derive_seed(cfg.seed, 0x7e7a));
  const json j = io::read_json_file(cfg.theta_file);
  ParamMatrix p = io::params_from_json(j);
  if (cfg.use_initial) {
    if (!j.contains("theta_initial")) throw std::invalid_argument("theta file has no theta_initial");
    p.theta = io::matrix_from_json(j.at("theta_initial"));
    p.validate();
  }
  if (p.n_total != cfg.n)
    throw std::invalid_argument("theta file is for N=" + std::to_string(p.n_total) + " but the register has N=" + std::to_string(cfg.n));
  return p;
}

inline CampaignReport cmd_tomo(const RunConfig& cfg, std::ostream& os = std::cout) {
  RunConfig c = cfg;
  const ParamMatrix theta = load_theta(c);
  if (!c.readouts) c.readouts = theta.readouts();
  if (theta.readouts() != c.effective_readouts()) throw std::invalid_argument("theta file readout count differs from --readouts");
  c.validate();
  const BlockStructure s = c.structure();
  const BlockState truth = make_state(c.state_spec(), s);
  const OperatorBasis basis = c.dicke ? build_dicke_basis(s) : build_operator_basis(s);
  std::optional<ReconstructionResult> first;
  CampaignReport r = run_campaign(theta, truth, basis, c.noise_sd, c.reps, c.seed, &first);
  r.underdetermined = c.underdetermined();
  r.config_hash = config_hash(c);
  r.theta_file = c.theta_file;
  r.state = c.state;

  const fs::path out(c.out);
  std::ostringstream csv;
  csv << csv_provenance(c);
  write_metrics_csv(csv, r);
  io::write_text_file(out / "metrics.csv", csv.str());
  io::write_json_file(out / "report.json", to_json(r));
  io::write_json_file(out / "truth_state.json", io::to_json(truth));
  if (first) io::write_json_file(out / "reconstruction_rep0.json", io::to_json(*first));
  os << "tomo: " << r.reps.size() << " reps, state " << c.state << ", rank " << r.rank << "/" << r.cols
     << (r.underdetermined ? " (underdetermined)" : "") << "\n  infidelity " << r.infidelity.mean << " +- "
     << r.infidelity.sd << "\n  distance   " << r.frobenius_distance.mean << " +- " << r.frobenius_distance.sd << "\n";
  return r;
}

// ---------------------------------------------------------------- rank

inline json cmd_rank(const RunConfig& cfg, std::ostream& os = std::cout) {
  const ParamMatrix theta = load_theta(cfg);
  const BlockStructure s = cfg.structure();
  const OperatorBasis basis = cfg.dicke ? build_dicke_basis(s) : build_operator_basis(s);
  const TransferMatrix f = build_transfer_matrix(synthesize_all(theta, s), build_observables(s), basis);
  const int rank = numerical_rank(f);
  json j = {{"rank", rank},
            {"rows", f.total_rows()},
            {"cols", f.cols()},
            {"readouts", theta.readouts()},
            {"full_rank", rank == f.cols()},
            {"config_hash", config_hash(cfg)}};
  io::write_json_file(fs::path(cfg.out) / "rank.json", j);
  std::ostringstream csv;
  io::write_transfer_csv(csv, f);
  io::write_text_file(fs::path(cfg.out) / "transfer.csv", csv.str());
  os << "rank " << rank << " of " << f.cols() << " (" << f.total_rows() << " rows)" << (rank == f.cols() ? "" : ", rank deficient")
     << "\n";
  return j;
}

// ---------------------------------------------------------------- sweep

struct SweepPoint {
  int x = 0;
  int readouts = 0;
  double mean_f = 0.0;
  double sd_f = 0.0;
  double full_rank_fraction = 0.0;
};

/// layer_mix: the first x circuits of each base set are cut to 2 layers.
/// extra_readouts: x extra random circuits are appended to the base set
/// (sets are nested across x). Statistics of f cover full-rank sets only.
inline std::vector<SweepPoint> run_sweep(const RunConfig& cfg) {
  const bool mix = cfg.sweep_mode == "layer_mix";
  if (!mix && cfg.sweep_mode != "extra_readouts") throw std::invalid_argument("sweep: unknown mode '" + cfg.sweep_mode + "'");
  if (cfg.sweep_sets < 1) throw std::invalid_argument("sweep: sweep_sets must be >= 1");
  const int base = cfg.effective_readouts();
  const int max_x = cfg.sweep_max >= 0 ? cfg.sweep_max : (mix ? 13 : 10);
  if (mix && max_x > base) throw std::invalid_argument("sweep: more 2-layer circuits than readouts");
  if (mix && cfg.layers <= 2) throw std::invalid_argument("sweep: layer_mix needs layers > 2");
  const int points = max_x + 1;
  const DesignCost cost(DesignProblem::standard(cfg.structure(), cfg.layers, base, cfg.dicke));
  const int cols = static_cast<int>(cost.problem().basis.size());

  std::vector<double> f(static_cast<std::size_t>(points * cfg.sweep_sets));
  std::vector<char> full(f.size());
  parallel_for(f.size(), [&](std::size_t item) {
    const int x = static_cast<int>(item) / cfg.sweep_sets;
    const int set = static_cast<int>(item) % cfg.sweep_sets;
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(set));
    ParamMatrix p = random_params(cfg.n, CircuitLayout{cfg.layers}, mix ? base : base + max_x, seed);
    if (mix) {
      p.row_layers.assign(static_cast<std::size_t>(base), cfg.layers);
      for (int r = 0; r < x; ++r) {
        p.row_layers[static_cast<std::size_t>(r)] = 2;
        p.theta.row(r).tail(p.theta.cols() - 2 * kParamsPerLayer).setZero();
      }
    } else {
      p.theta.conservativeResize(base + x, Eigen::NoChange);
    }
    const TransferMatrix tm = cost.transfer(p);
    full[item] = numerical_rank(tm) == cols;
    if (!full[item]) return;
    double v = cost.value(p);
    if (!std::isfinite(v)) v = startomo::cost(tm, cost.problem().weights, uniform_row_variances(tm, 1.0));
    f[item] = v;
  });

  std::vector<SweepPoint> out;
  for (int x = 0; x < points; ++x) {
    SweepPoint pt;
    pt.x = x;
    pt.readouts = mix ? base : base + x;
    std::vector<double> vals;
    for (int set = 0; set < cfg.sweep_sets; ++set) {
      const std::size_t item = static_cast<std::size_t>(x * cfg.sweep_sets + set);
      if (full[item]) vals.push_back(f[item]);
    }
    const Summary s = summarize(vals);
    pt.full_rank_fraction = static_cast<double>(vals.size()) / cfg.sweep_sets;
    pt.mean_f = vals.empty() ? std::numeric_limits<double>::quiet_NaN() : s.mean;
    pt.sd_f = vals.empty() ? std::numeric_limits<double>::quiet_NaN() : s.sd;
    out.push_back(pt);
  }
  return out;
}

inline std::vector<SweepPoint> cmd_sweep(const RunConfig& cfg, std::ostream& os = std::cout) {
  const auto pts = run_sweep(cfg);
  std::ostringstream csv;
  csv << csv_provenance(cfg) << "x,mean_f,sd_f,full_rank_fraction\n" << std::setprecision(17);
  for (const auto& p : pts) csv << p.x << ',' << p.mean_f << ',' << p.sd_f << ',' << p.full_rank_fraction << '\n';
  io::write_text_file(fs::path(cfg.out) / "sweep.csv", csv.str());
  os << "sweep " << cfg.sweep_mode << " (" << cfg.sweep_sets << " sets per point)\n   x  readouts        mean f          sd f  full rank\n";
  for (const auto& p : pts)
    os << std::setw(4) << p.x << std::setw(10) << p.readouts << std::setw(14) << std::setprecision(6) << p.mean_f << std::setw(14)
       << p.sd_f << std::setw(11) << p.full_rank_fraction << "\n";
  return pts;
}

// ---------------------------------------------------------------- oracle

/// Returns true when every check passes.
inline bool cmd_oracle(const RunConfig& cfg, std::ostream& os = std::cout) {
  OracleOptions opt;
  opt.cap = cfg.oracle_cap;
  opt.seed = cfg.seed;
  opt.layers = cfg.layers;
  const auto checks = run_oracle(cfg.n, opt);
  bool ok = true;
  json arr = json::array();
  for (const auto& c : checks) {
    ok = ok && c.pass();
    os << (c.pass() ? "PASS " : "FAIL ") << std::left << std::setw(26) << c.name << std::right << " max error " << std::setw(11)
       << std::setprecision(3) << c.max_error << "  tol " << c.tolerance << "\n";
    arr.push_back({{"name", c.name}, {"max_error", c.max_error}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
  }
  io::write_json_file(fs::path(cfg.out) / "oracle.json", {{"n", cfg.n}, {"checks", arr}, {"pass", ok}, {"config_hash", config_hash(cfg)}});
  return ok;
}

}  // namespace startomo::app

#endif  // STARTOMO_APP_COMMANDS_HPP
