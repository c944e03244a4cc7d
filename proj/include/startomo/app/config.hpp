#ifndef STARTOMO_APP_CONFIG_HPP
#define STARTOMO_APP_CONFIG_HPP

// Run configuration. JSON files use a flat schema whose keys match the
// fields below; command-line flags override file values.

#include "startomo/io.hpp"

#include <optional>
#include <string>

namespace startomo::app {

struct RunConfig {
  int n = 10;
  double coupling = 1.0;
  int layers = 3;
  std::optional<int> readouts;  ///< default: minimum for the register
  int shallow = 0;              ///< number of 2-layer circuits in a mixed set
  std::string state = "mssm";
  std::optional<int> mssm_many;
  std::optional<double> coherent_theta;
  std::optional<double> coherent_phi;
  std::optional<double> squeeze_mu;
  std::uint64_t state_seed = 0;
  double noise_sd = 3e-4;
  int reps = 100;
  std::uint64_t seed = 0;
  int restarts = 10;
  int iters = 30;
  bool dicke = false;
  std::string out = "out";
  bool allow_underdetermined = false;
  std::string theta_file;
  bool use_initial = false;  ///< tomo: use theta_initial of a design file
  std::string sweep_mode = "layer_mix";
  int sweep_max = -1;  ///< default: 13 for layer_mix, 10 for extra_readouts
  int sweep_sets = 100;
  int oracle_cap = 5;

  int effective_readouts() const { return readouts.value_or(min_readouts(n, dicke)); }
  bool underdetermined() const { return effective_readouts() < min_readouts(n, dicke); }

  void validate() const {
    RegisterSpec{n, coupling}.validate();
    if (layers < 1) throw std::invalid_argument("config: layers must be >= 1");
    if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
    if (restarts < 1) throw std::invalid_argument("config: restarts must be >= 1");
    if (iters < 0) throw std::invalid_argument("config: iters must be >= 0");
    if (noise_sd < 0.0) throw std::invalid_argument("config: noise_sd must be >= 0");
    if (effective_readouts() < 1) throw std::invalid_argument("config: readouts must be >= 1");
    if (shallow < 0 || shallow > effective_readouts()) throw std::invalid_argument("config: shallow out of range");
    if (underdetermined() && !allow_underdetermined)
      throw std::invalid_argument("config: " + std::to_string(effective_readouts()) + " readouts is below the minimum of " +
                                  std::to_string(min_readouts(n, dicke)) + "; pass --allow-underdetermined to proceed");
  }

  StateSpec state_spec() const {
    StateSpec s;
    s.kind = parse_state_kind(state);
    s.mssm_many = mssm_many;
    s.theta = coherent_theta;
    s.phi = coherent_phi;
    s.mu = squeeze_mu;
    s.seed = state_seed;
    return s;
  }

  BlockStructure structure() const { return BlockStructure{RegisterSpec{n, coupling}}; }
};

inline io::json to_json(const RunConfig& c) {
  io::json j = {{"n", c.n},
                {"coupling", c.coupling},
                {"layers", c.layers},
                {"readouts", c.effective_readouts()},
                {"shallow", c.shallow},
                {"state", c.state},
                {"state_seed", c.state_seed},
                {"noise_sd", c.noise_sd},
                {"reps", c.reps},
                {"seed", c.seed},
                {"restarts", c.restarts},
                {"iters", c.iters},
                {"dicke", c.dicke},
                {"out", c.out},
                {"allow_underdetermined", c.allow_underdetermined},
                {"theta_file", c.theta_file},
                {"use_initial", c.use_initial},
                {"sweep_mode", c.sweep_mode},
                {"sweep_max", c.sweep_max},
                {"sweep_sets", c.sweep_sets},
                {"oracle_cap", c.oracle_cap}};
  if (c.mssm_many) j["mssm_many"] = *c.mssm_many;
  if (c.coherent_theta) j["coherent_theta"] = *c.coherent_theta;
  if (c.coherent_phi) j["coherent_phi"] = *c.coherent_phi;
  if (c.squeeze_mu) j["squeeze_mu"] = *c.squeeze_mu;
  return j;
}

/// Apply the keys present in `j` on top of `c`. Unknown keys are rejected.
inline void merge_json(RunConfig& c, const io::json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "n") c.n = v.get<int>();
    else if (k == "coupling") c.coupling = v.get<double>();
    else if (k == "layers") c.layers = v.get<int>();
    else if (k == "readouts") c.readouts = v.get<int>();
    else if (k == "shallow") c.shallow = v.get<int>();
    else if (k == "state") c.state = v.get<std::string>();
    else if (k == "mssm_many") c.mssm_many = v.get<int>();
    else if (k == "coherent_theta") c.coherent_theta = v.get<double>();
    else if (k == "coherent_phi") c.coherent_phi = v.get<double>();
    else if (k == "squeeze_mu") c.squeeze_mu = v.get<double>();
    else if (k == "state_seed") c.state_seed = v.get<std::uint64_t>();
    else if (k == "noise_sd") c.noise_sd = v.get<double>();
    else if (k == "reps") c.reps = v.get<int>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else if (k == "restarts") c.restarts = v.get<int>();
    else if (k == "iters") c.iters = v.get<int>();
    else if (k == "dicke") c.dicke = v.get<bool>();
    else if (k == "out") c.out = v.get<std::string>();
    else if (k == "allow_underdetermined") c.allow_underdetermined = v.get<bool>();
    else if (k == "theta_file") c.theta_file = v.get<std::string>();
    else if (k == "use_initial") c.use_initial = v.get<bool>();
    else if (k == "sweep_mode") c.sweep_mode = v.get<std::string>();
    else if (k == "sweep_max") c.sweep_max = v.get<int>();
    else if (k == "sweep_sets") c.sweep_sets = v.get<int>();
    else if (k == "oracle_cap") c.oracle_cap = v.get<int>();
    else throw std::invalid_argument("config: unknown key '" + k + "'");
  }
}

/// Provenance hash of the canonical JSON form.
inline std::string config_hash(const RunConfig& c) { return io::fnv1a_hex(to_json(c).dump()); }

}  // namespace startomo::app

#endif  // STARTOMO_APP_CONFIG_HPP
