// startomo: tomography of star-topology registers with optimized readouts.
//
//   startomo decompose --n 10
//   startomo design --n 10 --restarts 10 --iters 30 --out run
//   startomo tomo --theta run/theta.json --state mssm --reps 100 --out run
//   startomo rank --n 10 --readouts 36
//   startomo sweep --mode layer_mix --sets 20
//   startomo oracle --n 4

#include "startomo/app/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using startomo::app::RunConfig;

struct Flags {
  std::string config_file;
  int n = 0;
  double coupling = 0.0;
  int layers = 0, readouts = 0, shallow = 0, restarts = 0, iters = 0, reps = 0, mssm_many = 0;
  std::uint64_t seed = 0, state_seed = 0;
  std::string state, theta, out, mode;
  double noise_sd = 0.0, coherent_theta = 0.0, coherent_phi = 0.0, squeeze_mu = 0.0;
  bool dicke = false, allow_underdetermined = false, use_initial = false;
  int sweep_max = 0, sweep_sets = 0, cap = 0;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_file, "JSON config file (flags override its values)");
  app.add_option("--n", f.n, "total number of spins N (central + peripheral)");
  app.add_option("--coupling", f.coupling, "central-peripheral coupling J");
  app.add_option("--layers", f.layers, "layers per readout circuit");
  app.add_option("--readouts", f.readouts, "number of readout circuits (default: minimum)");
  app.add_option("--shallow", f.shallow, "number of 2-layer circuits in the readout set");
  app.add_option("--restarts", f.restarts, "optimizer restarts");
  app.add_option("--iters", f.iters, "optimizer iterations per restart");
  app.add_option("--seed", f.seed, "master seed");
  app.add_option("--state", f.state, "mssm | ghz | coherent | squeezed | random | maximally_mixed");
  app.add_option("--mssm-many", f.mssm_many, "MSSM: number of spin-down peripheral spins");
  app.add_option("--coherent-theta", f.coherent_theta, "coherent/squeezed polar angle");
  app.add_option("--coherent-phi", f.coherent_phi, "coherent/squeezed azimuth");
  app.add_option("--squeeze-mu", f.squeeze_mu, "one-axis twisting strength");
  app.add_option("--state-seed", f.state_seed, "seed of the random state");
  app.add_option("--noise-sd", f.noise_sd, "standard deviation of the measurement noise");
  app.add_option("--reps", f.reps, "noisy repetitions");
  app.add_flag("--dicke", f.dicke, "restrict to the Dicke sector");
  app.add_option("--theta", f.theta, "theta.json from a design run (default: random circuits)");
  app.add_flag("--use-initial", f.use_initial, "tomo/rank: use the random starting point stored in the theta file");
  app.add_option("--out", f.out, "output directory");
  app.add_flag("--allow-underdetermined", f.allow_underdetermined, "permit fewer readouts than the minimum");
  app.add_option("--mode", f.mode, "sweep: layer_mix | extra_readouts");
  app.add_option("--max", f.sweep_max, "sweep: largest x");
  app.add_option("--sets", f.sweep_sets, "sweep: random readout sets per point");
  app.add_option("--cap", f.cap, "oracle: largest N for full-space checks");
}

RunConfig resolve(const CLI::App& app, const Flags& f) {
  RunConfig c;
  if (!f.config_file.empty()) startomo::app::merge_json(c, startomo::io::read_json_file(f.config_file));
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--n")) c.n = f.n;
  if (given("--coupling")) c.coupling = f.coupling;
  if (given("--layers")) c.layers = f.layers;
  if (given("--readouts")) c.readouts = f.readouts;
  if (given("--shallow")) c.shallow = f.shallow;
  if (given("--restarts")) c.restarts = f.restarts;
  if (given("--iters")) c.iters = f.iters;
  if (given("--seed")) c.seed = f.seed;
  if (given("--state")) c.state = f.state;
  if (given("--mssm-many")) c.mssm_many = f.mssm_many;
  if (given("--coherent-theta")) c.coherent_theta = f.coherent_theta;
  if (given("--coherent-phi")) c.coherent_phi = f.coherent_phi;
  if (given("--squeeze-mu")) c.squeeze_mu = f.squeeze_mu;
  if (given("--state-seed")) c.state_seed = f.state_seed;
  if (given("--noise-sd")) c.noise_sd = f.noise_sd;
  if (given("--reps")) c.reps = f.reps;
  if (given("--dicke")) c.dicke = f.dicke;
  if (given("--theta")) c.theta_file = f.theta;
  if (given("--use-initial")) c.use_initial = f.use_initial;
  if (given("--out")) c.out = f.out;
  if (given("--allow-underdetermined")) c.allow_underdetermined = f.allow_underdetermined;
  if (given("--mode")) c.sweep_mode = f.mode;
  if (given("--max")) c.sweep_max = f.sweep_max;
  if (given("--sets")) c.sweep_sets = f.sweep_sets;
  if (given("--cap")) c.oracle_cap = f.cap;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tomography of star-topology spin registers"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<CLI::App*> subs;
  for (const char* name : {"decompose", "design", "tomo", "rank", "sweep", "oracle"}) subs.push_back(app.add_subcommand(name));
  subs[0]->description("sector table, DOF and minimal readout count");
  subs[1]->description("optimize readout circuits; writes theta.json and trajectory.csv");
  subs[2]->description("noisy reconstruction campaign; writes metrics.csv and report.json");
  subs[3]->description("numerical rank of the transfer matrix");
  subs[4]->description("layer_mix or extra_readouts sweep; writes sweep.csv");
  subs[5]->description("cross-check against full-space brute force");
  for (auto* s : subs) add_flags(*s, flags);
  CLI11_PARSE(app, argc, argv);

  try {
    for (auto* s : subs) {
      if (!s->parsed()) continue;
      const RunConfig cfg = resolve(*s, flags);
      const std::string name = s->get_name();
      namespace a = startomo::app;
      if (name == "decompose") a::cmd_decompose(cfg);
      else if (name == "design") a::cmd_design(cfg);
      else if (name == "tomo") a::cmd_tomo(cfg);
      else if (name == "rank") a::cmd_rank(cfg);
      else if (name == "sweep") a::cmd_sweep(cfg);
      else if (name == "oracle") return a::cmd_oracle(cfg) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
