// rydq: command-line driver.
//
//   rydq gs       --config cfg.json [--seed N] [--out DIR] [--threads N]
//   rydq strings  ...
//   rydq sweep    ...
//   rydq braid    ...
//   rydq codesim  ...
//   rydq validate --config cfg.json
//
// Exit status: 0 success, 1 invalid input, 2 numerical failure.

#include <iostream>

#include "CLI11.hpp"
#include "ryd/pipeline.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* sub, Options& o, bool with_run_flags) {
  sub->add_option("--config", o.config, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  if (!with_run_flags) return;
  sub->add_option("--seed", o.seed, "override the configured seed(s)");
  sub->add_option("--out", o.out, "output directory (default: output_dir from the config)");
  sub->add_option("--threads", o.threads, "OpenMP thread count")->check(CLI::PositiveNumber);
}

void print_summary(const ryd::RunManifest& m, const std::string& dir) {
  for (const auto& s : m.stages) {
    std::cout << (s.ok ? "ok     " : "FAILED ") << s.stage;
    if (!s.ok) std::cout << ": " << s.error;
    std::cout << "\n";
  }
  if (!m.summary.empty()) std::cout << m.summary.dump(2) << "\n";
  std::cout << m.files.size() << " file(s) written to " << dir << " (manifest.json)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg ruby-lattice spin-liquid toolkit"};
  app.require_subcommand(1);
  Options opt;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gs", "lowest eigenpairs of the configured Hamiltonian"},
      {"strings", "ground states plus string/loop measurements and phase labels"},
      {"sweep", "phase labels over the configured detuning list"},
      {"braid", "compile a braid word to a logical unitary"},
      {"codesim", "run a protocol script on the stabilizer oracle"},
      {"validate", "check a configuration file and print its canonical form"},
  };
  for (const auto& [name, help] : commands) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], opt, name != "validate");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const ryd::ExperimentConfig cfg = ryd::load_config(opt.config);
    if (subs["validate"]->parsed()) {
      std::cout << ryd::config_to_json(cfg).dump(2) << "\nconfig hash " << ryd::config_hash(cfg) << "\n";
      return 0;
    }
#ifdef _OPENMP
    if (opt.threads > 0) omp_set_num_threads(opt.threads);
#endif
    std::string stage;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) stage = name;
    const std::string dir = opt.out.empty() ? cfg.output_dir : opt.out;
    const auto manifest = ryd::run(cfg, stage, opt.seed, dir);
    print_summary(manifest, dir);
    return ryd::exit_code(manifest);
  } catch (const ryd::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ryd::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
