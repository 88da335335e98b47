// bandspike: run Monte Carlo campaigns and oracle checks on spiked periodic
// band matrices.
//
//   bandspike bbp --config run.json --out results/bbp
//   bandspike oracle
//   bandspike sample --config run.json --seed 7 --out matrix.txt
//
// Exit status: 0 when every verdict passes, 1 on a failed verdict or oracle
// identity, 2 on a configuration error.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "bandspike/blas_env.hpp"
#include "bandspike/errors.hpp"
#include "bandspike/harness.hpp"

namespace {

using namespace bandspike;

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> trials;
  std::optional<int> threads;
};

// Settings used when no config file is given.
ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Bbp:
      c.spikes = {{2.0, VectorPreset::uniform()}};
      break;
    case ExperimentKind::Isotropic:
      c.n = 2000;
      c.band_ladder = {50, 200, 800};
      c.powers = {1, 2, 3, 4};
      c.trials = 20;
      break;
    case ExperimentKind::Variance:
      c.n = 2000;
      c.band_ladder = {50, 100, 200, 400};
      c.powers = {2};
      c.trials = 200;
      break;
    case ExperimentKind::Semicircle:
      c.n = 2000;
      c.band = {BandSchedule::Kind::Fixed, 100, 1.0, 0.5};
      c.trials = 10;
      break;
    case ExperimentKind::Oracle:
      c.trials = 1;
      break;
  }
  return c;
}

ExperimentConfig resolve_config(ExperimentKind kind, const Options& o) {
  ExperimentConfig c;
  if (o.config.empty()) {
    c = default_config(kind);
  } else {
    std::vector<std::string> warnings;
    c = load_config(o.config, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    if (c.kind != kind) {
      throw ConfigError("config describes a '" + to_string(c.kind) + "' experiment, not '" +
                        to_string(kind) + "'");
    }
  }
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.threads) c.threads = *o.threads;
  if (!o.out.empty()) c.output_dir = o.out;
  validate(c);
  return c;
}

int run(ExperimentKind kind, const Options& o) {
  const ExperimentConfig config = resolve_config(kind, o);
  const ExperimentReport report = run_experiment(config);
  const std::filesystem::path dir =
      config.output_dir.empty() ? std::filesystem::path("bandspike_out") / to_string(kind)
                                : std::filesystem::path(config.output_dir);
  write_report(report, dir);

  std::cout << std::setprecision(6);
  for (const auto& v : report.verdicts) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << "  observed=" << v.observed
              << " expected=" << v.expected;
    if (v.rule == "abs_diff") std::cout << " tol=" << v.tolerance;
    std::cout << " (" << v.rule << ")\n";
  }
  std::cout << "report written to " << dir.string() << '\n';
  return report.all_pass() ? 0 : kExitFail;
}

int sample(const Options& o, int trial) {
  const ExperimentConfig config = resolve_config(
      o.config.empty() ? ExperimentKind::Bbp : load_config(o.config).kind, o);
  const HermitianMatrix h = sample_noise(config, config.ladder().front(),
                                         derive_seed(config.seed, static_cast<std::uint64_t>(trial)));
  if (o.out.empty()) {
    write_matrix(std::cout, h);
  } else {
    std::ofstream out(o.out);
    if (!out) throw ConfigError("cannot write " + o.out);
    write_matrix(out, h);
  }
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "master seed (overrides config)");
  sub->add_option("--out", o.out, "output directory (file for sample)");
  sub->add_option("--trials", o.trials, "trial count (overrides config)")->check(CLI::PositiveNumber);
  sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  bandspike::pin_blas_kernel(argv);
  CLI::App app{"Spiked random band matrix experiments"};
  app.require_subcommand(1);
  Options opts;
  int trial = 0;

  const std::vector<std::pair<std::string, ExperimentKind>> kinds = {
      {"bbp", ExperimentKind::Bbp},
      {"isotropic", ExperimentKind::Isotropic},
      {"variance", ExperimentKind::Variance},
      {"semicircle", ExperimentKind::Semicircle},
      {"oracle", ExperimentKind::Oracle}};
  std::vector<std::pair<CLI::App*, ExperimentKind>> runs;
  for (const auto& [name, kind] : kinds) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    add_common(sub, opts);
    runs.emplace_back(sub, kind);
  }
  CLI::App* sample_cmd = app.add_subcommand("sample", "dump one sampled noise matrix");
  add_common(sample_cmd, opts);
  sample_cmd->add_option("--trial", trial, "trial stream to sample")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (sample_cmd->parsed()) return sample(opts, trial);
    for (const auto& [sub, kind] : runs) {
      if (sub->parsed()) return run(kind, opts);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const OracleFailure& e) {
    std::cerr << "oracle failure: " << e.what() << '\n';
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitFail;
}
