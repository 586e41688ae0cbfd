// Command-line front end for the ceorate library.
//
// Thin by design: flags and an optional JSON config document are folded into
// a RunConfig here, and everything else — math, feasibility handling, output
// formatting, exit codes — lives in ceorate::run_command and the cmd_*
// functions so that tests can drive them in-process.  Explicit flags always
// win over config-file values.

#include <cstdint>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ceorate/cli.hpp"

namespace {

using nlohmann::json;

/// Raw flag storage for one parse.  Kept apart from RunConfig so config-file
/// values can be applied first and explicit flags layered on top.
struct Flags {
  std::string config_path;
  std::string out_path;
  double a = 0.0;
  double sigma_v2 = 1.0;
  std::vector<double> sigma_w2;
  double d = 0.5;
  std::string d_grid;
  std::string mode = "riccati";
  bool bits = false;
  std::uint64_t seed = 1;
  std::string format = "csv";
  long long trials = 100;
  long long steps = 10000;
  int threads = 1;
  std::string spec_path;
  double alpha = 0.0;
  double beta = 0.0;
  int n = 1;
  std::vector<int> perm;
  std::string suite;
};

/// Option handles for one subcommand; null where the flag does not apply.
struct SubOptions {
  CLI::App* cmd = nullptr;
  CLI::Option* config = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* a = nullptr;
  CLI::Option* sigma_v2 = nullptr;
  CLI::Option* sigma_w2 = nullptr;
  CLI::Option* d = nullptr;
  CLI::Option* d_grid = nullptr;
  CLI::Option* mode = nullptr;
  CLI::Option* bits = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* format = nullptr;
  CLI::Option* trials = nullptr;
  CLI::Option* steps = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* spec = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* perm = nullptr;
  CLI::Option* suite = nullptr;
};

void add_output_flags(SubOptions& o, Flags& f) {
  o.config = o.cmd->add_option("--config", f.config_path,
                               "JSON file supplying any flag value");
  o.out = o.cmd->add_option("--out", f.out_path, "write output to this file");
  o.format = o.cmd->add_option("--format", f.format, "output format: csv|json");
  o.seed = o.cmd->add_option("--seed", f.seed, "random seed");
}

void add_model_flags(SubOptions& o, Flags& f) {
  o.a = o.cmd->add_option("--a", f.a, "source coefficient");
  o.sigma_v2 = o.cmd->add_option("--sigma-v2", f.sigma_v2, "innovation variance");
  o.sigma_w2 = o.cmd
                   ->add_option("--sigma-w2", f.sigma_w2,
                                "observation noise variances, comma separated")
                   ->delimiter(',');
  o.mode = o.cmd->add_option("--mode", f.mode,
                             "joint-error convention: riccati|fusion|both");
  o.bits = o.cmd->add_flag("--bits", f.bits, "report rates in bits, not nats");
}

void add_target_flags(SubOptions& o, Flags& f) {
  o.d = o.cmd->add_option("--d", f.d, "distortion target");
  o.d_grid = o.cmd->add_option("--d-grid", f.d_grid,
                               "distortion sweep min:max:count[:log]");
  o.d->excludes(o.d_grid);
  o.d_grid->excludes(o.d);
}

/// Applies config-document values onto a RunConfig.  Unknown keys are
/// rejected so a typo cannot silently fall back to a default.
void apply_config(const json& j, ceorate::RunConfig& cfg) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::vector<std::string> known = {
      "a",     "sigma_v2", "sigma_w2", "d",     "d_grid", "mode",
      "unit",  "seed",     "format",   "trials", "steps",  "threads",
      "spec",  "alpha",    "beta",     "n",     "perm",   "suite"};
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw std::invalid_argument("unknown config key '" + item.key() + "'");
    }
  }
  if (j.contains("a")) cfg.a = j.at("a").get<double>();
  if (j.contains("sigma_v2")) cfg.sigma_v2 = j.at("sigma_v2").get<double>();
  if (j.contains("sigma_w2")) {
    cfg.sigma_w2 = j.at("sigma_w2").get<std::vector<double>>();
  }
  if (j.contains("d")) cfg.d = j.at("d").get<double>();
  if (j.contains("d_grid")) {
    ceorate::detail::parse_grid(j.at("d_grid").get<std::string>(), cfg);
  }
  if (j.contains("mode")) {
    cfg.mode = ceorate::detail::parse_mode(j.at("mode").get<std::string>(),
                                           cfg.mode_both);
  }
  if (j.contains("unit")) {
    const std::string u = j.at("unit").get<std::string>();
    if (u == "bits") {
      cfg.unit = ceorate::RateUnit::kBits;
    } else if (u == "nats") {
      cfg.unit = ceorate::RateUnit::kNats;
    } else {
      throw std::invalid_argument("unit must be 'nats' or 'bits'");
    }
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<long long>();
  if (j.contains("steps")) cfg.steps = j.at("steps").get<long long>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (j.contains("spec")) cfg.system_path = j.at("spec").get<std::string>();
  if (j.contains("alpha")) cfg.alpha_override = j.at("alpha").get<double>();
  if (j.contains("beta")) cfg.beta_override = j.at("beta").get<double>();
  if (j.contains("n")) cfg.n_override = j.at("n").get<int>();
  if (j.contains("perm")) cfg.perm = j.at("perm").get<std::vector<int>>();
  if (j.contains("suite")) cfg.suite = j.at("suite").get<std::string>();
}

/// Builds the final RunConfig: defaults, then the config document, then any
/// flag the user actually typed.
ceorate::RunConfig resolve(const std::string& name, const Flags& f,
                           const SubOptions& o) {
  ceorate::RunConfig cfg;
  cfg.subcommand = name;
  const auto given = [](const CLI::Option* opt) { return opt && opt->count() > 0; };
  if (given(o.config)) {
    std::ifstream in(f.config_path);
    if (!in) {
      throw std::invalid_argument("cannot open config file '" + f.config_path + "'");
    }
    apply_config(json::parse(in), cfg);
  }
  if (given(o.a)) cfg.a = f.a;
  if (given(o.sigma_v2)) cfg.sigma_v2 = f.sigma_v2;
  if (given(o.sigma_w2)) cfg.sigma_w2 = f.sigma_w2;
  if (given(o.d)) {
    cfg.d = f.d;
    cfg.has_grid = false;
  }
  if (given(o.d_grid)) {
    cfg.d = std::nullopt;
    ceorate::detail::parse_grid(f.d_grid, cfg);
  }
  if (given(o.mode)) cfg.mode = ceorate::detail::parse_mode(f.mode, cfg.mode_both);
  if (given(o.bits)) cfg.unit = ceorate::RateUnit::kBits;
  if (given(o.seed)) cfg.seed = f.seed;
  if (given(o.format)) cfg.format = f.format;
  if (given(o.trials)) cfg.trials = f.trials;
  if (given(o.steps)) cfg.steps = f.steps;
  if (given(o.threads)) cfg.threads = f.threads;
  if (given(o.spec)) cfg.system_path = f.spec_path;
  if (given(o.alpha)) cfg.alpha_override = f.alpha;
  if (given(o.beta)) cfg.beta_override = f.beta;
  if (given(o.n)) cfg.n_override = f.n;
  if (given(o.perm)) cfg.perm = f.perm;
  if (given(o.suite)) cfg.suite = f.suite;
  if (cfg.format != "csv" && cfg.format != "json") {
    throw std::invalid_argument("format must be 'csv' or 'json'");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-distortion planner and simulator for causally tracked "
               "Gauss-Markov sources observed through isolated noisy sensors"};
  app.require_subcommand(1);
  Flags f;

  SubOptions curve;
  curve.cmd = app.add_subcommand(
      "curve", "sweep every rate expression over a distortion grid");
  add_model_flags(curve, f);
  add_target_flags(curve, f);
  add_output_flags(curve, f);

  SubOptions allocate;
  allocate.cmd = app.add_subcommand(
      "allocate", "report the optimal per-channel split at one distortion");
  add_model_flags(allocate, f);
  add_target_flags(allocate, f);
  add_output_flags(allocate, f);

  SubOptions simulate;
  simulate.cmd = app.add_subcommand(
      "simulate", "run the planned scheme in closed loop and compare errors");
  add_model_flags(simulate, f);
  add_target_flags(simulate, f);
  add_output_flags(simulate, f);
  simulate.trials = simulate.cmd->add_option("--trials", f.trials,
                                             "independent sample paths");
  simulate.steps = simulate.cmd->add_option("--steps", f.steps,
                                            "recorded steps per path");
  simulate.threads = simulate.cmd->add_option(
      "--threads", f.threads, "worker threads (never changes the output)");

  SubOptions bt;
  bt.cmd = app.add_subcommand(
      "bt-eval", "evaluate the finite-alphabet bounds for a system file");
  bt.spec = bt.cmd->add_option("--spec", f.spec_path, "system description file");
  bt.alpha = bt.cmd->add_option("--alpha", f.alpha,
                                "override every alpha threshold");
  bt.beta = bt.cmd->add_option("--beta", f.beta, "override every beta threshold");
  bt.perm = bt.cmd->add_option("--perm", f.perm, "observer order, comma separated")
                ->delimiter(',');
  bt.n = bt.cmd->add_option("--n", f.n, "block length");
  add_output_flags(bt, f);

  SubOptions self;
  self.cmd = app.add_subcommand(
      "selftest", "run the built-in verification suites");
  self.suite = self.cmd->add_option("--suite", f.suite, "run only this suite");
  add_output_flags(self, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ceorate::kExitUsage;
  }

  const SubOptions* active = nullptr;
  std::string name;
  for (const auto* o : {&curve, &allocate, &simulate, &bt, &self}) {
    if (o->cmd->parsed()) {
      active = o;
      name = o->cmd->get_name();
    }
  }

  ceorate::RunConfig cfg;
  try {
    cfg = resolve(name, f, *active);
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return ceorate::kExitUsage;
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (active->out && active->out->count() > 0) {
    file.open(f.out_path);
    if (!file) {
      std::cerr << name << ": cannot open output file '" << f.out_path << "'\n";
      return ceorate::kExitUsage;
    }
    out = &file;
  }
  return ceorate::run_command(cfg, *out, std::cerr);
}
