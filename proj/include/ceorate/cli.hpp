#pragma once

#include <cmath>
#include <cstdint>

#include <algorithm>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ceorate/finite/parse.hpp"
#include "ceorate/model.hpp"
#include "ceorate/rdf.hpp"
#include "ceorate/record.hpp"
#include "ceorate/selftest.hpp"
#include "ceorate/sim.hpp"

namespace ceorate {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSelftestFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitDisagreement = 4;

/// Fully resolved invocation: one subcommand plus every knob it can read.
/// Front ends fill this from flags and/or a config document; the cmd_*
/// functions only consume it.
struct RunConfig {
  std::string subcommand;

  // Model and channels.
  double a = 0.0;
  double sigma_v2 = 1.0;
  std::vector<double> sigma_w2 = {1.0};

  // Distortion target: a single point or a sweep.
  std::optional<double> d;
  bool has_grid = false;
  double grid_min = 0.0;
  double grid_max = 0.0;
  int grid_count = 0;
  bool grid_log = false;

  JointMode mode = JointMode::kRiccati;
  bool mode_both = false;  ///< evaluate each point under both conventions
  RateUnit unit = RateUnit::kNats;
  std::uint64_t seed = 1;
  std::string format = "csv";  ///< csv | json

  // simulate
  long long trials = 100;
  long long steps = 10000;
  int threads = 1;

  // bt-eval
  std::string system_path;
  std::optional<double> alpha_override;
  std::optional<double> beta_override;
  std::optional<int> n_override;
  std::vector<int> perm;

  // selftest
  std::string suite;
};

namespace detail {

/// Parses "min:max:count[:log]" into the grid fields of a config.
inline void parse_grid(const std::string& text, RunConfig& cfg) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() < 3 || parts.size() > 4) {
    throw std::invalid_argument("grid must be min:max:count[:log]");
  }
  std::size_t used = 0;
  cfg.grid_min = std::stod(parts[0], &used);
  if (used != parts[0].size()) throw std::invalid_argument("bad grid minimum");
  cfg.grid_max = std::stod(parts[1], &used);
  if (used != parts[1].size()) throw std::invalid_argument("bad grid maximum");
  cfg.grid_count = std::stoi(parts[2], &used);
  if (used != parts[2].size()) throw std::invalid_argument("bad grid count");
  cfg.grid_log = false;
  if (parts.size() == 4) {
    if (parts[3] == "log") {
      cfg.grid_log = true;
    } else if (parts[3] != "linear") {
      throw std::invalid_argument("grid scale must be 'log' or 'linear'");
    }
  }
  cfg.has_grid = true;
}

inline JointMode parse_mode(const std::string& text, bool& both) {
  both = false;
  if (text == "riccati") return JointMode::kRiccati;
  if (text == "fusion") return JointMode::kFusion;
  if (text == "both") {
    both = true;
    return JointMode::kRiccati;
  }
  throw std::invalid_argument("mode must be 'riccati', 'fusion', or 'both'");
}

/// Grid points of the sweep (or the single requested distortion).
inline std::vector<double> grid_points(const RunConfig& cfg) {
  if (!cfg.has_grid) {
    if (!cfg.d) throw std::invalid_argument("need --d or --d-grid");
    return {*cfg.d};
  }
  if (cfg.grid_count < 2) throw std::invalid_argument("sweeps need count >= 2");
  if (!(cfg.grid_min < cfg.grid_max)) {
    throw std::invalid_argument("grid needs min < max");
  }
  if (cfg.grid_log && cfg.grid_min <= 0.0) {
    throw std::invalid_argument("log grids need min > 0");
  }
  std::vector<double> points;
  const double n = cfg.grid_count - 1;
  for (int i = 0; i < cfg.grid_count; ++i) {
    points.push_back(cfg.grid_log
                         ? cfg.grid_min * std::pow(cfg.grid_max / cfg.grid_min, i / n)
                         : cfg.grid_min + (cfg.grid_max - cfg.grid_min) * (i / n));
  }
  return points;
}

/// Feasibility window of the distortion target for one joint-error mode.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

inline Window feasibility_window(const SteadyState& ss, JointMode mode) {
  Window w;
  w.lo = ss.joint_mmse(mode) * (1.0 + 1e-12);
  w.hi = std::isinf(ss.sigma_x2.variance())
             ? std::numeric_limits<double>::infinity()
             : ss.sigma_x2.variance() * (1.0 - 1e-12);
  return w;
}

/// Clamps a requested distortion into the window; reports what happened.
struct ClampedTarget {
  double d = 0.0;
  std::string status;  ///< ok | clamped | infeasible
};

inline ClampedTarget clamp_target(double request, const Window& w) {
  ClampedTarget out;
  if (!std::isfinite(request) || request <= 0.0 || w.lo > w.hi) {
    out.d = std::numeric_limits<double>::quiet_NaN();
    out.status = "infeasible";
  } else if (request < w.lo) {
    out.d = w.lo;
    out.status = "clamped";
  } else if (request > w.hi) {
    out.d = w.hi;
    out.status = "clamped";
  } else {
    out.d = request;
    out.status = "ok";
  }
  return out;
}

inline void add_model_columns(Record& rec, const RunConfig& cfg) {
  rec.add("a", cfg.a);
  rec.add("sigma_v2", cfg.sigma_v2);
  rec.add_int("K", static_cast<long long>(cfg.sigma_w2.size()));
  rec.add_array("sigma_w2", cfg.sigma_w2);
}

inline void write_rows(std::ostream& os, const RunConfig& cfg,
                       const std::vector<Record>& rows) {
  if (cfg.format == "json") {
    write_json(os, rows);
  } else {
    write_csv(os, rows);
  }
}

inline void write_one(std::ostream& os, const RunConfig& cfg, const Record& rec) {
  if (cfg.format == "json") {
    write_json(os, rec);
  } else {
    write_csv(os, {rec});
  }
}

inline const double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace detail

/// Sweep of every rate expression over a distortion grid; one row per point
/// (two when both joint-error modes are requested).
inline int cmd_curve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<double> points;
  SourceModel model{cfg.a, cfg.sigma_v2};
  ChannelSet channels{cfg.sigma_w2};
  try {
    model.validate();
    channels.validate();
    points = detail::grid_points(cfg);
  } catch (const std::invalid_argument& e) {
    err << "curve: " << e.what() << "\n";
    return kExitUsage;
  }
  const SteadyState ss = steady_state(model, channels);
  std::vector<JointMode> modes = {cfg.mode};
  if (cfg.mode_both) modes = {JointMode::kRiccati, JointMode::kFusion};

  bool any_infeasible = false;
  std::vector<Record> rows;
  for (double request : points) {
    for (JointMode mode : modes) {
      const detail::ClampedTarget target =
          detail::clamp_target(request, detail::feasibility_window(ss, mode));
      Record row;
      detail::add_model_columns(row, cfg);
      row.add_text("mode", to_string(mode));
      row.add_text("unit", to_string(cfg.unit));
      row.add("d_request", request);
      row.add("d", target.d);
      if (target.status == "infeasible") {
        any_infeasible = true;
        row.add("R_direct", detail::kNan);
        row.add("R_remote", detail::kNan);
        row.add("R_ceo", detail::kNan);
        row.add("R_wf", detail::kNan);
        row.add("loss_lhs", detail::kNan);
        row.add("loss_rhs", detail::kNan);
        row.add_bool("condition_holds", false);
      } else {
        RdfQuery q{model, channels, target.d, mode, cfg.unit};
        const LossReport loss = loss_bound(q);
        row.add("R_direct", direct_rdf(q));
        row.add("R_remote", remote_rdf(q));
        row.add("R_ceo", ceo_rdf(q).rate);
        row.add("R_wf", waterfilling(q).rate);
        row.add("loss_lhs", loss.lhs);
        row.add("loss_rhs", loss.rhs);
        row.add_bool("condition_holds", loss.condition_holds);
      }
      row.add_text("status", target.status);
      rows.push_back(std::move(row));
    }
  }
  detail::write_rows(out, cfg, rows);
  return any_infeasible ? kExitInfeasible : kExitOk;
}

/// Full allocation report at a single distortion: the optimal per-channel
/// split, the waterfilling level, the quantizer noises that realize it, and
/// the loss-bound check.
inline int cmd_allocate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SourceModel model{cfg.a, cfg.sigma_v2};
  ChannelSet channels{cfg.sigma_w2};
  try {
    model.validate();
    channels.validate();
    if (cfg.has_grid) throw std::invalid_argument("takes a single --d, not a grid");
    if (!cfg.d) throw std::invalid_argument("needs --d");
  } catch (const std::invalid_argument& e) {
    err << "allocate: " << e.what() << "\n";
    return kExitUsage;
  }
  const SteadyState ss = steady_state(model, channels);
  const detail::ClampedTarget target =
      detail::clamp_target(*cfg.d, detail::feasibility_window(ss, cfg.mode));
  const std::size_t K = channels.size();

  Record rec;
  detail::add_model_columns(rec, cfg);
  rec.add_text("mode", to_string(cfg.mode));
  rec.add_text("unit", to_string(cfg.unit));
  rec.add("d_request", *cfg.d);
  rec.add("d", target.d);
  if (target.status == "infeasible") {
    const std::vector<double> nans(K, detail::kNan);
    rec.add("R_direct", detail::kNan);
    rec.add("R_remote", detail::kNan);
    rec.add("R_ceo", detail::kNan);
    rec.add("R_wf", detail::kNan);
    rec.add("lambda", detail::kNan);
    rec.add("base_rate", detail::kNan);
    rec.add_array("d_k", nans);
    rec.add_array("rho_k", nans);
    rec.add_array("rate_term", nans);
    rec.add_array("sigma_z2", nans);
    rec.add_int_array("active", std::vector<long long>(K, 0));
    rec.add("loss_lhs", detail::kNan);
    rec.add("loss_rhs", detail::kNan);
    rec.add_bool("condition_holds", false);
    rec.add_text("status", target.status);
    detail::write_one(out, cfg, rec);
    return kExitInfeasible;
  }

  RdfQuery q{model, channels, target.d, cfg.mode, cfg.unit};
  const RdfResult ceo = ceo_rdf(q);
  const RdfResult wf = waterfilling(q);
  const LossReport loss = loss_bound(q);
  std::vector<double> sigma_z2;
  std::vector<long long> active;
  for (std::size_t k = 0; k < K; ++k) {
    active.push_back(ceo.alloc.rate_terms[k] > 1e-12 ? 1 : 0);
    try {
      sigma_z2.push_back(sigma_z2_from_dk(ss, k, ceo.alloc.d_k[k]));
    } catch (const std::domain_error&) {
      // Zero-rate boundary: the branch needs no transmission at all.
      sigma_z2.push_back(std::numeric_limits<double>::infinity());
    }
  }
  rec.add("R_direct", direct_rdf(q));
  rec.add("R_remote", remote_rdf(q));
  rec.add("R_ceo", ceo.rate);
  rec.add("R_wf", wf.rate);
  rec.add("lambda", wf.alloc.lambda);
  rec.add("base_rate", ceo.alloc.base_rate);
  rec.add_array("d_k", ceo.alloc.d_k);
  rec.add_array("rho_k", ceo.alloc.rho_k);
  rec.add_array("rate_term", ceo.alloc.rate_terms);
  rec.add_array("sigma_z2", sigma_z2);
  rec.add_int_array("active", active);
  rec.add("loss_lhs", loss.lhs);
  rec.add("loss_rhs", loss.rhs);
  rec.add_bool("condition_holds", loss.condition_holds);
  rec.add_text("status", target.status);
  detail::write_one(out, cfg, rec);
  return kExitOk;
}

/// Plans the allocation for the requested distortion, calibrates the test
/// channels, runs the closed loop, and reports predicted vs empirical error.
/// Exits nonzero when the two disagree by more than four standard errors.
inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SourceModel model{cfg.a, cfg.sigma_v2};
  ChannelSet channels{cfg.sigma_w2};
  try {
    model.validate();
    channels.validate();
    if (cfg.has_grid) throw std::invalid_argument("takes a single --d, not a grid");
    if (!cfg.d) throw std::invalid_argument("needs --d");
    if (cfg.mode_both) throw std::invalid_argument("needs a single mode");
    if (cfg.trials < 2 || cfg.steps < 1 || cfg.threads < 1) {
      throw std::invalid_argument("needs trials >= 2, steps >= 1, threads >= 1");
    }
  } catch (const std::invalid_argument& e) {
    err << "simulate: " << e.what() << "\n";
    return kExitUsage;
  }
  const SteadyState ss = steady_state(model, channels);
  const detail::ClampedTarget target =
      detail::clamp_target(*cfg.d, detail::feasibility_window(ss, cfg.mode));
  if (target.status == "infeasible") {
    err << "simulate: distortion target is infeasible\n";
    return kExitInfeasible;
  }

  RdfQuery q{model, channels, target.d, cfg.mode, cfg.unit};
  const RdfResult ceo = ceo_rdf(q);
  std::vector<double> sigma_z2;
  for (std::size_t k = 0; k < channels.size(); ++k) {
    try {
      sigma_z2.push_back(sigma_z2_from_dk(ss, k, ceo.alloc.d_k[k]));
    } catch (const std::domain_error&) {
      sigma_z2.push_back(std::numeric_limits<double>::infinity());
    }
  }
  SimOptions opt;
  opt.trials = cfg.trials;
  opt.steps = cfg.steps;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  const SimReport rep = simulate(model, channels, sigma_z2, opt);
  double scheme = detail::kNan;
  try {
    scheme = scheme_rate(ss, sigma_z2, cfg.unit).rate;
  } catch (const std::exception&) {
    // Undefined for silent channels on nonstationary sources; leave as nan.
  }
  const bool within =
      std::abs(rep.empirical_mse - rep.predicted_mmse) <= 4.0 * rep.std_error;

  Record rec;
  detail::add_model_columns(rec, cfg);
  rec.add_text("mode", to_string(cfg.mode));
  rec.add_text("unit", to_string(cfg.unit));
  rec.add("d_request", *cfg.d);
  rec.add("d", target.d);
  rec.add_int("seed", static_cast<long long>(cfg.seed));
  rec.add_int("trials", rep.trials);
  rec.add_int("steps", rep.steps);
  // Thread count is deliberately not echoed: the output must be identical
  // for any parallelism setting, so nothing thread-dependent may appear.
  rec.add_int("burn_in", rep.burn_in);
  rec.add_array("d_k", ceo.alloc.d_k);
  rec.add_array("sigma_z2", sigma_z2);
  rec.add("R_ceo", ceo.rate);
  rec.add("scheme_rate", scheme);
  rec.add("predicted_mmse", rep.predicted_mmse);
  rec.add("empirical_mse", rep.empirical_mse);
  rec.add("std_error", rep.std_error);
  rec.add_bool("within_4se", within);
  rec.add_text("status", target.status);
  detail::write_one(out, cfg, rec);
  return within ? kExitOk : kExitDisagreement;
}

/// Evaluates the finite-alphabet bound for a system description file,
/// honoring threshold/block-length overrides from the command line.
inline int cmd_bt_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.system_path.empty()) {
    err << "bt-eval: needs --spec <file>\n";
    return kExitUsage;
  }
  finite::ParsedSystem parsed;
  try {
    parsed = finite::load_system(cfg.system_path);
  } catch (const finite::ParseError& e) {
    err << "bt-eval: " << e.what() << "\n";
    return kExitUsage;
  }
  finite::CodeParams params = parsed.params;
  if (cfg.n_override) params.n = *cfg.n_override;
  for (auto& row : params.alpha) {
    for (double& v : row) v = cfg.alpha_override.value_or(v);
  }
  for (auto& row : params.beta) {
    for (double& v : row) v = cfg.beta_override.value_or(v);
  }
  if (!cfg.perm.empty()) params.pi = cfg.perm;

  finite::BtBoundReport rep;
  double sharp = 0.0;
  try {
    rep = evaluate_bt_bound(parsed.system, params);
    sharp = evaluate_bt_sharp(parsed.system, params);
  } catch (const std::invalid_argument& e) {
    err << "bt-eval: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "bt-eval: " << e.what() << "\n";
    return kExitInfeasible;
  }

  auto flatten_ll = [](const std::vector<std::vector<long long>>& m) {
    std::vector<long long> flat;
    for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
    return flat;
  };
  auto flatten_d = [](const std::vector<std::vector<double>>& m) {
    std::vector<double> flat;
    for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
    return flat;
  };
  Record rec;
  rec.add_text("file", cfg.system_path);
  rec.add_int("t", parsed.system.horizon());
  rec.add_int("K", parsed.system.observers());
  rec.add_int("n", params.n);
  rec.add_int("outcomes", static_cast<long long>(rep.outcomes));
  rec.add_int_array("L", flatten_ll(params.L));
  rec.add_int_array("M", flatten_ll(params.M));
  rec.add_array("alpha", flatten_d(params.alpha));
  rec.add_array("beta", flatten_d(params.beta));
  rec.add_array("d", params.d);
  rec.add_int_array("perm",
                    std::vector<long long>(params.pi.begin(), params.pi.end()));
  rec.add("prob_dist", rep.prob_dist);
  rec.add("prob_iota", rep.prob_iota);
  rec.add("prob_jmath", rep.prob_jmath);
  rec.add("prob_event", rep.prob_event);
  rec.add("gamma", rep.gamma);
  rec.add("epsilon_bound", rep.epsilon_bound);
  rec.add("sharp_success_bound", sharp);
  rec.add_text("status", "ok");
  detail::write_one(out, cfg, rec);
  return kExitOk;
}

/// Runs the built-in verification suites and prints per-suite counts.
inline int cmd_selftest(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.suite.empty()) {
    const auto& names = selftest::suite_names();
    if (std::find(names.begin(), names.end(), cfg.suite) == names.end()) {
      err << "selftest: unknown suite '" << cfg.suite << "'; available:";
      for (const std::string& n : names) err << " " << n;
      err << "\n";
      return kExitUsage;
    }
  }
  const std::vector<selftest::SuiteResult> results =
      selftest::run(cfg.seed, cfg.suite);
  long long failures = 0;
  std::vector<Record> rows;
  for (const selftest::SuiteResult& r : results) {
    failures += r.failures;
    Record row;
    row.add_text("suite", r.name);
    row.add_int("checks", r.checks);
    row.add_int("failures", r.failures);
    row.add_int("seed", static_cast<long long>(cfg.seed));
    row.add_text("status", r.failures == 0 ? "ok" : "fail");
    row.add_text("note", r.first_failure);
    rows.push_back(std::move(row));
  }
  detail::write_rows(out, cfg, rows);
  return failures == 0 ? kExitOk : kExitSelftestFailure;
}

/// Dispatches a resolved config to its subcommand.
inline int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.subcommand == "curve") return cmd_curve(cfg, out, err);
  if (cfg.subcommand == "allocate") return cmd_allocate(cfg, out, err);
  if (cfg.subcommand == "simulate") return cmd_simulate(cfg, out, err);
  if (cfg.subcommand == "bt-eval") return cmd_bt_eval(cfg, out, err);
  if (cfg.subcommand == "selftest") return cmd_selftest(cfg, out, err);
  err << "unknown subcommand '" << cfg.subcommand << "'\n";
  return kExitUsage;
}

}  // namespace ceorate
