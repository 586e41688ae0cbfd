// Acceptance gate for the whole toolkit: thirteen end-to-end checks, each
// reported as a single [PASS]/[FAIL] line with its runtime.  Tolerances are
// pinned here, next to the checks they govern, and the process exits
// nonzero if any line fails.
//
// Reference values come from the same independent sources as the unit
// suites: hand algebra for the memoryless pair, fixed-point iteration and
// the exhaustive grid search in grid_oracle.hpp for the solver, Monte Carlo
// for the finite-alphabet event probability, and exact identities (chain
// rules, permutation sums, region agreement) for the rest.

#include <cmath>
#include <cstdio>

#include <chrono>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ceorate/cli.hpp"
#include "grid_oracle.hpp"

namespace {

using namespace ceorate;
using finite::Axis;
using finite::BtSystem;
using finite::CausalKernel;
using finite::CodeParams;
using finite::KernelStep;
using finite::Pmf;
using finite::ProcessRef;

int g_failures = 0;

/// Check collector for one criterion: remembers the first failing condition
/// so the summary line can say what went wrong.
struct Gate {
  bool ok = true;
  std::string note;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) note = what;
      ok = false;
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os << what << ": got " << got << ", want " << want << " +/- " << tol;
    require(std::isfinite(got) && std::abs(got - want) <= tol, os.str());
  }
  void le(double lhs, double rhs, double slack, const std::string& what) {
    std::ostringstream os;
    os << what << ": " << lhs << " > " << rhs << " + " << slack;
    require(lhs <= rhs + slack, os.str());
  }
};

void run_criterion(int index, const char* title,
                   const std::function<void(Gate&)>& body) {
  Gate gate;
  const auto start = std::chrono::steady_clock::now();
  body(gate);
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  if (!gate.ok) ++g_failures;
  std::printf("[%s] %02d %s (%.0f ms)%s%s\n", gate.ok ? "PASS" : "FAIL", index,
              title, ms, gate.ok ? "" : " -- ", gate.ok ? "" : gate.note.c_str());
  std::fflush(stdout);
}

// ------------------------------------------------------------
// Shared random-instance helpers (counter-based, reproducible).
// ------------------------------------------------------------

SourceModel random_model(std::uint64_t seed, std::uint64_t tag,
                         bool allow_unstable) {
  SourceModel m;
  const double u = CounterRng::uniform(seed, tag, 0);
  if (allow_unstable && CounterRng::uniform(seed, tag, 1) < 0.2) {
    m.a = u < 0.5 ? 1.1 : -1.1;
  } else {
    m.a = 1.9 * u - 0.95;
  }
  m.sigma_v2 = 0.2 + 2.0 * CounterRng::uniform(seed, tag, 2);
  return m;
}

ChannelSet random_channels(std::uint64_t seed, std::uint64_t tag,
                           std::size_t K) {
  std::vector<double> w(K);
  for (std::size_t k = 0; k < K; ++k) {
    w[k] = 0.3 + 3.0 * CounterRng::uniform(seed, tag, 10 + k);
  }
  return ChannelSet{w};
}

double random_target(const SteadyState& ss, JointMode mode, std::uint64_t seed,
                     std::uint64_t tag) {
  const double lo = ss.joint_mmse(mode);
  const double hi = std::isinf(ss.sigma_x2.variance())
                        ? 4.0 * lo
                        : 0.3 * ss.sigma_x2.variance() +
                              0.7 * lo;
  const double u = CounterRng::uniform(seed, tag, 20);
  return lo + (0.1 + 0.8 * u) * (hi - lo);
}

// Random finite-alphabet builders, mirroring the unit-suite idioms.

std::vector<double> random_probs(std::size_t n, std::uint64_t seed,
                                 std::uint64_t tag) {
  std::vector<double> p(n);
  long double sum = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = 0.25 - std::log(CounterRng::uniform(seed, tag, i));
    sum += p[i];
  }
  for (double& v : p) v = static_cast<double>(v / sum);
  return p;
}

Pmf random_pmf(std::vector<Axis> axes, std::uint64_t seed, std::uint64_t tag) {
  std::size_t n = 1;
  for (const Axis& ax : axes) n *= static_cast<std::size_t>(ax.card);
  return Pmf(std::move(axes), random_probs(n, seed, tag));
}

KernelStep random_step(Axis target, std::vector<Axis> given, std::uint64_t seed,
                       std::uint64_t tag) {
  KernelStep step;
  step.target = std::move(target);
  step.given = std::move(given);
  std::size_t rows = 1;
  for (const Axis& g : step.given) rows *= static_cast<std::size_t>(g.card);
  const std::size_t cols = static_cast<std::size_t>(step.target.card);
  step.table.resize(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::vector<double> row = random_probs(cols, seed, tag * 1000 + r);
    for (std::size_t u = 0; u < cols; ++u) step.table[r * cols + u] = row[u];
  }
  return step;
}

BtSystem random_system(int t, int K, std::uint64_t seed) {
  std::vector<Axis> src;
  for (int i = 1; i <= t; ++i) {
    src.push_back(Axis{"x", i, 0, 2});
    for (int k = 1; k <= K; ++k) src.push_back(Axis{"y", i, k, 2});
  }
  BtSystem sys;
  sys.source = random_pmf(src, seed, 1);
  for (int k = 1; k <= K; ++k) {
    CausalKernel enc;
    for (int i = 1; i <= t; ++i) {
      std::vector<Axis> given;
      for (int j = 1; j <= i; ++j) given.push_back(Axis{"y", j, k, 2});
      for (int j = 1; j < i; ++j) given.push_back(Axis{"u", j, k, 2});
      enc.steps.push_back(random_step(
          Axis{"u", i, k, 2}, std::move(given), seed,
          100 * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(i)));
    }
    sys.encoders.push_back(std::move(enc));
  }
  for (int i = 1; i <= t; ++i) {
    std::vector<Axis> given;
    for (int j = 1; j <= i; ++j) {
      for (int k = 1; k <= K; ++k) given.push_back(Axis{"u", j, k, 2});
    }
    sys.decoder.steps.push_back(random_step(Axis{"xhat", i, 0, 2},
                                            std::move(given), seed,
                                            900 + static_cast<std::uint64_t>(i)));
  }
  return sys;
}

CodeParams random_params(int t, int K, std::uint64_t seed, std::uint64_t tag) {
  CodeParams params;
  params.n = 1;
  params.L.assign(static_cast<std::size_t>(t),
                  std::vector<long long>(static_cast<std::size_t>(K)));
  params.M = params.L;
  params.alpha.assign(static_cast<std::size_t>(t),
                      std::vector<double>(static_cast<std::size_t>(K)));
  params.beta = params.alpha;
  params.d.resize(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) {
    for (int k = 0; k < K; ++k) {
      const std::uint64_t c = static_cast<std::uint64_t>(i * K + k);
      const double u = CounterRng::uniform(seed, tag, 30 + c);
      const long long l = 1LL << static_cast<int>(3.0 * u);
      params.L[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = l;
      params.M[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          std::max(1LL, static_cast<long long>(std::ceil(
                            static_cast<double>(l) *
                            CounterRng::uniform(seed, tag, 60 + c))));
      params.alpha[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          2.0 * CounterRng::uniform(seed, tag, 90 + c) - 1.0;
      params.beta[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          2.0 * CounterRng::uniform(seed, tag, 120 + c) - 1.0;
    }
    params.d[static_cast<std::size_t>(i)] =
        0.25 + 0.5 * CounterRng::uniform(seed, tag,
                                         150 + static_cast<std::uint64_t>(i));
  }
  for (int k = 1; k <= K; ++k) params.pi.push_back(k);
  params.sd = {0.0, 1.0, 1.0, 0.0};
  return params;
}

Pmf region_joint(int K, std::uint64_t seed) {
  std::vector<Axis> axes;
  for (int k = 1; k <= K; ++k) axes.push_back(Axis{"y", 1, k, 2});
  Pmf joint = random_pmf(axes, seed, 1);
  for (int k = 1; k <= K; ++k) {
    joint = extend(joint, random_step(Axis{"u", 1, k, 2}, {Axis{"y", 1, k, 2}},
                                      seed, 20 + static_cast<std::uint64_t>(k)));
  }
  return joint;
}

// ------------------------------------------------------------
// Criteria
// ------------------------------------------------------------

// Two equal unit-noise observers of a memoryless unit-variance source at
// distortion one half: sum rate (3/2) log 2 with per-channel targets 2/3,
// computed well under the latency budget.
void criterion_01(Gate& g) {
  const SourceModel m{0.0, 1.0};
  const ChannelSet ch{{1.0, 1.0}};
  const auto start = std::chrono::steady_clock::now();
  const RdfResult res =
      ceo_rdf({m, ch, 0.5, JointMode::kRiccati, RateUnit::kNats});
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  g.near(res.rate, 1.5 * std::numbers::ln2, 1e-8, "sum rate");
  g.near(res.alloc.d_k[0], 2.0 / 3.0, 1e-8, "d_1");
  g.near(res.alloc.d_k[1], 2.0 / 3.0, 1e-8, "d_2");
  g.require(ms < 50.0, "solver exceeded 50 ms");
}

// Same instance: the cooperation loss equals (K-1) times the remote-coding
// loss, both one half log 2, and the sufficient condition is reported true.
void criterion_02(Gate& g) {
  const RdfQuery q{{0.0, 1.0}, ChannelSet{{1.0, 1.0}}, 0.5,
                   JointMode::kRiccati, RateUnit::kNats};
  const double direct = direct_rdf(q);
  const double remote = remote_rdf(q);
  const double ceo = ceo_rdf(q).rate;
  g.near(ceo - remote, 0.5 * std::numbers::ln2, 1e-9, "ceo - remote");
  g.near(remote - direct, 0.5 * std::numbers::ln2, 1e-9, "remote - direct");
  const LossReport loss = loss_bound(q);
  g.require(loss.condition_holds, "loss-bound condition");
  g.near(loss.lhs, loss.rhs, 1e-9, "loss bound at the symmetric instance");
}

// Rate ordering direct <= remote <= ceo <= waterfilling on 200 random
// feasible instances including unstable sources, with the symmetric
// instances also closing the ceo/waterfilling gap.
void criterion_03(Gate& g) {
  const std::uint64_t seed = 9300;
  for (int trial = 0; trial < 200; ++trial) {
    const auto tag = static_cast<std::uint64_t>(trial);
    const SourceModel m = random_model(seed, tag, true);
    const std::size_t K = 1 + static_cast<std::size_t>(trial % 4);
    ChannelSet ch = random_channels(seed, tag, K);
    const bool symmetric = trial % 3 == 0;
    if (symmetric) {
      ch.sigma_w2.assign(K, ch.sigma_w2[0]);
    }
    const JointMode mode =
        trial % 2 == 0 ? JointMode::kRiccati : JointMode::kFusion;
    const SteadyState ss = steady_state(m, ch);
    const RdfQuery q{m, ch, random_target(ss, mode, seed, tag), mode,
                     RateUnit::kNats};
    const double direct = direct_rdf(q);
    const double remote = remote_rdf(q);
    const double ceo = ceo_rdf(q).rate;
    const double wf = waterfilling(q).rate;
    const std::string at = "trial " + std::to_string(trial);
    g.le(direct, remote, 1e-9, at + ": direct vs remote");
    g.le(remote, ceo, 1e-9, at + ": remote vs ceo");
    g.le(ceo, wf, 1e-9, at + ": ceo vs waterfilling");
    if (symmetric) {
      g.near(ceo, wf, 1e-6, at + ": symmetric ceo vs waterfilling");
    }
  }
}

// Lagrangian solver against the exhaustive grid oracle on 50 random
// instances with up to three channels, within the one-minute budget.
void criterion_04(Gate& g) {
  const std::uint64_t seed = 9400;
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 50; ++trial) {
    const auto tag = static_cast<std::uint64_t>(trial);
    const SourceModel m = random_model(seed, tag, true);
    const std::size_t K = 1 + static_cast<std::size_t>(trial % 3);
    const ChannelSet ch = random_channels(seed, tag, K);
    const JointMode mode =
        trial % 2 == 0 ? JointMode::kRiccati : JointMode::kFusion;
    const SteadyState ss = steady_state(m, ch);
    const double d = random_target(ss, mode, seed, tag);
    const double solver =
        ceo_rdf({m, ch, d, mode, RateUnit::kNats}).rate;
    const grid_oracle::OracleProblem problem =
        grid_oracle::causal_oracle_problem(m.a, m.sigma_v2, ch.sigma_w2, d,
                                           mode == JointMode::kFusion);
    const double oracle = grid_oracle::oracle_min_rate(problem).rate;
    g.near(solver, oracle, 1e-4, "trial " + std::to_string(trial));
  }
  const double sec = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  g.require(sec < 60.0, "oracle comparison exceeded 60 s");
}

// Closed-form per-channel steady states against ten-thousand-step
// fixed-point iteration, plus the quadratic-root worked value.
void criterion_05(Gate& g) {
  const double worked = steady_state_mmse({0.5, 1.0}, 1.0).p;
  g.near(worked, (std::sqrt(65.0) - 7.0) / 2.0, 1e-12, "worked value");
  const std::uint64_t seed = 9500;
  for (int trial = 0; trial < 100; ++trial) {
    const auto tag = static_cast<std::uint64_t>(trial);
    const SourceModel m = random_model(seed, tag, true);
    const double c = 0.2 + 3.0 * CounterRng::uniform(seed, tag, 5);
    const RiccatiResult closed = steady_state_mmse(m, c);
    double p = m.sigma_v2;
    double q = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const RiccatiResult step = riccati_step(p, m, c);
      q = step.q;
      p = step.p;
    }
    const std::string at = "trial " + std::to_string(trial);
    g.near(closed.p, p, 1e-10 * std::max(1.0, std::abs(p)), at + ": filtered");
    g.near(closed.q, q, 1e-10 * std::max(1.0, std::abs(q)), at + ": predicted");
  }
}

// The two joint-error conventions at the pinned two-channel instance, and
// their exact agreement for memoryless sources.
void criterion_06(Gate& g) {
  const SteadyState pinned =
      steady_state({0.5, 1.0}, ChannelSet{{1.0, 1.0}});
  g.near(pinned.s_joint_riccati, 0.342330, 1e-5, "jointly filtered error");
  g.near(pinned.s_joint_fusion, 0.331612, 1e-5, "precision-additive error");
  const std::uint64_t seed = 9600;
  for (int trial = 0; trial < 100; ++trial) {
    const auto tag = static_cast<std::uint64_t>(trial);
    SourceModel m = random_model(seed, tag, false);
    m.a = 0.0;
    const std::size_t K = 1 + static_cast<std::size_t>(trial % 4);
    const SteadyState ss = steady_state(m, random_channels(seed, tag, K));
    g.near(ss.s_joint_riccati, ss.s_joint_fusion, 1e-12,
           "memoryless gap, trial " + std::to_string(trial));
  }
}

// The two closed forms of the remote rate-distortion function agree to
// relative 1e-12 on random instances.
void criterion_07(Gate& g) {
  const std::uint64_t seed = 9700;
  for (int trial = 0; trial < 100; ++trial) {
    const auto tag = static_cast<std::uint64_t>(trial);
    const SourceModel m = random_model(seed, tag, true);
    const std::size_t K = 1 + static_cast<std::size_t>(trial % 4);
    const ChannelSet ch = random_channels(seed, tag, K);
    const JointMode mode =
        trial % 2 == 0 ? JointMode::kRiccati : JointMode::kFusion;
    const SteadyState ss = steady_state(m, ch);
    const RdfQuery q{m, ch, random_target(ss, mode, seed, tag), mode,
                     RateUnit::kNats};
    const double a = remote_rdf(q);
    const double b = remote_rdf_alt(q);
    g.near(a, b, 1e-12 * std::max(1.0, std::abs(b)),
           "trial " + std::to_string(trial));
  }
}

// Symmetric sum rates approach the many-observer limit from above at rate
// O(1/K), monotonically, for the memoryless unit instance.
void criterion_08(Gate& g) {
  const SourceModel m{0.0, 1.0};
  const RdfQuery probe{m, ChannelSet{{1.0, 1.0}}, 0.5, JointMode::kRiccati,
                       RateUnit::kNats};
  const double limit = large_k_limit(probe);
  g.near(limit, 0.846574, 1e-6, "many-observer limit");
  double prev_diff = std::numeric_limits<double>::infinity();
  double bound_c = 0.0;
  for (int K = 2; K <= 256; ++K) {
    const ChannelSet ch{std::vector<double>(static_cast<std::size_t>(K), 1.0)};
    const RdfQuery q{m, ch, 0.5, JointMode::kRiccati, RateUnit::kNats};
    const double diff = std::abs(ceo_rdf_symmetric(q).rate - limit);
    const std::string at = "K = " + std::to_string(K);
    g.require(diff < prev_diff, at + ": gap failed to shrink");
    if (K == 2) bound_c = 2.0 * diff;  // witness constant for the O(1/K) decay
    g.le(diff, bound_c / K, 0.0, at + ": gap above C/K");
    prev_diff = diff;
  }
}

// Directed-information chain rules and decoding-order rate sums on random
// finite-alphabet instances, inside the time budget.
void criterion_09(Gate& g) {
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t seed = 9900 + static_cast<std::uint64_t>(trial);
    const int t = 1 + trial % 3;
    const int card = 2 + (trial / 3) % 2;
    std::vector<Axis> axes;
    ProcessRef x, y, z;
    for (int i = 1; i <= t; ++i) {
      x.axes.push_back(static_cast<int>(axes.size()));
      axes.push_back(Axis{"x", i, 0, card});
      y.axes.push_back(static_cast<int>(axes.size()));
      axes.push_back(Axis{"y", i, 0, card});
      z.axes.push_back(static_cast<int>(axes.size()));
      axes.push_back(Axis{"z", i, 0, card});
    }
    const Pmf joint = random_pmf(axes, seed, 4);
    ProcessRef xy;
    xy.axes = x.axes;
    xy.axes.insert(xy.axes.end(), y.axes.begin(), y.axes.end());
    ProcessRef yz;
    yz.axes = y.axes;
    yz.axes.insert(yz.axes.end(), z.axes.begin(), z.axes.end());
    ProcessRef z_delayed = z;
    z_delayed.delayed = true;

    const std::string at = "trial " + std::to_string(trial);
    const double lhs1 = causally_conditioned_di(joint, xy, z);
    const double rhs1 = causally_conditioned_di(joint, x, z) +
                        causally_conditioned_di(joint, y, z, {x});
    g.near(lhs1, rhs1, 1e-10, at + ": source split");
    const double lhs2 = causally_conditioned_di(joint, x, yz);
    const double rhs2 = causally_conditioned_di(joint, x, y, {z_delayed}) +
                        causally_conditioned_di(joint, x, z, {y});
    g.near(lhs2, rhs2, 1e-10, at + ": target split");

    // Both decoding orders of a two-observer system split the same total.
    const BtSystem sys = random_system(1 + trial % 2, 2, seed);
    double sums[2] = {0.0, 0.0};
    int slot = 0;
    for (const std::vector<int>& pi : {std::vector<int>{1, 2},
                                       std::vector<int>{2, 1}}) {
      for (double r : achievable_rates(sys, pi)) {
        g.le(-r, 0.0, 1e-12, at + ": negative rate");
        sums[slot] += r;
      }
      ++slot;
    }
    g.near(sums[0], sums[1], 1e-10, at + ": permutation sums");
  }
  const double sec = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  g.require(sec < 30.0, "identity sweep exceeded 30 s");
}

// Finite-blocklength bounds: the exact toy constant, sharp-vs-weak
// dominance on random instances, and Monte Carlo agreement for the exact
// event probability.
void criterion_10(Gate& g) {
  CodeParams toy = random_params(1, 1, 1, 0);
  toy.L = {{1}};
  toy.M = {{1}};
  toy.alpha = {{0.0}};
  toy.beta = {{0.0}};
  g.require(bt_gamma(toy, 1, 1) == 0.75, "toy gamma is not exactly 3/4");

  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t seed = 10000 + static_cast<std::uint64_t>(trial);
    const int K = 1 + trial % 2;
    const BtSystem sys = random_system(1, K, seed);
    const CodeParams params = random_params(1, K, seed, 7);
    const finite::BtBoundReport weak = evaluate_bt_bound(sys, params);
    const double sharp = evaluate_bt_sharp(sys, params);
    g.le(1.0 - weak.epsilon_bound, sharp, 1e-12,
         "trial " + std::to_string(trial) + ": sharp below weak");
  }

  const BtSystem sys = random_system(1, 2, 777);
  const CodeParams params = random_params(1, 2, 777, 7);
  const double exact = evaluate_bt_bound(sys, params).prob_event;
  const finite::McEstimate mc =
      mc_event_probability(sys, params, 1000000, 2026);
  g.require(mc.trials == 1000000, "trial count");
  g.near(mc.p_hat, exact, 4.0 * std::max(mc.std_error, 1e-12),
         "Monte Carlo event probability");
}

// The sampled and corner-generated descriptions of the single-letter rate
// region agree on at least a thousand off-boundary points for two and
// three observers.
void criterion_11(Gate& g) {
  for (int K = 2; K <= 3; ++K) {
    long long tested = 0;
    for (int round = 0; tested < 1000 && round < 20; ++round) {
      const std::uint64_t seed =
          11000 + 100 * static_cast<std::uint64_t>(K) +
          static_cast<std::uint64_t>(round);
      const Pmf joint = region_joint(K, seed);
      std::vector<int> ys, us;
      for (int k = 1; k <= K; ++k) {
        ys.push_back(joint.find_axis("y", 1, k));
        us.push_back(joint.find_axis("u", 1, k));
      }
      const finite::RegionReport report =
          region_equivalence(joint, ys, us, 200, seed);
      tested += report.tested;
      g.require(report.all_agree,
                "membership mismatch, K = " + std::to_string(K) + " round " +
                    std::to_string(round));
    }
    g.require(tested >= 1000,
              "fewer than 1000 points tested for K = " + std::to_string(K));
  }
}

// The planned memoryless scheme realizes its target exactly in the decoder
// filter and empirically over a million simulated samples, quickly.
void criterion_12(Gate& g) {
  const auto start = std::chrono::steady_clock::now();
  const SourceModel m{0.0, 1.0};
  const ChannelSet ch{{1.0, 1.0}};
  const SteadyState ss = steady_state(m, ch);
  const RdfResult plan =
      ceo_rdf({m, ch, 0.5, JointMode::kRiccati, RateUnit::kNats});
  std::vector<double> sigma_z2;
  for (std::size_t k = 0; k < ch.size(); ++k) {
    sigma_z2.push_back(sigma_z2_from_dk(ss, k, plan.alloc.d_k[k]));
  }
  g.near(exact_decoder_mmse(build_augmented(m, ch), sigma_z2), 0.5, 1e-9,
         "exact decoder error");

  SimOptions opt;
  opt.trials = 2000;
  opt.steps = 500;  // 10^6 recorded samples in total
  opt.seed = 12;
  const SimReport rep = simulate(m, ch, sigma_z2, opt);
  g.near(rep.empirical_mse, 0.5, 4.0 * rep.std_error, "empirical error");
  const double sec = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  g.require(sec < 10.0, "simulation exceeded 10 s");
}

// Identical configurations and seeds reproduce identical output bytes for
// the sweep and simulation commands, regardless of the thread count.
void criterion_13(Gate& g) {
  const auto run_once = [](RunConfig cfg) {
    std::ostringstream out, err;
    run_command(cfg, out, err);
    return out.str();
  };

  RunConfig sim;
  sim.subcommand = "simulate";
  sim.a = 0.6;
  sim.sigma_v2 = 1.0;
  sim.sigma_w2 = {1.0, 2.0};
  sim.d = 0.6;
  sim.seed = 99;
  sim.trials = 60;
  sim.steps = 200;
  sim.threads = 1;
  const std::string serial = run_once(sim);
  sim.threads = 4;
  const std::string sharded = run_once(sim);
  sim.threads = 4;
  const std::string again = run_once(sim);
  g.require(serial == sharded, "simulate bytes changed with thread count");
  g.require(sharded == again, "simulate bytes changed between runs");
  g.require(!serial.empty(), "simulate produced no output");

  RunConfig curve;
  curve.subcommand = "curve";
  curve.a = 0.6;
  curve.sigma_v2 = 1.0;
  curve.sigma_w2 = {1.0, 2.0};
  curve.d.reset();
  detail::parse_grid("0.45:1.4:19", curve);
  const std::string first = run_once(curve);
  const std::string second = run_once(curve);
  g.require(first == second, "curve bytes changed between runs");
  g.require(!first.empty(), "curve produced no output");
}

}  // namespace

int main() {
  run_criterion(1, "memoryless pair matches the closed-form allocation",
                criterion_01);
  run_criterion(2, "cooperation loss equals the remote-coding loss",
                criterion_02);
  run_criterion(3, "rate ordering holds on random instances", criterion_03);
  run_criterion(4, "solver agrees with the exhaustive grid oracle",
                criterion_04);
  run_criterion(5, "steady states match long fixed-point iteration",
                criterion_05);
  run_criterion(6, "joint-error conventions hit their pinned values",
                criterion_06);
  run_criterion(7, "remote rate closed forms agree", criterion_07);
  run_criterion(8, "symmetric rates approach the many-observer limit",
                criterion_08);
  run_criterion(9, "chain rules and decoding-order sums hold", criterion_09);
  run_criterion(10, "finite-blocklength bounds verify exactly and by sampling",
                criterion_10);
  run_criterion(11, "region descriptions agree on sampled points",
                criterion_11);
  run_criterion(12, "simulated scheme realizes its planned distortion",
                criterion_12);
  run_criterion(13, "outputs are byte-stable across runs and thread counts",
                criterion_13);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 13 criteria passed\n");
  return 0;
}
