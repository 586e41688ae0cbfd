// Unit tests for the tracking simulator.  The augmented closed-loop model is
// checked against Lyapunov moment identities, the decoder filter against
// closed-form memoryless values and the joint filtered error of the raw
// observation paths (which the noiseless transmissions determine exactly),
// test-channel calibration against the full augmented filter run on a single
// branch, and the Monte Carlo paths against the filter's own prediction.
#include "ceorate/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "ceorate/model.hpp"
#include "ceorate/rdf.hpp"
#include "ceorate/rng.hpp"

namespace {

using namespace ceorate;

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed point of S = F S F^T + Q, found by plain iteration with a test-local
// triple loop; independent of the sandwich helper inside the library.
std::vector<double> lyapunov_moments(const AugmentedModel& aug) {
  const auto n = static_cast<std::size_t>(aug.dim);
  std::vector<double> s = aug.q;
  for (int iter = 0; iter < 100000; ++iter) {
    std::vector<double> next(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            sum += aug.f[r * n + i] * s[i * n + j] * aug.f[c * n + j];
          }
        }
        next[r * n + c] = sum + aug.q[r * n + c];
      }
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) diff = std::max(diff, std::abs(next[i] - s[i]));
    s = std::move(next);
    if (diff < 1e-15) break;
  }
  return s;
}

// Random stable model and channel set, keyed by a counter seed.
struct RandomCase {
  SourceModel model;
  ChannelSet channels;
};

RandomCase random_case(std::uint64_t seed, std::size_t K, bool stable = true) {
  RandomCase rc;
  rc.model.a = stable ? 1.9 * CounterRng::uniform(seed, 1) - 0.95
                      : 1.0 + 0.4 * CounterRng::uniform(seed, 1);
  rc.model.sigma_v2 = 0.2 + 2.0 * CounterRng::uniform(seed, 2);
  for (std::size_t k = 0; k < K; ++k) {
    rc.channels.sigma_w2.push_back(0.3 + 3.0 * CounterRng::uniform(seed, 3, k));
  }
  return rc;
}

// ============================================================
// Test-channel calibration
// ============================================================

TEST(SigmaZ, MemorylessHandValue) {
  const SteadyState ss = steady_state({0.0, 1.0}, {{1.0, 1.0}});
  // s_k = 1/2 and bar_v = 1/2, so d_k = 2/3 needs m = 1/6 and
  // sigma_z2 = m bar_v / (bar_v - m) = (1/12) / (1/3) = 1/4.
  EXPECT_NEAR(sigma_z2_from_dk(ss, 0, 2.0 / 3.0), 0.25, 1e-15);
  EXPECT_NEAR(sigma_z2_from_dk(ss, 1, 2.0 / 3.0), 0.25, 1e-15);
}

TEST(SigmaZ, SingleBranchFilterRecoversDk) {
  // The decoder watching one branch alone has error s_k + (error about
  // Xbar_k), so running the full augmented filter on a K = 1 system must
  // reproduce the d_k the calibration was asked for -- for any pole.
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const RandomCase rc = random_case(seed, 1, seed % 3 != 0);
    const SteadyState ss = steady_state(rc.model, rc.channels);
    const double s = ss.ch[0].s;
    const double span = std::isinf(ss.sigma_x2.variance())
                            ? 5.0 * s
                            : ss.sigma_x2.variance() - s;
    const double d_k = s + (0.05 + 0.9 * CounterRng::uniform(seed, 7)) * span;
    const double sigma_z2 = sigma_z2_from_dk(ss, 0, d_k);
    const AugmentedModel aug = build_augmented(rc.model, rc.channels);
    EXPECT_NEAR(exact_decoder_mmse(aug, {sigma_z2}), d_k, 1e-9 * d_k) << "seed " << seed;
  }
}

TEST(SigmaZ, RejectsInfeasibleTargets) {
  const SteadyState ss = steady_state({0.5, 1.0}, {{1.0}});
  const double s = ss.ch[0].s;
  const double sigma_x2 = ss.sigma_x2.variance();
  EXPECT_THROW((void)sigma_z2_from_dk(ss, 0, s), std::domain_error);
  EXPECT_THROW((void)sigma_z2_from_dk(ss, 0, 0.9 * s), std::domain_error);
  EXPECT_THROW((void)sigma_z2_from_dk(ss, 0, sigma_x2), std::domain_error);
  EXPECT_THROW((void)sigma_z2_from_dk(ss, 0, 2.0 * sigma_x2), std::domain_error);
  EXPECT_THROW((void)sigma_z2_from_dk(ss, 1, 0.6), std::invalid_argument);
  // Approaching the endpoints from inside stays feasible.
  EXPECT_GT(sigma_z2_from_dk(ss, 0, s + 1e-9), 0.0);
  EXPECT_GT(sigma_z2_from_dk(ss, 0, sigma_x2 - 1e-9), 0.0);
}

TEST(SigmaZ, UnstableSourceAcceptsAnyTargetAboveSk) {
  // With |a| >= 1 the branch has no finite zero-rate error, so every
  // d_k > s_k is reachable by some quantizer noise.
  const SteadyState ss = steady_state({1.2, 1.0}, {{1.0}});
  const double s = ss.ch[0].s;
  double prev = 0.0;
  for (double d_k : {s + 0.1, s + 1.0, s + 10.0, s + 1000.0}) {
    const double sigma_z2 = sigma_z2_from_dk(ss, 0, d_k);
    EXPECT_GT(sigma_z2, prev);
    prev = sigma_z2;
  }
}

// ============================================================
// Augmented model
// ============================================================

TEST(Augmented, MemorylessHandMatrices) {
  const AugmentedModel aug = build_augmented({0.0, 1.0}, {{1.0, 1.0}});
  ASSERT_EQ(aug.dim, 3);
  ASSERT_EQ(aug.kappa.size(), 2u);
  EXPECT_DOUBLE_EQ(aug.kappa[0], 0.5);
  EXPECT_DOUBLE_EQ(aug.kappa[1], 0.5);
  for (double f : aug.f) EXPECT_DOUBLE_EQ(f, 0.0);
  // q = G diag(1, 1, 1) G^T with G rows (1,0,0), (1/2,1/2,0), (1/2,0,1/2).
  const std::vector<double> want = {1.0, 0.5,  0.5,   //
                                    0.5, 0.5,  0.25,  //
                                    0.5, 0.25, 0.5};
  ASSERT_EQ(aug.q.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(aug.q[i], want[i]);
}

TEST(Augmented, TransitionRowsFollowGains) {
  const SourceModel m{0.5, 1.0};
  const ChannelSet ch{{1.0, 4.0}};
  const SteadyState ss = steady_state(m, ch);
  const AugmentedModel aug = build_augmented(m, ch);
  const auto n = static_cast<std::size_t>(aug.dim);
  EXPECT_DOUBLE_EQ(aug.f[0], 0.5);
  for (std::size_t k = 0; k < 2; ++k) {
    const double kap = ss.ch[k].kappa;
    EXPECT_DOUBLE_EQ(aug.kappa[k], kap);
    EXPECT_DOUBLE_EQ(aug.f[(k + 1) * n], kap * 0.5);
    EXPECT_DOUBLE_EQ(aug.f[(k + 1) * n + (k + 1)], 0.5 * (1.0 - kap));
    EXPECT_DOUBLE_EQ(aug.g[(k + 1) * n], kap);
    EXPECT_DOUBLE_EQ(aug.g[(k + 1) * n + (k + 1)], kap);
  }
}

TEST(Augmented, LyapunovMomentsMatchSteadyState) {
  // Stationary second moments of (X, Xbar_1, ..., Xbar_K): the source has
  // variance sigma_x2, each estimate has variance sigma_x2 - s_k, and the
  // orthogonality of estimate and error forces Cov(X, Xbar_k) = Var(Xbar_k).
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const RandomCase rc = random_case(seed, 1 + seed % 3);
    const SteadyState ss = steady_state(rc.model, rc.channels);
    const AugmentedModel aug = build_augmented(rc.model, rc.channels);
    const auto n = static_cast<std::size_t>(aug.dim);
    const std::vector<double> mom = lyapunov_moments(aug);
    const double sigma_x2 = ss.sigma_x2.variance();
    EXPECT_NEAR(mom[0], sigma_x2, 1e-9 * sigma_x2) << "seed " << seed;
    for (std::size_t k = 1; k < n; ++k) {
      const double want = sigma_x2 - ss.ch[k - 1].s;
      EXPECT_NEAR(mom[k * n + k], want, 1e-9 * sigma_x2) << "seed " << seed;
      EXPECT_NEAR(mom[k], want, 1e-9 * sigma_x2) << "seed " << seed;
    }
  }
}

TEST(Augmented, EstimatesCorrelatePositivelyAcrossObservers) {
  const AugmentedModel aug = build_augmented({0.8, 1.0}, {{1.0, 2.0, 0.5}});
  const auto n = static_cast<std::size_t>(aug.dim);
  const std::vector<double> mom = lyapunov_moments(aug);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) EXPECT_GT(mom[j * n + k], 0.0);
  }
}

// ============================================================
// Decoder filter
// ============================================================

TEST(DecoderFilter, MemorylessHandValue) {
  // a = 0, unit noises, sigma_z2 = 1/4: each transmission is X + W_k + 2 Z_k
  // after scaling by 1/kappa = 2, an equivalent observation of X with noise
  // variance 1 + 4/4 = 2, so the decoder error is 1 / (1/1 + 2/2) = 1/2.
  const AugmentedModel aug = build_augmented({0.0, 1.0}, {{1.0, 1.0}});
  EXPECT_NEAR(exact_decoder_mmse(aug, {0.25, 0.25}), 0.5, 1e-12);
}

TEST(DecoderFilter, NoiselessLimitIsJointFilteredError) {
  // With sigma_z2 = 0 the decoder sees every Xbar_k path exactly, and each
  // Xbar_k path determines its Y_k path (kappa_k > 0 makes the update
  // invertible), so the error must equal the joint Kalman error on the raw
  // observations -- for stable and unstable poles alike.
  for (std::uint64_t seed = 200; seed < 240; ++seed) {
    const RandomCase rc = random_case(seed, 1 + seed % 3, seed % 4 != 0);
    const SteadyState ss = steady_state(rc.model, rc.channels);
    const AugmentedModel aug = build_augmented(rc.model, rc.channels);
    const std::vector<double> zeros(rc.channels.size(), 0.0);
    EXPECT_NEAR(exact_decoder_mmse(aug, zeros), ss.s_joint_riccati,
                1e-9 * ss.s_joint_riccati)
        << "seed " << seed;
  }
}

TEST(DecoderFilter, UselessChannelsLeaveThePrior) {
  const SourceModel m{0.7, 1.0};
  const SteadyState ss = steady_state(m, {{1.0, 2.0}});
  const AugmentedModel aug = build_augmented(m, {{1.0, 2.0}});
  const double sigma_x2 = ss.sigma_x2.variance();
  EXPECT_NEAR(exact_decoder_mmse(aug, {kInf, kInf}), sigma_x2, 1e-10 * sigma_x2);
}

TEST(DecoderFilter, IgnoredChannelReducesToSmallerSystem) {
  // Silencing channel 2 with infinite quantizer noise must reproduce the
  // one-channel decoder exactly.
  const SourceModel m{0.6, 0.8};
  const AugmentedModel both = build_augmented(m, {{1.0, 3.0}});
  const AugmentedModel solo = build_augmented(m, {{1.0}});
  const double got = exact_decoder_mmse(both, {0.4, kInf});
  const double want = exact_decoder_mmse(solo, {0.4});
  EXPECT_NEAR(got, want, 1e-11 * want);
}

TEST(DecoderFilter, ErrorGrowsWithQuantizerNoise) {
  const AugmentedModel aug = build_augmented({0.9, 0.5}, {{1.0, 1.0}});
  double prev = 0.0;
  for (double r : {0.0, 0.1, 0.5, 2.0, 10.0}) {
    const double mmse = exact_decoder_mmse(aug, {r, r});
    EXPECT_GT(mmse, prev);
    prev = mmse;
  }
}

TEST(DecoderFilter, GainsReproduceTheFilteredCovariance) {
  const AugmentedModel aug = build_augmented({0.5, 1.0}, {{1.0, 2.0}});
  const DecoderFilter filt = decoder_filter(aug, {0.3, 0.7});
  const auto n = static_cast<std::size_t>(aug.dim);
  ASSERT_EQ(filt.gains.size(), 2 * n);
  // The filtered covariance is one full update pass away from the predicted
  // one; both are steady, symmetric, and positive on the diagonal.
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_GT(filt.p_filt[i * n + i], 0.0);
    EXPECT_GT(filt.p_pred[i * n + i], filt.p_filt[i * n + i] - 1e-15);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_NEAR(filt.p_filt[i * n + j], filt.p_filt[j * n + i], 1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(filt.mmse, filt.p_filt[0]);
}

TEST(DecoderFilter, RejectsBadNoise) {
  const AugmentedModel aug = build_augmented({0.5, 1.0}, {{1.0, 2.0}});
  EXPECT_THROW((void)decoder_filter(aug, {0.3}), std::invalid_argument);
  EXPECT_THROW((void)decoder_filter(aug, {0.3, -0.1}), std::invalid_argument);
}

// ============================================================
// Fusion gap
// ============================================================

TEST(FusionGap, PinnedTwoChannelValues) {
  const SourceModel m{0.5, 1.0};
  const ChannelSet ch{{1.0, 1.0}};
  const FusionDiscrepancy rep = fusion_discrepancy(m, ch);
  // Closed forms: the joint filter at total precision 2, and the fusion
  // combination 1 / (2/s_1 - 3/4) of the per-channel errors.
  const SteadyState ss = steady_state(m, ch);
  EXPECT_DOUBLE_EQ(rep.joint_riccati, ss.s_joint_riccati);
  EXPECT_DOUBLE_EQ(rep.joint_fusion, ss.s_joint_fusion);
  EXPECT_NEAR(rep.joint_riccati, 0.342330, 1e-6);
  EXPECT_NEAR(rep.joint_fusion, 0.331612, 1e-6);
  EXPECT_NEAR(rep.decoder_limit, rep.joint_riccati, 1e-9);
  EXPECT_NEAR(rep.gap, 0.010716, 1e-6);
  EXPECT_GT(rep.gap, 0.0);
}

TEST(FusionGap, VanishesWithoutMemory) {
  for (std::uint64_t seed = 300; seed < 400; ++seed) {
    RandomCase rc = random_case(seed, 1 + seed % 4);
    rc.model.a = 0.0;
    const FusionDiscrepancy rep = fusion_discrepancy(rc.model, rc.channels);
    EXPECT_NEAR(rep.gap, 0.0, 1e-12) << "seed " << seed;
    EXPECT_NEAR(rep.joint_riccati, rep.joint_fusion, 1e-12) << "seed " << seed;
  }
}

// ============================================================
// Scheme rate
// ============================================================

TEST(SchemeRate, MemorylessHandValue) {
  const SteadyState ss = steady_state({0.0, 1.0}, {{1.0, 1.0}});
  const SchemeRate sr = scheme_rate(ss, {0.25, 0.25});
  ASSERT_EQ(sr.d_k.size(), 2u);
  EXPECT_NEAR(sr.d_k[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(sr.d_k[1], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(sr.d, 0.5, 1e-12);
  EXPECT_NEAR(sr.rate, 1.5 * kLn2, 1e-12);
  const SchemeRate bits = scheme_rate(ss, {0.25, 0.25}, RateUnit::kBits);
  EXPECT_NEAR(bits.rate, 1.5, 1e-12);
}

TEST(SchemeRate, RoundTripsThroughThePlanner) {
  // Solve the sum-rate problem, calibrate quantizer noises that realize the
  // allocation, and evaluate the running scheme: distortions and total rate
  // must come back unchanged.  Inactive channels are skipped -- their d_k
  // sits at the zero-rate boundary where no finite noise reaches.
  int tested = 0;
  for (std::uint64_t seed = 500; seed < 560; ++seed) {
    const RandomCase rc = random_case(seed, 1 + seed % 3, seed % 5 != 0);
    const SteadyState ss = steady_state(rc.model, rc.channels);
    RdfQuery q;
    q.model = rc.model;
    q.channels = rc.channels;
    q.mode = JointMode::kFusion;
    const double lo = ss.joint_mmse(JointMode::kFusion);
    const double hi = std::isinf(ss.sigma_x2.variance())
                          ? 4.0 * lo
                          : 0.25 * ss.sigma_x2.variance() + 0.75 * lo;
    q.d = lo + (0.1 + 0.8 * CounterRng::uniform(seed, 9)) * (hi - lo);
    const RdfResult rdf = ceo_rdf(q);
    bool active = true;
    for (double term : rdf.alloc.rate_terms) active = active && term > 1e-6;
    if (!active) continue;
    ++tested;
    std::vector<double> sigma_z2;
    for (std::size_t k = 0; k < ss.K(); ++k) {
      sigma_z2.push_back(sigma_z2_from_dk(ss, k, rdf.alloc.d_k[k]));
    }
    const SchemeRate sr = scheme_rate(ss, sigma_z2);
    EXPECT_NEAR(sr.d, q.d, 1e-10 * q.d) << "seed " << seed;
    for (std::size_t k = 0; k < ss.K(); ++k) {
      EXPECT_NEAR(sr.d_k[k], rdf.alloc.d_k[k], 1e-10 * rdf.alloc.d_k[k]) << "seed " << seed;
    }
    EXPECT_NEAR(sr.rate, rdf.rate, 1e-10 * std::max(1.0, rdf.rate)) << "seed " << seed;
  }
  EXPECT_GE(tested, 30);
}

TEST(SchemeRate, SilentChannelAddsNothing) {
  // An infinitely noisy test channel contributes zero rate and leaves its
  // branch at the stationary variance, so the scheme matches the one-channel
  // scheme on the remaining branch.
  const SourceModel m{0.6, 1.0};
  const SteadyState both = steady_state(m, {{1.0, 2.0}});
  const SteadyState solo = steady_state(m, {{1.0}});
  const SchemeRate sr = scheme_rate(both, {0.5, kInf});
  const SchemeRate ref = scheme_rate(solo, {0.5});
  EXPECT_NEAR(sr.d_k[1], both.sigma_x2.variance(), 1e-10);
  EXPECT_NEAR(sr.d, ref.d, 1e-12);
  EXPECT_NEAR(sr.rate, ref.rate, 1e-12);
}

TEST(SchemeRate, RejectsBadNoise) {
  const SteadyState ss = steady_state({0.5, 1.0}, {{1.0, 1.0}});
  EXPECT_THROW((void)scheme_rate(ss, {0.5}), std::invalid_argument);
  EXPECT_THROW((void)scheme_rate(ss, {0.5, 0.0}), std::invalid_argument);
  EXPECT_THROW((void)scheme_rate(ss, {0.5, -1.0}), std::invalid_argument);
}

// ============================================================
// Monte Carlo simulation
// ============================================================

TEST(Simulate, MemorylessClosure) {
  // The allocation d = 1/2, d_k = 2/3 is realized by sigma_z2 = 1/4, and the
  // decoder's steady error is exactly 1/2; the empirical mean must agree to
  // within Monte Carlo resolution.
  SimOptions opt;
  opt.trials = 200;
  opt.steps = 500;
  opt.seed = 2026;
  const SimReport rep = simulate({0.0, 1.0}, {{1.0, 1.0}}, {0.25, 0.25}, opt);
  EXPECT_NEAR(rep.predicted_mmse, 0.5, 1e-12);
  EXPECT_LT(rep.std_error, 0.01);
  EXPECT_NEAR(rep.empirical_mse, rep.predicted_mmse, 4.0 * rep.std_error);
  EXPECT_EQ(rep.trials, 200);
  EXPECT_EQ(rep.steps, 500);
  EXPECT_EQ(rep.burn_in, 100);
}

TEST(Simulate, TracksJointErrorAtZeroQuantizerNoise) {
  const SourceModel m{0.7, 1.0};
  const ChannelSet ch{{1.0, 2.0}};
  const SteadyState ss = steady_state(m, ch);
  SimOptions opt;
  opt.trials = 150;
  opt.steps = 400;
  opt.seed = 7;
  const SimReport rep = simulate(m, ch, {0.0, 0.0}, opt);
  EXPECT_NEAR(rep.predicted_mmse, ss.s_joint_riccati, 1e-9);
  EXPECT_NEAR(rep.empirical_mse, rep.predicted_mmse, 4.0 * rep.std_error);
}

TEST(Simulate, UnstableSourceStaysTracked) {
  // For |a| > 1 the absolute state diverges but the error recursion is
  // stable; the empirical error must still match the steady prediction.
  const SourceModel m{1.05, 1.0};
  const ChannelSet ch{{1.0, 2.0}};
  SimOptions opt;
  opt.trials = 150;
  opt.steps = 400;
  opt.seed = 11;
  const SimReport rep = simulate(m, ch, {0.5, 0.8}, opt);
  EXPECT_TRUE(std::isfinite(rep.empirical_mse));
  EXPECT_NEAR(rep.empirical_mse, rep.predicted_mmse, 4.0 * rep.std_error);
}

TEST(Simulate, BurnInStretchesWithSlowEncoders) {
  const SourceModel m{0.99, 1.0};
  SimOptions opt;
  opt.trials = 2;
  opt.steps = 1;
  const SimReport slow = simulate(m, {{1000.0}}, {1.0}, opt);
  EXPECT_GT(slow.burn_in, 100);
  const SimReport fast = simulate({0.0, 1.0}, {{1.0}}, {1.0}, opt);
  EXPECT_EQ(fast.burn_in, 100);
}

TEST(Simulate, DeterministicAcrossRuns) {
  SimOptions opt;
  opt.trials = 20;
  opt.steps = 50;
  opt.seed = 31;
  const SimReport a = simulate({0.5, 1.0}, {{1.0, 2.0}}, {0.4, 0.6}, opt);
  const SimReport b = simulate({0.5, 1.0}, {{1.0, 2.0}}, {0.4, 0.6}, opt);
  EXPECT_EQ(a.empirical_mse, b.empirical_mse);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Simulate, ShardingDoesNotChangeTheBits) {
  SimOptions opt;
  opt.trials = 23;
  opt.steps = 40;
  opt.seed = 77;
  const SimReport serial = simulate({0.6, 1.0}, {{1.0, 2.0}}, {0.4, 0.6}, opt);
  for (int threads : {2, 3, 8, 64}) {
    opt.threads = threads;
    const SimReport sharded = simulate({0.6, 1.0}, {{1.0, 2.0}}, {0.4, 0.6}, opt);
    EXPECT_EQ(serial.empirical_mse, sharded.empirical_mse) << threads << " threads";
    EXPECT_EQ(serial.std_error, sharded.std_error) << threads << " threads";
  }
}

TEST(Simulate, SeedMovesTheSample) {
  SimOptions opt;
  opt.trials = 20;
  opt.steps = 50;
  opt.seed = 31;
  const SimReport a = simulate({0.5, 1.0}, {{1.0, 2.0}}, {0.4, 0.6}, opt);
  opt.seed = 32;
  const SimReport b = simulate({0.5, 1.0}, {{1.0, 2.0}}, {0.4, 0.6}, opt);
  EXPECT_NE(a.empirical_mse, b.empirical_mse);
  EXPECT_NEAR(a.empirical_mse, b.empirical_mse,
              4.0 * (a.std_error + b.std_error));
}

TEST(Simulate, RejectsDegenerateOptions) {
  SimOptions opt;
  opt.trials = 1;
  EXPECT_THROW((void)simulate({0.0, 1.0}, {{1.0}}, {1.0}, opt), std::invalid_argument);
  opt.trials = 2;
  opt.steps = 0;
  EXPECT_THROW((void)simulate({0.0, 1.0}, {{1.0}}, {1.0}, opt), std::invalid_argument);
}

// ============================================================
// Trace
// ============================================================

TEST(Trace, RowsAreSelfConsistent) {
  const SourceModel m{0.5, 1.0};
  const ChannelSet ch{{1.0, 2.0}};
  const std::vector<double> sigma_z2 = {0.3, 0.5};
  const auto rows = simulate_trace(m, ch, sigma_z2, 64, 5);
  ASSERT_EQ(rows.size(), 64u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TraceRow& row = rows[i];
    EXPECT_EQ(row.step, static_cast<long long>(i) + 1);
    ASSERT_EQ(row.xbar.size(), 2u);
    ASSERT_EQ(row.b.size(), 2u);
    EXPECT_DOUBLE_EQ(row.sq_err, (row.x - row.xhat) * (row.x - row.xhat));
  }
}

TEST(Trace, NoiselessTransmissionsEchoTheEstimates) {
  const auto rows = simulate_trace({0.8, 1.0}, {{1.0}}, {0.0}, 32, 9);
  for (const TraceRow& row : rows) EXPECT_EQ(row.b[0], row.xbar[0]);
}

TEST(Trace, DecoderReplaysFromTransmissionsAlone) {
  // Rebuild the decoder output from the b_k columns with the steady gains;
  // it must reproduce xhat bit for bit, confirming the decoder uses nothing
  // but the transmissions.
  const SourceModel m{0.5, 1.0};
  const ChannelSet ch{{1.0, 2.0}};
  const std::vector<double> sigma_z2 = {0.3, 0.5};
  const AugmentedModel aug = build_augmented(m, ch);
  const DecoderFilter filt = decoder_filter(aug, sigma_z2);
  const auto n = static_cast<std::size_t>(aug.dim);
  const auto rows = simulate_trace(m, ch, sigma_z2, 48, 13);
  std::vector<double> shat(n, 0.0), pred(n);
  for (const TraceRow& row : rows) {
    for (std::size_t r = 0; r < n; ++r) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += aug.f[r * n + j] * shat[j];
      pred[r] = sum;
    }
    shat = pred;
    for (std::size_t k = 0; k < 2; ++k) {
      const double innov = row.b[k] - shat[k + 1];
      for (std::size_t j = 0; j < n; ++j) shat[j] += filt.gains[k * n + j] * innov;
    }
    EXPECT_DOUBLE_EQ(shat[0], row.xhat);
  }
}

TEST(Trace, LongRunErrorMatchesPrediction) {
  const SourceModel m{0.5, 1.0};
  const ChannelSet ch{{1.0, 1.0}};
  const AugmentedModel aug = build_augmented(m, ch);
  const double predicted = exact_decoder_mmse(aug, {0.25, 0.25});
  const auto rows = simulate_trace(m, ch, {0.25, 0.25}, 20000, 17);
  double acc = 0.0;
  for (std::size_t i = 2000; i < rows.size(); ++i) acc += rows[i].sq_err;
  const double mean = acc / static_cast<double>(rows.size() - 2000);
  EXPECT_NEAR(mean, predicted, 0.1 * predicted);
}

}  // namespace
