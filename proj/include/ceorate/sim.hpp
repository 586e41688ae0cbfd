#pragma once

#include <cmath>
#include <cstdint>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ceorate/model.hpp"
#include "ceorate/rdf.hpp"
#include "ceorate/rng.hpp"

namespace ceorate {

// ============================================================
// Test-channel calibration
// ============================================================

/// Quantizer noise variance that makes one observer's branch hit the
/// per-channel distortion d_k.
///
/// The encoder's running estimate Xbar_k is an AR(1) process with pole a and
/// innovation variance bar_v_k = q_k - s_k, orthogonal to the residual
/// X - Xbar_k of variance s_k.  Filtering Xbar_k from U = Xbar_k + Z leaves
/// steady error m = d_k - s_k, and inverting the steady-state update for the
/// required observation precision gives
///     1/sigma_z2 = 1/m - 1/(a^2 m + bar_v_k).
/// Feasible d_k lie strictly between s_k (noiseless test channel) and the
/// zero-rate error s_k + Var(Xbar_k).
inline double sigma_z2_from_dk(const SteadyState& ss, std::size_t k, double d_k) {
  if (k >= ss.K()) {
    throw std::invalid_argument("sigma_z2_from_dk: channel index out of range");
  }
  const PerChannelSteady& ch = ss.ch[k];
  const double a = ss.source.a;
  const double m = d_k - ch.s;
  if (!std::isfinite(d_k) || m <= 0.0) {
    throw std::domain_error("sigma_z2_from_dk: d_k must exceed s_k");
  }
  // sigma_z2 = m (a^2 m + bar_v) / (bar_v - (1 - a^2) m); a nonpositive
  // denominator means d_k is beyond the zero-rate error of the branch.
  const double denom = ch.bar_v - (1.0 - a * a) * m;
  if (denom <= 0.0) {
    throw std::domain_error("sigma_z2_from_dk: d_k at or beyond the zero-rate error");
  }
  return m * (a * a * m + ch.bar_v) / denom;
}

// ============================================================
// Augmented closed-loop model
// ============================================================

/// Joint linear dynamics of the source and every encoder's running estimate,
/// state S = (X, Xbar_1, ..., Xbar_K):
///     X_{i+1}      = a X_i + V_i,
///     Xbar_{k,i+1} = a (1 - kappa_k) Xbar_{k,i}
///                    + kappa_k (a X_i + V_i + W_{k,i+1}),
/// i.e. S_{i+1} = F S_i + G n_i with noise n = (V, W_1, ..., W_K).  The
/// matrices are row-major (K+1) x (K+1); q = G diag(sigma_v2, sigma_w2) G^T.
struct AugmentedModel {
  SourceModel source;
  std::vector<double> sigma_w2;
  std::vector<double> kappa;  ///< steady per-encoder Kalman gains
  int dim = 0;                ///< K + 1
  std::vector<double> f;      ///< transition matrix
  std::vector<double> g;      ///< noise mixing matrix
  std::vector<double> q;      ///< process noise covariance

  [[nodiscard]] std::size_t K() const { return sigma_w2.size(); }
};

inline AugmentedModel build_augmented(const SourceModel& m,
                                      const ChannelSet& channels) {
  const SteadyState ss = steady_state(m, channels);
  const int K = static_cast<int>(channels.size());
  AugmentedModel aug;
  aug.source = m;
  aug.sigma_w2 = channels.sigma_w2;
  aug.dim = K + 1;
  const std::size_t n = static_cast<std::size_t>(aug.dim);
  aug.f.assign(n * n, 0.0);
  aug.g.assign(n * n, 0.0);
  aug.f[0] = m.a;
  aug.g[0] = 1.0;
  for (int k = 1; k <= K; ++k) {
    const double kap = ss.ch[static_cast<std::size_t>(k - 1)].kappa;
    aug.kappa.push_back(kap);
    const std::size_t row = static_cast<std::size_t>(k) * n;
    aug.f[row] = kap * m.a;
    aug.f[row + static_cast<std::size_t>(k)] = m.a * (1.0 - kap);
    aug.g[row] = kap;
    aug.g[row + static_cast<std::size_t>(k)] = kap;
  }
  // q = G diag(sigma_v2, sigma_w2_1, ..) G^T.
  std::vector<double> noise_var;
  noise_var.push_back(m.sigma_v2);
  for (double w : channels.sigma_w2) noise_var.push_back(w);
  aug.q.assign(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        sum += aug.g[r * n + j] * aug.g[c * n + j] * noise_var[j];
      }
      aug.q[r * n + c] = sum;
    }
  }
  return aug;
}

namespace detail {

/// F P F^T for row-major n x n matrices.
inline std::vector<double> sandwich(std::size_t n, const std::vector<double>& f,
                                    const std::vector<double>& p) {
  std::vector<double> fp(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = f[r * n + j];
      if (v == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) fp[r * n + c] += v * p[j * n + c];
    }
  }
  std::vector<double> out(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += fp[r * n + j] * f[c * n + j];
      out[r * n + c] = sum;
    }
  }
  return out;
}

/// One scalar measurement update of coordinate `k` with noise variance r,
/// in Joseph form so the covariance stays symmetric PSD even for r == 0.
/// The gain vector is written to `gain` (zero when the channel is useless).
inline void scalar_update(std::size_t n, std::vector<double>& p, std::size_t k,
                          double r, double* gain) {
  const double denom = p[k * n + k] + r;
  if (!std::isfinite(denom) || denom <= 0.0) {
    for (std::size_t i = 0; i < n; ++i) gain[i] = 0.0;
    return;
  }
  std::vector<double> pk(n);
  for (std::size_t i = 0; i < n; ++i) {
    pk[i] = p[i * n + k];
    gain[i] = pk[i] / denom;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      p[i * n + j] += gain[i] * gain[j] * denom - gain[i] * pk[j] - gain[j] * pk[i];
    }
  }
}

}  // namespace detail

// ============================================================
// Exact decoder error
// ============================================================

/// Steady causal filter of the decoder, which observes U_k = Xbar_k + Z_k
/// with independent quantizer noises Var(Z_k) = sigma_z2[k].  Gains are the
/// sequential per-channel gain vectors applied in channel order after the
/// prediction step; mmse is the steady filtered variance of the source
/// coordinate.
struct DecoderFilter {
  std::vector<double> p_pred;  ///< steady one-step prediction covariance
  std::vector<double> p_filt;  ///< steady filtered covariance
  std::vector<double> gains;   ///< K gain vectors of length dim, row-major
  double mmse = 0.0;
  long long iterations = 0;
};

inline DecoderFilter decoder_filter(const AugmentedModel& aug,
                                    const std::vector<double>& sigma_z2) {
  const std::size_t n = static_cast<std::size_t>(aug.dim);
  const std::size_t K = aug.K();
  if (sigma_z2.size() != K) {
    throw std::invalid_argument("decoder_filter: need one noise variance per channel");
  }
  for (double r : sigma_z2) {
    if (std::isnan(r) || r < 0.0) {
      throw std::invalid_argument("decoder_filter: noise variances must be >= 0");
    }
  }

  constexpr long long kMaxIterations = 1000000;
  constexpr double kRelTol = 1e-12;
  std::vector<double> p = aug.q;
  std::vector<double> gain(n);
  DecoderFilter out;
  for (long long iter = 1; iter <= kMaxIterations; ++iter) {
    std::vector<double> pred = detail::sandwich(n, aug.f, p);
    for (std::size_t i = 0; i < n * n; ++i) pred[i] += aug.q[i];
    std::vector<double> filt = pred;
    for (std::size_t k = 0; k < K; ++k) {
      detail::scalar_update(n, filt, k + 1, sigma_z2[k], gain.data());
    }
    double diff = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i < n * n; ++i) {
      diff = std::max(diff, std::abs(filt[i] - p[i]));
      scale = std::max(scale, std::abs(filt[i]));
    }
    p = std::move(filt);
    if (diff <= kRelTol * scale) {
      out.p_pred = std::move(pred);
      out.p_filt = p;
      out.mmse = p[0];
      out.iterations = iter;
      // Re-run the update pass on the steady prediction to record the
      // sequential gains the simulator applies.
      std::vector<double> replay = out.p_pred;
      out.gains.assign(K * n, 0.0);
      for (std::size_t k = 0; k < K; ++k) {
        detail::scalar_update(n, replay, k + 1, sigma_z2[k],
                              out.gains.data() + k * n);
      }
      return out;
    }
  }
  throw std::runtime_error("decoder_filter: Riccati iteration did not converge");
}

/// Steady causal MMSE of the source given every quantized encoder estimate.
inline double exact_decoder_mmse(const AugmentedModel& aug,
                                 const std::vector<double>& sigma_z2) {
  return decoder_filter(aug, sigma_z2).mmse;
}

// ============================================================
// Scheme rate and the fusion gap
// ============================================================

/// Operating point of the forward test-channel scheme for given quantizer
/// noises: the per-channel distortions, the fusion-combined target, and the
/// total rate 1/2 log(dbar/d) + sum_k 1/2 log(rho_bar_k / rho_k).
struct SchemeRate {
  std::vector<double> d_k;
  double d = 0.0;
  double rate = 0.0;
  RateUnit unit = RateUnit::kNats;
};

inline SchemeRate scheme_rate(const SteadyState& ss,
                              const std::vector<double>& sigma_z2,
                              RateUnit unit = RateUnit::kNats) {
  if (sigma_z2.size() != ss.K()) {
    throw std::invalid_argument("scheme_rate: need one noise variance per channel");
  }
  SchemeRate out;
  out.unit = unit;
  double inv_d = -static_cast<double>(ss.K() - 1) * ss.sigma_x2.precision();
  double terms = 0.0;
  for (std::size_t k = 0; k < ss.K(); ++k) {
    const double r = sigma_z2[k];
    if (std::isnan(r) || r <= 0.0) {
      throw std::invalid_argument("scheme_rate: noise variances must be > 0");
    }
    const PerChannelSteady& ch = ss.ch[k];
    // Branch error: residual s_k plus the steady error of filtering the
    // AR(1) estimate process (pole a, innovation bar_v) through noise r.
    const SourceModel branch{ss.source.a, ch.bar_v};
    const double c = std::isinf(r) ? 0.0 : 1.0 / r;
    const double d_k = ch.s + steady_state_mmse(branch, c).p;
    out.d_k.push_back(d_k);
    inv_d += 1.0 / d_k;
    const double dbar_k = ss.source.a * ss.source.a * d_k + ss.source.sigma_v2;
    const double rho = ch.s * (1.0 - ch.s / d_k);
    const double rho_bar = ch.s * (1.0 - ch.s / dbar_k);
    terms += 0.5 * std::log(rho_bar / rho);
  }
  out.d = 1.0 / inv_d;
  const double dbar = ss.source.a * ss.source.a * out.d + ss.source.sigma_v2;
  out.rate = to_unit(0.5 * std::log(dbar / out.d) + terms, unit);
  return out;
}

/// Gap between the two joint-error conventions at infinite rate: the
/// augmented decoder with noiseless test channels recovers the observation
/// paths exactly, so its error is the joint Riccati value, while the fusion
/// convention combines per-channel errors as if they were independent.  The
/// two coincide for a == 0.
struct FusionDiscrepancy {
  double joint_fusion = 0.0;
  double joint_riccati = 0.0;
  double decoder_limit = 0.0;  ///< augmented-filter MMSE at sigma_z2 == 0
  double gap = 0.0;            ///< decoder_limit - joint_fusion
};

inline FusionDiscrepancy fusion_discrepancy(const SourceModel& m,
                                            const ChannelSet& channels) {
  const SteadyState ss = steady_state(m, channels);
  const AugmentedModel aug = build_augmented(m, channels);
  FusionDiscrepancy rep;
  rep.joint_fusion = ss.s_joint_fusion;
  rep.joint_riccati = ss.s_joint_riccati;
  rep.decoder_limit =
      exact_decoder_mmse(aug, std::vector<double>(channels.size(), 0.0));
  rep.gap = rep.decoder_limit - rep.joint_fusion;
  return rep;
}

// ============================================================
// Monte Carlo simulation
// ============================================================

struct SimOptions {
  long long trials = 100;
  long long steps = 1000;  ///< recorded steps per trial, after burn-in
  std::uint64_t seed = 1;
  int threads = 1;  ///< trial sharding; the result is identical for any value
};

struct SimReport {
  double predicted_mmse = 0.0;  ///< steady filtered error of the decoder
  double empirical_mse = 0.0;   ///< mean of per-trial mean squared errors
  double std_error = 0.0;       ///< standard error across trial means
  long long trials = 0;
  long long steps = 0;
  long long burn_in = 0;
};

namespace detail {

/// Mixing horizon of the slowest encoder loop: the recorded window starts
/// only after transients of the closed-loop poles a(1-kappa_k) have decayed.
inline long long sim_burn_in(const AugmentedModel& aug) {
  double kappa_min = 1.0;
  for (double k : aug.kappa) kappa_min = std::min(kappa_min, k);
  const double pole = std::abs(aug.source.a) * (1.0 - kappa_min);
  return std::max<long long>(
      100, static_cast<long long>(std::ceil(10.0 / (1.0 - pole))));
}

/// Draws for one simulation step, laid out per (trial, stream, step) so the
/// stream is reproducible regardless of evaluation order: stream 0 is the
/// process noise, streams 1..K the observation noises, K+1..2K the quantizer
/// noises.
struct SimStreams {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;

  [[nodiscard]] double v(std::uint64_t step, double sigma_v2) const {
    return std::sqrt(sigma_v2) * CounterRng::normal(seed, trial, 0, 0, step);
  }
  [[nodiscard]] double w(std::uint64_t step, std::size_t k, double sigma_w2) const {
    return std::sqrt(sigma_w2) *
           CounterRng::normal(seed, trial, static_cast<std::uint64_t>(k + 1), 0, step);
  }
  [[nodiscard]] double z(std::uint64_t step, std::size_t k, std::size_t K,
                         double sigma_z2) const {
    if (sigma_z2 == 0.0) return 0.0;
    return std::sqrt(sigma_z2) *
           CounterRng::normal(seed, trial, static_cast<std::uint64_t>(K + k + 1), 0,
                              step);
  }
};

/// Mean of D[0]^2 over the recorded window of one trial.  The recursion runs
/// in error coordinates D = Shat - S, which stay bounded for any |a| (the
/// absolute state does not, so it is never materialized):
///     D^- = F D - G n,   then   D += gain_k (Z_k - D[k])  per channel.
inline double sim_trial_mean(const AugmentedModel& aug, const DecoderFilter& filt,
                             const std::vector<double>& sigma_z2,
                             std::uint64_t seed, long long trial, long long burn_in,
                             long long steps) {
  const std::size_t n = static_cast<std::size_t>(aug.dim);
  const std::size_t K = aug.K();
  const double a = aug.source.a;
  const SimStreams rng{seed, static_cast<std::uint64_t>(trial)};
  std::vector<double> d(n, 0.0), dm(n);
  double acc = 0.0;
  const long long horizon = burn_in + steps;
  for (long long i = 0; i < horizon; ++i) {
    const auto step = static_cast<std::uint64_t>(i);
    const double v = rng.v(step, aug.source.sigma_v2);
    // Predict: D^- = F D - G n, written out against the sparse rows.
    dm[0] = a * d[0] - v;
    for (std::size_t k = 0; k < K; ++k) {
      const double kap = aug.kappa[k];
      dm[k + 1] = kap * a * d[0] + a * (1.0 - kap) * d[k + 1] -
                  kap * (v + rng.w(step, k, aug.sigma_w2[k]));
    }
    // Sequential measurement updates with the steady gains.
    for (std::size_t k = 0; k < K; ++k) {
      const double innov = rng.z(step, k, K, sigma_z2[k]) - dm[k + 1];
      const double* gain = filt.gains.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) dm[j] += gain[j] * innov;
    }
    d.swap(dm);
    if (i >= burn_in) acc += d[0] * d[0];
  }
  return acc / static_cast<double>(steps);
}

}  // namespace detail

/// Simulates the closed loop and estimates the decoder's mean squared error.
///
/// Trials are independent (counter-based streams indexed by trial), each
/// contributing the mean of D[0]^2 over `steps` recorded samples; trial
/// means are reduced in trial order regardless of sharding, so results are
/// bit-identical across runs and thread counts.
inline SimReport simulate(const SourceModel& m, const ChannelSet& channels,
                          const std::vector<double>& sigma_z2,
                          const SimOptions& opt) {
  if (opt.trials < 2) throw std::invalid_argument("simulate: need at least 2 trials");
  if (opt.steps < 1) throw std::invalid_argument("simulate: need at least 1 step");
  if (opt.threads < 1) throw std::invalid_argument("simulate: need at least 1 thread");
  const AugmentedModel aug = build_augmented(m, channels);
  const DecoderFilter filt = decoder_filter(aug, sigma_z2);

  SimReport report;
  report.predicted_mmse = filt.mmse;
  report.trials = opt.trials;
  report.steps = opt.steps;
  report.burn_in = detail::sim_burn_in(aug);

  std::vector<double> means(static_cast<std::size_t>(opt.trials));
  const int shards = static_cast<int>(
      std::min<long long>(opt.threads, opt.trials));
  auto run_shard = [&](int shard) {
    for (long long trial = shard; trial < opt.trials; trial += shards) {
      means[static_cast<std::size_t>(trial)] = detail::sim_trial_mean(
          aug, filt, sigma_z2, opt.seed, trial, report.burn_in, opt.steps);
    }
  };
  if (shards == 1) {
    run_shard(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(shards));
    for (int shard = 0; shard < shards; ++shard) pool.emplace_back(run_shard, shard);
    for (std::thread& th : pool) th.join();
  }

  double sum_means = 0.0;
  double sum_sq_means = 0.0;
  for (double mean : means) {
    sum_means += mean;
    sum_sq_means += mean * mean;
  }
  const double t = static_cast<double>(opt.trials);
  report.empirical_mse = sum_means / t;
  const double var_means =
      std::max(0.0, (sum_sq_means - sum_means * sum_means / t) / (t - 1.0));
  report.std_error = std::sqrt(var_means / t);
  return report;
}

/// One recorded trajectory of the closed loop in absolute coordinates, for
/// inspection and plotting: the source, every encoder estimate, the noisy
/// transmissions, and the decoder output.
struct TraceRow {
  long long step = 0;
  double x = 0.0;
  double xhat = 0.0;
  double sq_err = 0.0;
  std::vector<double> xbar;  ///< per-encoder running estimates
  std::vector<double> b;     ///< per-encoder transmitted values xbar + z
};

inline std::vector<TraceRow> simulate_trace(const SourceModel& m,
                                            const ChannelSet& channels,
                                            const std::vector<double>& sigma_z2,
                                            long long steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("simulate_trace: need at least 1 step");
  const AugmentedModel aug = build_augmented(m, channels);
  const DecoderFilter filt = decoder_filter(aug, sigma_z2);
  const std::size_t n = static_cast<std::size_t>(aug.dim);
  const std::size_t K = aug.K();
  const detail::SimStreams rng{seed, 0};

  std::vector<double> s(n, 0.0), sp(n), shat(n, 0.0), shp(n);
  std::vector<TraceRow> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (long long i = 0; i < steps; ++i) {
    const auto step = static_cast<std::uint64_t>(i);
    const double v = rng.v(step, m.sigma_v2);
    sp[0] = m.a * s[0] + v;
    shp[0] = m.a * shat[0];
    for (std::size_t k = 0; k < K; ++k) {
      const double kap = aug.kappa[k];
      sp[k + 1] = kap * m.a * s[0] + m.a * (1.0 - kap) * s[k + 1] +
                  kap * (v + rng.w(step, k, aug.sigma_w2[k]));
      shp[k + 1] = kap * m.a * shat[0] + m.a * (1.0 - kap) * shat[k + 1];
    }
    s.swap(sp);
    shat.swap(shp);
    TraceRow row;
    row.step = i + 1;
    for (std::size_t k = 0; k < K; ++k) {
      const double b = s[k + 1] + rng.z(step, k, K, sigma_z2[k]);
      row.b.push_back(b);
      const double innov = b - shat[k + 1];
      const double* gain = filt.gains.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) shat[j] += gain[j] * innov;
    }
    row.x = s[0];
    row.xhat = shat[0];
    row.sq_err = (s[0] - shat[0]) * (s[0] - shat[0]);
    for (std::size_t k = 0; k < K; ++k) row.xbar.push_back(s[k + 1]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ceorate
