#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ceorate/ext_variance.hpp"

namespace ceorate {

/// Scalar Gauss-Markov source  X_{i+1} = a * X_i + V_i,  V_i ~ N(0, sigma_v2).
///
/// `a` may have any magnitude; |a| >= 1 simply means the source has no
/// stationary distribution (infinite stationary variance).
struct SourceModel {
  double a = 0.0;
  double sigma_v2 = 1.0;

  void validate() const {
    if (!std::isfinite(a)) throw std::invalid_argument("SourceModel: a must be finite");
    if (!std::isfinite(sigma_v2) || sigma_v2 <= 0.0) {
      throw std::invalid_argument("SourceModel: sigma_v2 must be finite and > 0");
    }
  }
};

/// Per-observer AWGN channels  Y_i^k = X_i + W_i^k,  W_i^k ~ N(0, sigma_w2[k]).
struct ChannelSet {
  std::vector<double> sigma_w2;

  std::size_t size() const { return sigma_w2.size(); }

  void validate() const {
    if (sigma_w2.empty()) throw std::invalid_argument("ChannelSet: need at least one channel");
    for (double w : sigma_w2) {
      if (!std::isfinite(w) || w <= 0.0) {
        throw std::invalid_argument("ChannelSet: noise variances must be finite and > 0");
      }
    }
  }

  bool symmetric(double rel_tol = 1e-12) const {
    for (double w : sigma_w2) {
      if (std::abs(w - sigma_w2.front()) > rel_tol * sigma_w2.front()) return false;
    }
    return true;
  }
};

/// Stationary variance of the source: sigma_v2 / (1 - a^2) for |a| < 1,
/// infinite otherwise.
inline ExtVariance stationary_variance(const SourceModel& m) {
  m.validate();
  if (std::abs(m.a) < 1.0) {
    return ExtVariance::from_variance(m.sigma_v2 / (1.0 - m.a * m.a));
  }
  return ExtVariance::infinite();
}

/// One-shot MMSE of X ~ N(0, prior) from Y_k = X + W_k with independent
/// W_k ~ N(0, sigma_w2[k]):   1/mmse = 1/prior + sum_k 1/sigma_w2[k].
/// The optimal estimator is  xhat = mmse * sum_k Y_k / sigma_w2[k]; if
/// `weights` is non-null it receives those per-observation coefficients.
inline double one_shot_joint_mmse(const ExtVariance& prior,
                                  const std::vector<double>& sigma_w2,
                                  std::vector<double>* weights = nullptr) {
  if (sigma_w2.empty()) throw std::invalid_argument("one_shot_joint_mmse: no observations");
  double prec = prior.precision();
  for (double w : sigma_w2) {
    if (!std::isfinite(w) || w <= 0.0) {
      throw std::invalid_argument("one_shot_joint_mmse: noise variances must be > 0");
    }
    prec += 1.0 / w;
  }
  double mmse = 1.0 / prec;
  if (weights) {
    weights->resize(sigma_w2.size());
    for (std::size_t k = 0; k < sigma_w2.size(); ++k) (*weights)[k] = mmse / sigma_w2[k];
  }
  return mmse;
}

/// Backward-channel identity: if Y = X + W with W independent of X, then
/// the estimation error obeys  var(X | Y) = sigma_x2 * (1 - sigma_x2 / sigma_y2),
/// where sigma_y2 = sigma_x2 + sigma_w2 is the variance of Y.
inline double lemma_back(double sigma_x2, double sigma_y2) {
  if (!std::isfinite(sigma_x2) || sigma_x2 <= 0.0) {
    throw std::invalid_argument("lemma_back: sigma_x2 must be finite and > 0");
  }
  if (!std::isfinite(sigma_y2) || sigma_y2 < sigma_x2) {
    throw std::invalid_argument("lemma_back: need sigma_y2 >= sigma_x2 (Y = X + independent W)");
  }
  return sigma_x2 * (1.0 - sigma_x2 / sigma_y2);
}

/// Combination of K individually-corrupted estimates of the same X with prior
/// variance `prior`: given per-estimate error variances err[k], the effective
/// single observation noise is
///     1/sigma_wp2 = sum_k 1/err[k] - (K-1) / prior,
/// and the combined estimator weights are sigma_wp2 / err[k].
/// Throws if the combined precision is not strictly positive.
inline double lemma_combo(const ExtVariance& prior, const std::vector<double>& err,
                          std::vector<double>* weights = nullptr) {
  if (err.empty()) throw std::invalid_argument("lemma_combo: no estimates");
  double prec = -static_cast<double>(err.size() - 1) * prior.precision();
  for (double e : err) {
    if (!std::isfinite(e) || e <= 0.0) {
      throw std::invalid_argument("lemma_combo: error variances must be finite and > 0");
    }
    prec += 1.0 / e;
  }
  if (prec <= 0.0) {
    throw std::domain_error("lemma_combo: combined precision is not positive");
  }
  double sigma_wp2 = 1.0 / prec;
  if (weights) {
    weights->resize(err.size());
    for (std::size_t k = 0; k < err.size(); ++k) (*weights)[k] = sigma_wp2 / err[k];
  }
  return sigma_wp2;
}

/// One filtering step for the scalar source under total observation
/// precision c = sum_k 1/sigma_w2[k]:
///   prediction  q = a^2 * p + sigma_v2,
///   update      1/p' = 1/q + c.
struct RiccatiResult {
  double q = 0.0;  ///< one-step prediction error variance
  double p = 0.0;  ///< filtered error variance
};

inline RiccatiResult riccati_step(double p, const SourceModel& m, double c) {
  m.validate();
  if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("riccati_step: p must be >= 0");
  if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("riccati_step: c must be >= 0");
  double q = m.a * m.a * p + m.sigma_v2;
  return RiccatiResult{q, q / (1.0 + c * q)};
}

/// Steady-state filtering error for total observation precision c.
///
/// The fixed point of riccati_step solves
///     c*q^2 + q*(1 - a^2 - sigma_v2*c) - sigma_v2 = 0,
/// whose unique positive root is returned together with p = q / (1 + c*q).
/// Requires c > 0, or c == 0 with |a| < 1 (then p = q = stationary variance).
inline RiccatiResult steady_state_mmse(const SourceModel& m, double c) {
  m.validate();
  if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("steady_state_mmse: c must be >= 0");
  if (c == 0.0) {
    if (std::abs(m.a) >= 1.0) {
      throw std::domain_error("steady_state_mmse: no fixed point for c == 0 and |a| >= 1");
    }
    double q = m.sigma_v2 / (1.0 - m.a * m.a);
    return RiccatiResult{q, q};
  }
  // Stable quadratic: roots of c*q^2 + b*q - sigma_v2 with b = 1 - a^2 - sigma_v2*c.
  double b = 1.0 - m.a * m.a - m.sigma_v2 * c;
  double disc = std::sqrt(b * b + 4.0 * c * m.sigma_v2);
  double q = b > 0.0 ? 2.0 * m.sigma_v2 / (b + disc) : (disc - b) / (2.0 * c);
  return RiccatiResult{q, q / (1.0 + c * q)};
}

/// Which joint (all-channels) causal MMSE to use where the theory needs
/// sigma^2_{X || Y^{[K]}}.
///
/// kRiccati runs the exact joint filter (total precision sum_k 1/sigma_w2[k]).
/// kFusion combines the per-channel steady errors through lemma_combo,
///     1/s_J = sum_k 1/s_k - (K-1)/sigma_x2,
/// which is exact for a == 0 and for one-shot estimation, but differs from
/// the joint filter for a != 0 because the per-channel filtering errors share
/// the process noise.  Several closed forms (the symmetric large-K limit, the
/// loss-bound equality case) hold exactly only under kFusion.
enum class JointMode { kRiccati, kFusion };

inline const char* to_string(JointMode mode) {
  return mode == JointMode::kRiccati ? "riccati" : "fusion";
}

/// Steady-state description of the source/channel ensemble.
struct PerChannelSteady {
  double s = 0.0;      ///< filtered MMSE of X from this channel alone
  double q = 0.0;      ///< predicted MMSE
  double bar_v = 0.0;  ///< innovation variance of the filter output process (q - s)
  double kappa = 0.0;  ///< steady Kalman gain q / (q + sigma_w2)
};

struct SteadyState {
  SourceModel source;
  std::vector<double> sigma_w2;
  std::vector<PerChannelSteady> ch;
  ExtVariance sigma_x2 = ExtVariance::infinite();
  double s_joint_riccati = 0.0;
  double q_joint_riccati = 0.0;
  double s_joint_fusion = 0.0;

  double joint_mmse(JointMode mode) const {
    return mode == JointMode::kRiccati ? s_joint_riccati : s_joint_fusion;
  }
  std::size_t K() const { return ch.size(); }
};

inline SteadyState steady_state(const SourceModel& m, const ChannelSet& channels) {
  m.validate();
  channels.validate();
  SteadyState out;
  out.source = m;
  out.sigma_w2 = channels.sigma_w2;
  out.sigma_x2 = stationary_variance(m);

  double c_total = 0.0;
  double fusion_prec = -static_cast<double>(channels.size() - 1) * out.sigma_x2.precision();
  out.ch.reserve(channels.size());
  for (double w : channels.sigma_w2) {
    double c = 1.0 / w;
    c_total += c;
    RiccatiResult r = steady_state_mmse(m, c);
    PerChannelSteady pc;
    pc.s = r.p;
    pc.q = r.q;
    pc.bar_v = r.q - r.p;
    pc.kappa = r.q / (r.q + w);
    out.ch.push_back(pc);
    fusion_prec += 1.0 / r.p;
  }
  RiccatiResult joint = steady_state_mmse(m, c_total);
  out.s_joint_riccati = joint.p;
  out.q_joint_riccati = joint.q;
  out.s_joint_fusion = 1.0 / fusion_prec;
  return out;
}

}  // namespace ceorate
