#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ceorate/model.hpp"

namespace ceorate {

/// Rates are computed internally in nats; kBits divides by ln 2 on output.
enum class RateUnit { kNats, kBits };

inline const char* to_string(RateUnit u) { return u == RateUnit::kNats ? "nats" : "bits"; }

inline double to_unit(double nats, RateUnit u) {
  return u == RateUnit::kNats ? nats : nats / std::numbers::ln2;
}

/// A rate-distortion evaluation request: the source/channel ensemble, the
/// target causal MSE `d`, the joint-MMSE convention, and the output unit.
struct RdfQuery {
  SourceModel model;
  ChannelSet channels;
  double d = 1.0;
  JointMode mode = JointMode::kRiccati;
  RateUnit unit = RateUnit::kNats;
};

/// Per-channel distortion allocation returned by the sum-rate minimizers.
///
/// Feasible allocations satisfy s_k <= d_k <= sigma_x2 and
///   1/d <= 1/s_joint - sum_k (1/s_k - 1/d_k),
/// with equality whenever any channel is interior; rho_k = s_k(1 - s_k/d_k)
/// is the auxiliary one-step MMSE attached to channel k.
struct Allocation {
  std::vector<double> d_k;
  std::vector<double> rho_k;
  std::vector<double> rate_terms;  ///< per-channel contributions, in `unit`
  double base_rate = 0.0;          ///< the log(dbar/d)/2 term, in `unit`
  double total_rate = 0.0;         ///< base_rate + sum(rate_terms)
  double lambda = std::numeric_limits<double>::quiet_NaN();  ///< waterfilling level only
  RateUnit unit = RateUnit::kNats;
};

struct RdfResult {
  double rate = 0.0;  ///< == alloc.total_rate
  Allocation alloc;
};

// ============================================================
// Single-encoder closed forms
// ============================================================

/// Fully-observed causal rate-distortion function
///     R(d) = 1/2 log(dbar/d),   dbar = a^2 d + sigma_v2.
/// Returns 0 once d reaches the stationary variance (zero rate suffices).
inline double direct_rdf(const RdfQuery& q) {
  q.model.validate();
  if (!std::isfinite(q.d) || q.d <= 0.0) {
    throw std::invalid_argument("direct_rdf: d must be finite and > 0");
  }
  double sigma_x2 = stationary_variance(q.model).variance();
  if (q.d >= sigma_x2) return 0.0;
  double dbar = q.model.a * q.model.a * q.d + q.model.sigma_v2;
  return to_unit(0.5 * std::log(dbar / q.d), q.unit);
}

/// Remote (noisy-observation, single-encoder) causal rate-distortion function
///     R_rm(d) = 1/2 log[(dbar - s_J)/(d - s_J)],
/// where s_J is the joint causal MMSE in the requested mode.
inline double remote_rdf(const RdfQuery& q) {
  if (!std::isfinite(q.d) || q.d <= 0.0) {
    throw std::invalid_argument("remote_rdf: d must be finite and > 0");
  }
  SteadyState ss = steady_state(q.model, q.channels);
  double s_j = ss.joint_mmse(q.mode);
  if (q.d <= s_j) {
    throw std::domain_error("remote_rdf: d <= joint causal MMSE (infeasible)");
  }
  if (q.d >= ss.sigma_x2.variance()) return 0.0;
  double dbar = q.model.a * q.model.a * q.d + q.model.sigma_v2;
  return to_unit(0.5 * std::log((dbar - s_j) / (q.d - s_j)), q.unit);
}

/// Algebraically equal alternative form of remote_rdf,
///     1/2 log[a^2 + (sbar_J - s_J)/(d - s_J)],   sbar_J = a^2 s_J + sigma_v2,
/// kept as an independent expression for cross-checking.
inline double remote_rdf_alt(const RdfQuery& q) {
  if (!std::isfinite(q.d) || q.d <= 0.0) {
    throw std::invalid_argument("remote_rdf_alt: d must be finite and > 0");
  }
  SteadyState ss = steady_state(q.model, q.channels);
  double s_j = ss.joint_mmse(q.mode);
  if (q.d <= s_j) {
    throw std::domain_error("remote_rdf_alt: d <= joint causal MMSE (infeasible)");
  }
  if (q.d >= ss.sigma_x2.variance()) return 0.0;
  double sbar_j = q.model.a * q.model.a * s_j + q.model.sigma_v2;
  return to_unit(0.5 * std::log(q.model.a * q.model.a + (sbar_j - s_j) / (q.d - s_j)), q.unit);
}

// ============================================================
// The K-channel separable convex program
// ============================================================

namespace detail {

/// The sum-rate minimization shared by the causal and memoryless problems,
/// written in the precision increments u_k = 1/s_k - 1/d_k:
///
///   minimize    sum_k g_k(u_k)
///   subject to  sum_k u_k <= B = 1/s_joint - 1/d,   0 < u_k <= u_max_k,
///
/// where g_k(u) = 1/2 log[(dbar_k - s_k)/(d_k - s_k) * d_k/dbar_k] with
/// dbar_k = alpha*d_k + beta and d_k = 1/(1/s_k - u).  The causal problem has
/// (alpha, beta) = (a^2, sigma_v2); the memoryless one has (0, sigma_x2).
/// Each g_k is convex, strictly decreasing, and exactly 0 at
/// u_max_k = 1/s_k - 1/sigma_x2, so the budget constraint is always active.
struct SumRateProblem {
  double alpha = 0.0;
  double beta = 1.0;
  std::vector<double> s;      ///< per-channel MMSE
  double s_joint = 0.0;       ///< joint MMSE (defines the budget)
  double prec_x = 0.0;        ///< 1/sigma_x2 (0 when the source is nonstationary)
  double d = 1.0;

  double u_max(std::size_t k) const { return 1.0 / s[k] - prec_x; }
  double budget() const { return 1.0 / s_joint - 1.0 / d; }
  double base_rate_nats() const { return 0.5 * std::log((alpha * d + beta) / d); }

  /// g_k(u), numerically stable near both endpoints.
  double term_nats(std::size_t k, double u) const {
    double sk = s[k];
    double r = 1.0 / sk - u;  // = 1/d_k
    double numer = 1.0 - sk * r / (alpha + beta * r);
    return 0.5 * std::log(numer / (sk * u));
  }

  /// g_k'(u); negative on (0, u_max_k), increasing (g_k is convex).
  double dterm_nats(std::size_t k, double u) const {
    if (alpha == 0.0) return -0.5 / u;
    double sk = s[k];
    double r = 1.0 / sk - u;
    double denom = (alpha + (beta - sk) * r) * (alpha + beta * r);
    return 0.5 * (alpha * sk / denom - 1.0 / u);
  }

  /// Channel-k minimizer of g_k(u) + mu*u over (0, u_max_k]: the root of
  /// g_k'(u) = -mu, or the right endpoint when the slope never reaches -mu.
  double channel_argmin(std::size_t k, double mu) const {
    double hi = u_max(k);
    if (dterm_nats(k, hi) + mu <= 0.0) return hi;
    // Walk left until the sign flips (g' -> -inf as u -> 0), then bisect.
    double lo = hi;
    do {
      lo *= 0.5;
    } while (dterm_nats(k, lo) + mu > 0.0 && lo > 1e-300);
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (dterm_nats(k, mid) + mu > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

/// Bisection on the budget multiplier: sum_k u_k(mu) is strictly decreasing
/// in mu, from sum_k u_max_k > B at mu = 0 towards 0, so the active budget
/// pins a unique mu >= 0.
inline std::vector<double> solve_sum_rate(const SumRateProblem& p) {
  std::size_t K = p.s.size();
  double B = p.budget();
  std::vector<double> u(K);
  if (K == 1) {
    u[0] = std::min(B, p.u_max(0));
    return u;
  }
  double mu_lo = 0.0;
  double mu_hi = 1.0;
  auto total_at = [&](double mu) {
    double t = 0.0;
    for (std::size_t k = 0; k < K; ++k) t += (u[k] = p.channel_argmin(k, mu));
    return t;
  };
  while (total_at(mu_hi) > B) {
    mu_hi *= 4.0;
    if (mu_hi > 1e300) throw std::runtime_error("ceo_rdf: multiplier search diverged");
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (mu_lo + mu_hi);
    if (mid == mu_lo || mid == mu_hi) break;
    (total_at(mid) > B ? mu_lo : mu_hi) = mid;
  }
  total_at(0.5 * (mu_lo + mu_hi));
  // Spread the residual over interior channels so the budget holds with
  // equality to machine precision (complementary slackness).
  for (int pass = 0; pass < 4; ++pass) {
    double residual = B;
    double interior = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      residual -= u[k];
      if (u[k] < p.u_max(k) * (1.0 - 1e-12)) interior += u[k];
    }
    if (residual == 0.0 || interior == 0.0) break;
    for (std::size_t k = 0; k < K; ++k) {
      if (u[k] < p.u_max(k) * (1.0 - 1e-12)) {
        u[k] = std::min(u[k] + residual * (u[k] / interior), p.u_max(k));
      }
    }
  }
  double achieved = 0.0;
  for (double uk : u) achieved += uk;
  if (std::abs(achieved - B) > 1e-9 * std::max(1.0, B)) {
    throw std::runtime_error("ceo_rdf: solver did not meet the budget (residual " +
                             std::to_string(achieved - B) + ")");
  }
  return u;
}

/// Package a u-vector as an Allocation (rates converted to `unit`).
inline RdfResult package(const SumRateProblem& p, const std::vector<double>& u, RateUnit unit) {
  RdfResult out;
  out.alloc.unit = unit;
  out.alloc.base_rate = to_unit(p.base_rate_nats(), unit);
  double total = p.base_rate_nats();
  for (std::size_t k = 0; k < u.size(); ++k) {
    double d_k = 1.0 / (1.0 / p.s[k] - u[k]);
    // A channel clamped at u_max can land an ulp past sigma_x2; keep the
    // allocation inside its stated bounds.
    if (p.prec_x > 0.0) d_k = std::min(d_k, 1.0 / p.prec_x);
    double term = std::max(p.term_nats(k, u[k]), 0.0);  // exact-zero endpoint
    total += term;
    out.alloc.d_k.push_back(d_k);
    out.alloc.rho_k.push_back(p.s[k] * (1.0 - p.s[k] / d_k));
    out.alloc.rate_terms.push_back(to_unit(term, unit));
  }
  out.rate = to_unit(total, unit);
  out.alloc.total_rate = out.rate;
  return out;
}

/// Zero-rate allocation for d at or beyond the stationary variance.
inline RdfResult zero_rate(const SumRateProblem& p, RateUnit unit) {
  RdfResult out;
  out.alloc.unit = unit;
  for (double sk : p.s) {
    out.alloc.d_k.push_back(1.0 / p.prec_x);
    out.alloc.rho_k.push_back(sk * (1.0 - sk * p.prec_x));
    out.alloc.rate_terms.push_back(0.0);
  }
  return out;
}

/// Causal problem data for a query.
inline SumRateProblem causal_problem(const RdfQuery& q, const SteadyState& ss) {
  SumRateProblem p;
  p.alpha = q.model.a * q.model.a;
  p.beta = q.model.sigma_v2;
  for (const auto& pc : ss.ch) p.s.push_back(pc.s);
  p.s_joint = ss.joint_mmse(q.mode);
  p.prec_x = ss.sigma_x2.precision();
  p.d = q.d;
  return p;
}

inline void require_feasible(const char* who, double d, double s_joint) {
  if (!std::isfinite(d) || d <= 0.0) {
    throw std::invalid_argument(std::string(who) + ": d must be finite and > 0");
  }
  if (d <= s_joint) {
    throw std::domain_error(std::string(who) + ": d <= joint MMSE (infeasible)");
  }
}

}  // namespace detail

/// Minimum sum rate over isolated encoders for target causal MSE d, together
/// with the optimizing per-channel distortion allocation.
inline RdfResult ceo_rdf(const RdfQuery& q) {
  SteadyState ss = steady_state(q.model, q.channels);
  detail::SumRateProblem p = detail::causal_problem(q, ss);
  detail::require_feasible("ceo_rdf", q.d, p.s_joint);
  if (p.prec_x > 0.0 && q.d >= 1.0 / p.prec_x) return detail::zero_rate(p, q.unit);
  return detail::package(p, detail::solve_sum_rate(p), q.unit);
}

/// Closed form for channels with equal per-channel MMSE: the optimum splits
/// the budget evenly, d_1 = K / (1/d - 1/s_joint + K/s_1).
inline RdfResult ceo_rdf_symmetric(const RdfQuery& q) {
  SteadyState ss = steady_state(q.model, q.channels);
  for (const auto& pc : ss.ch) {
    if (std::abs(pc.s - ss.ch.front().s) > 1e-12 * ss.ch.front().s) {
      throw std::invalid_argument("ceo_rdf_symmetric: channels are not symmetric");
    }
  }
  detail::SumRateProblem p = detail::causal_problem(q, ss);
  detail::require_feasible("ceo_rdf_symmetric", q.d, p.s_joint);
  if (p.prec_x > 0.0 && q.d >= 1.0 / p.prec_x) return detail::zero_rate(p, q.unit);
  double K = static_cast<double>(p.s.size());
  double d_1 = K / (1.0 / q.d - 1.0 / p.s_joint + K / p.s[0]);
  std::vector<double> u(p.s.size(), 1.0 / p.s[0] - 1.0 / d_1);
  return detail::package(p, u, q.unit);
}

/// Classical (no inter-block memory) CEO sum rate: the same program with the
/// steady-state quantities replaced by their one-shot counterparts and
/// dbar_k = sigma_x2.  Requires a stationary source; `mode` is ignored
/// because the one-shot fusion identity is exact.
inline RdfResult memoryless_ceo_rdf(const RdfQuery& q) {
  q.model.validate();
  q.channels.validate();
  ExtVariance sigma_x2 = stationary_variance(q.model);
  if (sigma_x2.is_infinite()) {
    throw std::domain_error(
        "memoryless_ceo_rdf: source has no stationary distribution (|a| >= 1)");
  }
  detail::SumRateProblem p;
  p.alpha = 0.0;
  p.beta = sigma_x2.variance();
  for (double w : q.channels.sigma_w2) p.s.push_back(one_shot_joint_mmse(sigma_x2, {w}));
  p.s_joint = one_shot_joint_mmse(sigma_x2, q.channels.sigma_w2);
  p.prec_x = sigma_x2.precision();
  p.d = q.d;
  detail::require_feasible("memoryless_ceo_rdf", q.d, p.s_joint);
  if (q.d >= p.beta) return detail::zero_rate(p, q.unit);
  return detail::package(p, detail::solve_sum_rate(p), q.unit);
}

/// Suboptimal equal-level allocation: u_k = min(1/lambda, u_max_k) with the
/// level chosen to exhaust the budget.  Upper-bounds ceo_rdf, with equality
/// for symmetric channels.
inline RdfResult waterfilling(const RdfQuery& q) {
  SteadyState ss = steady_state(q.model, q.channels);
  detail::SumRateProblem p = detail::causal_problem(q, ss);
  detail::require_feasible("waterfilling", q.d, p.s_joint);
  if (p.prec_x > 0.0 && q.d >= 1.0 / p.prec_x) return detail::zero_rate(p, q.unit);
  double B = p.budget();
  double w_hi = 0.0;
  for (std::size_t k = 0; k < p.s.size(); ++k) w_hi = std::max(w_hi, p.u_max(k));
  double w_lo = 0.0;
  auto total_at = [&](double w) {
    double t = 0.0;
    for (std::size_t k = 0; k < p.s.size(); ++k) t += std::min(w, p.u_max(k));
    return t;
  };
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (w_lo + w_hi);
    if (mid == w_lo || mid == w_hi) break;
    (total_at(mid) < B ? w_lo : w_hi) = mid;
  }
  double w = 0.5 * (w_lo + w_hi);
  std::vector<double> u(p.s.size());
  for (std::size_t k = 0; k < p.s.size(); ++k) u[k] = std::min(w, p.u_max(k));
  // Residual into the capped level so the budget binds exactly.
  double residual = B;
  double uncapped = 0.0;
  for (std::size_t k = 0; k < p.s.size(); ++k) {
    residual -= u[k];
    if (u[k] < p.u_max(k)) uncapped += 1.0;
  }
  if (uncapped > 0.0) {
    for (std::size_t k = 0; k < p.s.size(); ++k) {
      if (u[k] < p.u_max(k)) u[k] += residual / uncapped;
    }
  }
  RdfResult out = detail::package(p, u, q.unit);
  out.alloc.lambda = 1.0 / w;
  return out;
}

/// Limit of the symmetric sum rate as the number of identical observers
/// grows:
///     1/2 log(dbar/d) + (1/d - 1/dbar) / (2 (1/s_1 - 1/sigma_x2)).
/// The fusion-mode symmetric rates converge to this expression when a = 0;
/// for a != 0 they converge to the strictly smaller value obtained by
/// replacing (1/d - 1/dbar) with (1 - a^2)(1/d - 1/sigma_x2).
inline double large_k_limit(const RdfQuery& q) {
  SteadyState ss = steady_state(q.model, q.channels);
  for (const auto& pc : ss.ch) {
    if (std::abs(pc.s - ss.ch.front().s) > 1e-12 * ss.ch.front().s) {
      throw std::invalid_argument("large_k_limit: channels are not symmetric");
    }
  }
  if (!std::isfinite(q.d) || q.d <= 0.0) {
    throw std::invalid_argument("large_k_limit: d must be finite and > 0");
  }
  if (q.d >= ss.sigma_x2.variance()) return 0.0;
  double dbar = q.model.a * q.model.a * q.d + q.model.sigma_v2;
  double u_max = 1.0 / ss.ch[0].s - ss.sigma_x2.precision();
  double nats = 0.5 * std::log(dbar / q.d) + 0.5 * (1.0 / q.d - 1.0 / dbar) / u_max;
  return to_unit(nats, q.unit);
}

/// How much the isolated encoders lose relative to a single remote encoder:
///     lhs = ceo_rdf - remote_rdf,   rhs = (K - 1)(remote_rdf - direct_rdf).
/// When 1/d >= 1/s_joint + K/sigma_x2 - K/max_k s_k (all channels active
/// under waterfilling) and the query uses fusion mode, lhs <= rhs, with
/// equality exactly in the symmetric a = 0 case (`equality` flags symmetric
/// s_k).  Under riccati-mode joint MMSE the bound can fail for a != 0: the
/// derivation leans on the precision-additive fusion identity.
struct LossReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool condition_holds = false;
  bool equality = false;
};

inline LossReport loss_bound(const RdfQuery& q) {
  SteadyState ss = steady_state(q.model, q.channels);
  LossReport rep;
  double ceo = ceo_rdf(q).rate;
  double remote = remote_rdf(q);
  double direct = direct_rdf(q);
  double K = static_cast<double>(ss.K());
  rep.lhs = ceo - remote;
  rep.rhs = (K - 1.0) * (remote - direct);
  double s_max = 0.0;
  bool symmetric = true;
  for (const auto& pc : ss.ch) {
    s_max = std::max(s_max, pc.s);
    symmetric = symmetric && std::abs(pc.s - ss.ch.front().s) <= 1e-12 * ss.ch.front().s;
  }
  rep.condition_holds =
      1.0 / q.d >= 1.0 / ss.joint_mmse(q.mode) + K * ss.sigma_x2.precision() - K / s_max;
  rep.equality = symmetric;
  return rep;
}

/// Cross-checks between the d_k and rho_k parametrizations of an allocation:
/// rho_bar_k = s_k(1 - s_k/dbar_k) with dbar_k = a^2 d_k + sigma_v2,
/// rho_max_k = s_k(1 - s_k/sigma_x2), and the per-channel rate term rewritten
/// as 1/2 log(rho_bar_k/rho_k).
struct AllocationAudit {
  std::vector<double> rho_bar_k;
  std::vector<double> rho_max_k;
  std::vector<double> term_check;  ///< in the allocation's unit
};

inline AllocationAudit allocation_conversions(const Allocation& alloc, const SteadyState& ss) {
  if (alloc.d_k.size() != ss.K()) {
    throw std::invalid_argument("allocation_conversions: channel count mismatch");
  }
  AllocationAudit audit;
  for (std::size_t k = 0; k < alloc.d_k.size(); ++k) {
    double s_k = ss.ch[k].s;
    double d_k = alloc.d_k[k];
    if (d_k < s_k || d_k > ss.sigma_x2.variance() * (1.0 + 1e-12)) {
      throw std::invalid_argument("allocation_conversions: d_k outside [s_k, sigma_x2]");
    }
    double dbar_k = ss.source.a * ss.source.a * d_k + ss.source.sigma_v2;
    double rho = s_k * (1.0 - s_k / d_k);
    double rho_bar = s_k * (1.0 - s_k / dbar_k);
    audit.rho_bar_k.push_back(rho_bar);
    audit.rho_max_k.push_back(s_k * (1.0 - s_k * ss.sigma_x2.precision()));
    audit.term_check.push_back(to_unit(0.5 * std::log(rho_bar / rho), alloc.unit));
  }
  return audit;
}

}  // namespace ceorate
