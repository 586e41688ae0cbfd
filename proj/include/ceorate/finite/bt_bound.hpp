#pragma once

#include <cstddef>
#include <cstdint>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ceorate/finite/directed_info.hpp"
#include "ceorate/finite/kernel.hpp"
#include "ceorate/finite/pmf.hpp"
#include "ceorate/rng.hpp"

namespace ceorate::finite {

/// A complete single-letter coding system: the joint law of the source and
/// its observations, one causal encoder chain per observer, and the causal
/// estimate chain applied by the decoder.
///
/// Conventions: the source pmf carries exactly one observer-0 axis per time
/// step (the source itself) plus observation axes labeled with observers
/// 1..K; encoder k introduces one axis per step, conditioned only on that
/// observer's observations up to the current time and the encoder's own
/// earlier outputs; the decoder introduces one estimate axis per step,
/// conditioned only on encoder outputs up to the current time and earlier
/// estimates.
struct BtSystem {
  Pmf source;
  std::vector<CausalKernel> encoders;
  CausalKernel decoder;

  [[nodiscard]] int horizon() const {
    int t = 0;
    for (const Axis& ax : source.axes()) t = std::max(t, ax.time);
    return t;
  }

  [[nodiscard]] int observers() const {
    return static_cast<int>(encoders.size());
  }

  /// Checks the separate-encoding structure.  A factor that conditions on
  /// anything outside its permitted information set is rejected, because the
  /// bound's algebra (and its densities) silently assumes that structure.
  void validate() const {
    const int t = horizon();
    const int K = observers();
    if (t < 1) throw std::invalid_argument("system horizon must be >= 1");
    if (K < 1) throw std::invalid_argument("system needs at least one encoder");
    for (const Axis& ax : source.axes()) {
      if (ax.observer > K) {
        throw std::invalid_argument("source axis " + ax.label() +
                                    " references observer beyond K");
      }
    }
    for (int i = 1; i <= t; ++i) {
      int count = 0;
      for (const Axis& ax : source.axes()) {
        if (ax.observer == 0 && ax.time == i) ++count;
      }
      if (count != 1) {
        throw std::invalid_argument(
            "source must carry exactly one observer-0 axis at time " +
            std::to_string(i));
      }
    }
    for (int k = 1; k <= K; ++k) validate_encoder(k);
    validate_decoder();
  }

  /// Index (into the source axes) of the source sample at time i.
  [[nodiscard]] int source_axis(int i) const {
    for (std::size_t a = 0; a < source.axes().size(); ++a) {
      if (source.axes()[a].observer == 0 && source.axes()[a].time == i) {
        return static_cast<int>(a);
      }
    }
    throw std::invalid_argument("no source axis at time " + std::to_string(i));
  }

 private:
  void validate_encoder(int k) const {
    const CausalKernel& enc = encoders[static_cast<std::size_t>(k - 1)];
    enc.validate();
    const int t = horizon();
    if (static_cast<int>(enc.steps.size()) != t) {
      throw std::invalid_argument("encoder " + std::to_string(k) + " has " +
                                  std::to_string(enc.steps.size()) +
                                  " steps, expected " + std::to_string(t));
    }
    for (int i = 1; i <= t; ++i) {
      const KernelStep& step = enc.steps[static_cast<std::size_t>(i - 1)];
      if (step.target.time != i || step.target.observer != k ||
          step.target.name != enc.steps[0].target.name) {
        throw std::invalid_argument("encoder " + std::to_string(k) +
                                    " step " + std::to_string(i) +
                                    " must target one axis name at observer " +
                                    std::to_string(k) + ", time " +
                                    std::to_string(i));
      }
      for (const Axis& g : step.given) {
        const bool own_past = g.name == step.target.name && g.observer == k &&
                              g.time < i;
        const bool observation = source.find_axis(g.name, g.time, g.observer) >= 0 &&
                                 g.observer == k && g.time <= i;
        if (!own_past && !observation) {
          throw std::invalid_argument(
              "encoder " + std::to_string(k) + " step " + std::to_string(i) +
              " conditions on " + g.label() +
              ", violating the separate-encoding structure");
        }
      }
    }
  }

  void validate_decoder() const {
    decoder.validate();
    const int t = horizon();
    const int K = observers();
    if (static_cast<int>(decoder.steps.size()) != t) {
      throw std::invalid_argument("decoder has " +
                                  std::to_string(decoder.steps.size()) +
                                  " steps, expected " + std::to_string(t));
    }
    for (int i = 1; i <= t; ++i) {
      const KernelStep& step = decoder.steps[static_cast<std::size_t>(i - 1)];
      if (step.target.time != i || step.target.observer != 0 ||
          step.target.name != decoder.steps[0].target.name) {
        throw std::invalid_argument("decoder step " + std::to_string(i) +
                                    " must target one observer-0 axis name at "
                                    "time " + std::to_string(i));
      }
      if (source.find_axis(step.target.name, i, 0) >= 0) {
        throw std::invalid_argument("decoder axis name collides with source "
                                    "axis " + step.target.label());
      }
      for (const Axis& g : step.given) {
        const bool own_past = g.name == step.target.name && g.observer == 0 &&
                              g.time < i;
        bool codeword = false;
        for (int k = 1; k <= K; ++k) {
          const CausalKernel& enc = encoders[static_cast<std::size_t>(k - 1)];
          if (g.name == enc.steps[0].target.name && g.observer == k &&
              g.time <= i) {
            codeword = true;
          }
        }
        if (!own_past && !codeword) {
          throw std::invalid_argument(
              "decoder step " + std::to_string(i) + " conditions on " +
              g.label() + "; decoders see only codewords and own estimates");
        }
      }
    }
  }
};

/// The full joint law of (source, observations, codewords, estimates),
/// composed factor by factor in causal order.
inline Pmf build_joint(const BtSystem& sys) {
  sys.validate();
  Pmf joint = sys.source;
  const int t = sys.horizon();
  for (int i = 1; i <= t; ++i) {
    for (const CausalKernel& enc : sys.encoders) {
      joint = extend(joint, enc.steps[static_cast<std::size_t>(i - 1)]);
    }
    joint = extend(joint, sys.decoder.steps[static_cast<std::size_t>(i - 1)]);
  }
  return joint;
}

/// A per-outcome scalar over a marginal of the joint, together with the
/// marginal itself (whose probabilities weight the outcomes).  Outcomes of
/// probability zero carry value 0 by convention, so expectations and event
/// probabilities never see them.
struct DensityTable {
  Pmf support;
  std::vector<double> value;

  [[nodiscard]] double expectation() const {
    double total = 0.0;
    for (std::size_t c = 0; c < value.size(); ++c) {
      total += support.prob(c) * value[c];
    }
    return total;
  }
};

namespace detail {

/// Table of log P(T | C) - log P(T | D) over the marginal on T, C, D.
inline DensityTable log_ratio_table(const Pmf& joint,
                                    const std::vector<int>& t_axes,
                                    const std::vector<int>& c_axes,
                                    const std::vector<int>& d_axes) {
  std::vector<int> all = t_axes;
  auto push_new = [&all](const std::vector<int>& axes) {
    for (int a : axes) {
      if (std::find(all.begin(), all.end(), a) == all.end()) all.push_back(a);
    }
  };
  push_new(c_axes);
  push_new(d_axes);
  std::vector<int> tc = t_axes;
  tc.insert(tc.end(), c_axes.begin(), c_axes.end());
  std::vector<int> td = t_axes;
  td.insert(td.end(), d_axes.begin(), d_axes.end());

  Pmf support = joint.marginal(all);
  const Pmf m_tc = support.marginal(support.local(joint, tc));
  const Pmf m_c = support.marginal(support.local(joint, c_axes));
  const Pmf m_td = support.marginal(support.local(joint, td));
  const Pmf m_d = support.marginal(support.local(joint, d_axes));
  const auto proj_tc = support.projection_onto(m_tc);
  const auto proj_c = support.projection_onto(m_c);
  const auto proj_td = support.projection_onto(m_td);
  const auto proj_d = support.projection_onto(m_d);

  std::vector<double> value(support.size(), 0.0);
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support.prob(i) == 0.0) continue;
    const double pc = c_axes.empty() ? 1.0 : m_c.prob(support.project(i, proj_c));
    const double pd = d_axes.empty() ? 1.0 : m_d.prob(support.project(i, proj_d));
    value[i] = std::log(m_tc.prob(support.project(i, proj_tc)) * pd /
                        (m_td.prob(support.project(i, proj_td)) * pc));
  }
  return DensityTable{std::move(support), std::move(value)};
}

}  // namespace detail

/// Per-step conditional information densities of the composed system:
/// iota[i-1][k-1] carries the encoding density of observer k at time i, and
/// jmath[i-1][j] carries the decoding density of the observer at position j
/// of the permutation `pi` (0-based positions, `pi[j]` a 1-based observer).
struct DensityTables {
  Pmf joint;
  std::vector<std::vector<DensityTable>> iota;
  std::vector<std::vector<DensityTable>> jmath;
};

inline DensityTables info_density_tables(const BtSystem& sys,
                                         const std::vector<int>& pi) {
  const int t = sys.horizon();
  const int K = sys.observers();
  if (static_cast<int>(pi.size()) != K) {
    throw std::invalid_argument("permutation must list all K observers");
  }
  std::vector<bool> seen(static_cast<std::size_t>(K), false);
  for (int o : pi) {
    if (o < 1 || o > K || seen[static_cast<std::size_t>(o - 1)]) {
      throw std::invalid_argument("permutation must be a bijection on 1..K");
    }
    seen[static_cast<std::size_t>(o - 1)] = true;
  }

  DensityTables out;
  out.joint = build_joint(sys);
  const Pmf& joint = out.joint;

  // Axis bookkeeping for the codeword processes.
  auto u_axis = [&](int k, int i) {
    const Axis& ax =
        sys.encoders[static_cast<std::size_t>(k - 1)].steps[0].target;
    const int idx = joint.find_axis(ax.name, i, k);
    if (idx < 0) throw std::logic_error("codeword axis missing from joint");
    return idx;
  };
  auto y_axes_up_to = [&](int k, int i) {
    std::vector<int> axes;
    for (std::size_t a = 0; a < sys.source.axes().size(); ++a) {
      const Axis& ax = sys.source.axes()[a];
      if (ax.observer == k && ax.time <= i) {
        axes.push_back(joint.find_axis(ax.name, ax.time, ax.observer));
      }
    }
    return axes;
  };

  out.iota.resize(static_cast<std::size_t>(t));
  out.jmath.resize(static_cast<std::size_t>(t));
  for (int i = 1; i <= t; ++i) {
    auto& iota_row = out.iota[static_cast<std::size_t>(i - 1)];
    for (int k = 1; k <= K; ++k) {
      std::vector<int> own_past;
      for (int j = 1; j < i; ++j) own_past.push_back(u_axis(k, j));
      std::vector<int> cond = y_axes_up_to(k, i);
      cond.insert(cond.end(), own_past.begin(), own_past.end());
      iota_row.push_back(detail::log_ratio_table(joint, {u_axis(k, i)}, cond,
                                                 own_past));
    }
    auto& jmath_row = out.jmath[static_cast<std::size_t>(i - 1)];
    std::vector<int> all_past;
    for (int k = 1; k <= K; ++k) {
      for (int j = 1; j < i; ++j) all_past.push_back(u_axis(k, j));
    }
    std::vector<int> predecessors;
    for (int j = 0; j < K; ++j) {
      const int o = pi[static_cast<std::size_t>(j)];
      std::vector<int> cond = predecessors;
      cond.insert(cond.end(), all_past.begin(), all_past.end());
      std::vector<int> own_past;
      for (int m = 1; m < i; ++m) own_past.push_back(u_axis(o, m));
      jmath_row.push_back(detail::log_ratio_table(joint, {u_axis(o, i)}, cond,
                                                  own_past));
      predecessors.push_back(u_axis(o, i));
    }
  }
  return out;
}

/// Code parameters of the nonasymptotic bound.  L, M, alpha, beta are
/// indexed [time][observer] (0-based), with L and M the code sizes of the
/// n-letter code; `pi` lists 1-based observers in decoding order; `d` holds
/// the per-time excess-distortion thresholds; `sd` is the single-letter
/// distortion table, source coordinate major.
struct CodeParams {
  int n = 1;
  std::vector<std::vector<long long>> L, M;
  std::vector<std::vector<double>> alpha, beta;
  std::vector<int> pi;
  std::vector<double> d;
  std::vector<double> sd;

  void validate(int t, int K) const {
    if (n < 1) throw std::invalid_argument("block length n must be >= 1");
    auto check_shape = [&](std::size_t rows, std::size_t cols, const char* who) {
      if (rows != static_cast<std::size_t>(t)) {
        throw std::invalid_argument(std::string(who) + " must have t rows");
      }
      if (cols != static_cast<std::size_t>(K)) {
        throw std::invalid_argument(std::string(who) + " must have K columns");
      }
    };
    for (int i = 0; i < t; ++i) {
      check_shape(L.size(), L[static_cast<std::size_t>(i)].size(), "L");
      check_shape(M.size(), M[static_cast<std::size_t>(i)].size(), "M");
      check_shape(alpha.size(), alpha[static_cast<std::size_t>(i)].size(), "alpha");
      check_shape(beta.size(), beta[static_cast<std::size_t>(i)].size(), "beta");
      for (int k = 0; k < K; ++k) {
        const long long l = L[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        const long long m = M[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        if (m < 1 || l < m) {
          throw std::invalid_argument("code sizes must satisfy L >= M >= 1");
        }
      }
    }
    if (static_cast<int>(d.size()) != t) {
      throw std::invalid_argument("d must list one threshold per time step");
    }
  }
};

/// Exact evaluation of the excess/threshold event and the weakened bound:
/// epsilon <= Pr[event] + gamma.  The per-family probabilities expose which
/// of the three unions (distortion, encoding density, decoding density)
/// carries the mass.
struct BtBoundReport {
  double prob_event = 0.0;
  double prob_dist = 0.0;
  double prob_iota = 0.0;
  double prob_jmath = 0.0;
  double gamma = 0.0;
  double epsilon_bound = 0.0;
  std::size_t outcomes = 0;
};

namespace detail {

/// Per-outcome statistics of the composed single-letter joint, projected so
/// they can be read off a flat outcome index: distortions per time step,
/// then encoding densities per (time, observer), then decoding densities per
/// (time, permutation position).
struct StatLayout {
  const Pmf* joint = nullptr;
  int t = 0, K = 0;
  // Projection strides plus value table per statistic, aligned as
  // [dist_1..dist_t, iota_{1,1}..iota_{t,K}, jmath_{1,1}..jmath_{t,K}].
  std::vector<std::vector<std::size_t>> proj;
  std::vector<std::vector<double>> value;

  [[nodiscard]] std::size_t dist_at(int i) const {
    return static_cast<std::size_t>(i);
  }
  [[nodiscard]] std::size_t iota_at(int i, int k) const {
    return static_cast<std::size_t>(t + i * K + k);
  }
  [[nodiscard]] std::size_t jmath_at(int i, int j) const {
    return static_cast<std::size_t>(t + t * K + i * K + j);
  }
  [[nodiscard]] std::size_t count() const { return proj.size(); }

  [[nodiscard]] double stat(std::size_t which, std::size_t outcome) const {
    return value[which][joint->project(outcome, proj[which])];
  }
};

inline StatLayout make_stat_layout(const BtSystem& sys,
                                   const DensityTables& tables,
                                   const CodeParams& params) {
  const int t = sys.horizon();
  const int K = sys.observers();
  StatLayout lay;
  lay.joint = &tables.joint;
  lay.t = t;
  lay.K = K;

  const Pmf& joint = tables.joint;
  const std::string xhat_name = sys.decoder.steps[0].target.name;
  const int x_card =
      sys.source.axes()[static_cast<std::size_t>(sys.source_axis(1))].card;
  const int xhat_card = sys.decoder.steps[0].target.card;
  if (params.sd.size() != static_cast<std::size_t>(x_card) *
                              static_cast<std::size_t>(xhat_card)) {
    throw std::invalid_argument("distortion table must have |X|*|Xhat| entries");
  }
  for (int i = 1; i <= t; ++i) {
    const Axis& x_ax =
        sys.source.axes()[static_cast<std::size_t>(sys.source_axis(i))];
    if (x_ax.card != x_card || sys.decoder.steps[static_cast<std::size_t>(i - 1)]
                                       .target.card != xhat_card) {
      throw std::invalid_argument(
          "source and estimate alphabets must not change over time");
    }
    const int xi = joint.find_axis(x_ax.name, i, 0);
    const int xh = joint.find_axis(xhat_name, i, 0);
    // The source axis precedes the appended estimate axis, so the marginal
    // over the pair is source-major, matching the distortion table.
    Pmf support = joint.marginal({xi, xh});
    std::vector<double> value(params.sd.begin(), params.sd.end());
    lay.proj.push_back(joint.projection_onto(support));
    lay.value.push_back(std::move(value));
  }
  for (int i = 0; i < t; ++i) {
    for (int k = 0; k < K; ++k) {
      const DensityTable& tab =
          tables.iota[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      lay.proj.push_back(joint.projection_onto(tab.support));
      lay.value.push_back(tab.value);
    }
  }
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < K; ++j) {
      const DensityTable& tab =
          tables.jmath[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      lay.proj.push_back(joint.projection_onto(tab.support));
      lay.value.push_back(tab.value);
    }
  }
  return lay;
}

/// Which of the three event families a statistic vector trips.
struct EventHit {
  bool dist = false;
  bool iota = false;
  bool jmath = false;
  [[nodiscard]] bool any() const { return dist || iota || jmath; }
};

inline EventHit classify_event(const StatLayout& lay, const CodeParams& params,
                               const double* sums) {
  EventHit hit;
  const double n = static_cast<double>(params.n);
  for (int i = 0; i < lay.t; ++i) {
    if (sums[lay.dist_at(i)] > n * params.d[static_cast<std::size_t>(i)]) {
      hit.dist = true;
    }
    for (int k = 0; k < lay.K; ++k) {
      const auto si = static_cast<std::size_t>(i);
      const auto sk = static_cast<std::size_t>(k);
      if (sums[lay.iota_at(i, k)] >
          std::log(static_cast<double>(params.L[si][sk])) - params.alpha[si][sk]) {
        hit.iota = true;
      }
    }
    for (int j = 0; j < lay.K; ++j) {
      const auto si = static_cast<std::size_t>(i);
      const auto so = static_cast<std::size_t>(params.pi[static_cast<std::size_t>(j)] - 1);
      const double threshold = std::log(static_cast<double>(params.L[si][so]) /
                                        static_cast<double>(params.M[si][so])) +
                               params.beta[si][so];
      if (sums[lay.jmath_at(i, j)] < threshold) hit.jmath = true;
    }
  }
  return hit;
}

/// Depth-first enumeration of n-fold product outcomes, accumulating the
/// probability product and per-statistic sums; `leaf` receives each tuple.
template <typename Leaf>
void walk_product(const StatLayout& lay, int n, const Leaf& leaf) {
  const Pmf& joint = *lay.joint;
  const std::size_t N = joint.size();
  const std::size_t stats = lay.count();

  if (n == 1) {
    // Single pass; statistics are read straight off the projections so no
    // cache is needed even for joints near the enumeration cap.
    std::vector<double> sums(stats);
    for (std::size_t w = 0; w < N; ++w) {
      const double p = joint.prob(w);
      if (p == 0.0) continue;
      for (std::size_t m = 0; m < stats; ++m) sums[m] = lay.stat(m, w);
      leaf(p, sums.data());
    }
    return;
  }

  // For n > 1 the single-letter space is small (N^n is capped), so
  // per-outcome statistics are precomputed once and the inner loop is all
  // additions.
  std::vector<double> stat_cache(N * stats);
  for (std::size_t w = 0; w < N; ++w) {
    for (std::size_t m = 0; m < stats; ++m) {
      stat_cache[w * stats + m] = lay.stat(m, w);
    }
  }

  std::vector<double> sums((static_cast<std::size_t>(n) + 1) * stats, 0.0);
  std::vector<double> probs(static_cast<std::size_t>(n) + 1, 1.0);
  std::function<void(int)> descend = [&](int level) {
    const std::size_t base = static_cast<std::size_t>(level) * stats;
    for (std::size_t w = 0; w < N; ++w) {
      const double p = joint.prob(w);
      if (p == 0.0) continue;
      probs[static_cast<std::size_t>(level) + 1] =
          probs[static_cast<std::size_t>(level)] * p;
      for (std::size_t m = 0; m < stats; ++m) {
        sums[base + stats + m] = sums[base + m] + stat_cache[w * stats + m];
      }
      if (level + 1 == n) {
        leaf(probs[static_cast<std::size_t>(level) + 1],
             &sums[base + stats]);
      } else {
        descend(level + 1);
      }
    }
  };
  descend(0);
}

inline void require_enumerable(std::size_t single, int n) {
  std::size_t total = 1;
  for (int j = 0; j < n; ++j) {
    if (total > kMaxOutcomes / single) {
      throw std::runtime_error(
          "exact enumeration needs " + std::to_string(single) + "^" +
          std::to_string(n) +
          " outcomes, beyond the 2^26 cap; use mc_event_probability instead");
    }
    total *= single;
  }
}

}  // namespace detail

/// The constant gamma of the weakened bound.  The subset sum over decoding
/// slacks factorizes over observers, giving per-step factors
/// prod_k (1 + e^{-beta}) * prod_k (1 + e^{-alpha}).
inline double bt_gamma(const CodeParams& params, int t, int K) {
  double denom = 1.0;
  for (int i = 0; i < t; ++i) {
    for (int k = 0; k < K; ++k) {
      const auto si = static_cast<std::size_t>(i);
      const auto sk = static_cast<std::size_t>(k);
      denom *= (1.0 + std::exp(-params.beta[si][sk])) *
               (1.0 + std::exp(-params.alpha[si][sk]));
    }
  }
  return 1.0 - 1.0 / denom;
}

/// Exact evaluation of the weakened nonasymptotic bound for the n-fold
/// product system: epsilon <= Pr[event] + gamma, enumerated over every
/// outcome tuple of (source, observations, codewords, estimates).
inline BtBoundReport evaluate_bt_bound(const BtSystem& sys,
                                       const CodeParams& params) {
  const int t = sys.horizon();
  const int K = sys.observers();
  params.validate(t, K);
  const DensityTables tables = info_density_tables(sys, params.pi);
  const detail::StatLayout lay = detail::make_stat_layout(sys, tables, params);
  detail::require_enumerable(tables.joint.size(), params.n);

  BtBoundReport report;
  report.gamma = bt_gamma(params, t, K);
  detail::walk_product(lay, params.n, [&](double p, const double* stat_sums) {
    ++report.outcomes;
    const detail::EventHit hit = detail::classify_event(lay, params, stat_sums);
    if (hit.dist) report.prob_dist += p;
    if (hit.iota) report.prob_iota += p;
    if (hit.jmath) report.prob_jmath += p;
    if (hit.any()) report.prob_event += p;
  });
  report.epsilon_bound = std::min(1.0, report.prob_event + report.gamma);
  return report;
}

/// Exact evaluation of the sharp success-probability bound: the expectation
/// of the product of per-observer encoding factors and the per-step decoding
/// factor, restricted to tuples that pass the decoding thresholds and the
/// distortion test.  Always at least (1 - Pr[event]) * (1 - gamma), hence at
/// least 1 - epsilon_bound of the weakened form.
inline double evaluate_bt_sharp(const BtSystem& sys, const CodeParams& params) {
  const int t = sys.horizon();
  const int K = sys.observers();
  params.validate(t, K);
  const DensityTables tables = info_density_tables(sys, params.pi);
  const detail::StatLayout lay = detail::make_stat_layout(sys, tables, params);
  detail::require_enumerable(tables.joint.size(), params.n);

  // Per-step decoding denominator: sum over observer subsets of e^{-sum beta}.
  double denom = 1.0;
  for (int i = 0; i < t; ++i) {
    for (int k = 0; k < K; ++k) {
      denom *= 1.0 + std::exp(-params.beta[static_cast<std::size_t>(i)]
                                          [static_cast<std::size_t>(k)]);
    }
  }

  const double n = static_cast<double>(params.n);
  double total = 0.0;
  detail::walk_product(lay, params.n, [&](double p, const double* sums) {
    for (int i = 0; i < t; ++i) {
      if (sums[lay.dist_at(i)] > n * params.d[static_cast<std::size_t>(i)]) {
        return;
      }
      for (int j = 0; j < K; ++j) {
        const auto si = static_cast<std::size_t>(i);
        const auto so =
            static_cast<std::size_t>(params.pi[static_cast<std::size_t>(j)] - 1);
        const double threshold =
            std::log(static_cast<double>(params.L[si][so]) /
                     static_cast<double>(params.M[si][so])) +
            params.beta[si][so];
        if (sums[lay.jmath_at(i, j)] < threshold) return;
      }
    }
    double factor = 1.0;
    for (int i = 0; i < t && factor > 0.0; ++i) {
      for (int k = 0; k < K; ++k) {
        const auto si = static_cast<std::size_t>(i);
        const auto sk = static_cast<std::size_t>(k);
        const double inv_l = 1.0 / static_cast<double>(params.L[si][sk]);
        const double excess =
            sums[lay.iota_at(i, k)] +
            std::log(inv_l);  // iota - log L, kept in log space for stability
        factor /= std::exp(excess) + (1.0 - inv_l);
      }
    }
    total += p * factor / denom;
  });
  return total;
}

/// Monte Carlo estimate of Pr[event] with a counter-based stream: trial m,
/// component j always consumes the same draw, so estimates are bit-identical
/// across thread counts and runs.
struct McEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  long long trials = 0;
};

inline McEstimate mc_event_probability(const BtSystem& sys,
                                       const CodeParams& params,
                                       long long trials, std::uint64_t seed) {
  const int t = sys.horizon();
  const int K = sys.observers();
  params.validate(t, K);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const DensityTables tables = info_density_tables(sys, params.pi);
  const detail::StatLayout lay = detail::make_stat_layout(sys, tables, params);
  const Pmf& joint = tables.joint;

  // Inverse-CDF sampling over the positive-probability outcomes.
  std::vector<double> cdf;
  std::vector<std::size_t> outcome;
  double acc = 0.0;
  for (std::size_t w = 0; w < joint.size(); ++w) {
    if (joint.prob(w) == 0.0) continue;
    acc += joint.prob(w);
    cdf.push_back(acc);
    outcome.push_back(w);
  }

  long long hits = 0;
  std::vector<double> sums(lay.count());
  for (long long m = 0; m < trials; ++m) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (int j = 0; j < params.n; ++j) {
      const double u = CounterRng::uniform(seed, static_cast<std::uint64_t>(m),
                                           static_cast<std::uint64_t>(j));
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u * acc);
      const std::size_t w =
          outcome[std::min(static_cast<std::size_t>(it - cdf.begin()),
                           outcome.size() - 1)];
      for (std::size_t s = 0; s < lay.count(); ++s) sums[s] += lay.stat(s, w);
    }
    if (detail::classify_event(lay, params, sums.data()).any()) ++hits;
  }
  McEstimate est;
  est.trials = trials;
  est.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.p_hat * (1.0 - est.p_hat) /
                            static_cast<double>(trials));
  return est;
}

/// Achievable rate of each observer under decoding order `pi`: the causally
/// conditioned directed information from that observer's observations to its
/// codewords, given the codewords of earlier-decoded observers and the
/// one-step-delayed codewords of everyone.  Rates are returned indexed by
/// observer (0-based); their sum equals the directed information from all
/// observations to all codewords.
inline std::vector<double> achievable_rates(const BtSystem& sys,
                                            const std::vector<int>& pi) {
  const int K = sys.observers();
  const Pmf joint = build_joint(sys);
  if (static_cast<int>(pi.size()) != K) {
    throw std::invalid_argument("permutation must list all K observers");
  }

  auto u_axes = [&](int k) {
    ProcessRef ref;
    const Axis& ax = sys.encoders[static_cast<std::size_t>(k - 1)].steps[0].target;
    for (int i = 1; i <= sys.horizon(); ++i) {
      ref.axes.push_back(joint.find_axis(ax.name, i, k));
    }
    return ref;
  };
  auto y_axes = [&](int k) {
    ProcessRef ref;
    for (const Axis& ax : sys.source.axes()) {
      if (ax.observer == k) {
        ref.axes.push_back(joint.find_axis(ax.name, ax.time, ax.observer));
      }
    }
    return ref;
  };

  ProcessRef everyone;
  for (int k = 1; k <= K; ++k) {
    const ProcessRef u = u_axes(k);
    everyone.axes.insert(everyone.axes.end(), u.axes.begin(), u.axes.end());
  }
  everyone.delayed = true;

  std::vector<double> rates(static_cast<std::size_t>(K), 0.0);
  ProcessRef predecessors;
  for (int j = 0; j < K; ++j) {
    const int o = pi[static_cast<std::size_t>(j)];
    if (o < 1 || o > K) {
      throw std::invalid_argument("permutation must be a bijection on 1..K");
    }
    std::vector<ProcessRef> given;
    if (!predecessors.axes.empty()) given.push_back(predecessors);
    given.push_back(everyone);
    rates[static_cast<std::size_t>(o - 1)] =
        causally_conditioned_di(joint, y_axes(o), u_axes(o), given);
    const ProcessRef u = u_axes(o);
    predecessors.axes.insert(predecessors.axes.end(), u.axes.begin(),
                             u.axes.end());
  }
  return rates;
}

/// Code sizes and slacks that drive the bound to zero as n grows: for slack
/// delta the thresholds are alpha = beta = n*delta, log L covers the
/// encoding rate n*I + 2n*delta, and log M covers log L - n*D + 2n*delta,
/// clamped into [1, L].
struct CodeSizes {
  std::vector<std::vector<long long>> L, M;
  std::vector<std::vector<double>> alpha, beta;
};

inline CodeSizes select_code_sizes(const BtSystem& sys, double delta, int n,
                                   const std::vector<int>& pi) {
  if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
  if (n < 1) throw std::invalid_argument("block length n must be >= 1");
  const int t = sys.horizon();
  const int K = sys.observers();
  const DensityTables tables = info_density_tables(sys, pi);

  auto size_from_log = [](double log_size) {
    if (log_size > 62.0 * std::numbers::ln2) {
      throw std::invalid_argument("requested code size overflows 64-bit range");
    }
    return static_cast<long long>(
        std::max(1.0, std::ceil(std::exp(std::max(0.0, log_size)))));
  };

  CodeSizes out;
  const double slack = static_cast<double>(n) * delta;
  out.alpha.assign(static_cast<std::size_t>(t),
                   std::vector<double>(static_cast<std::size_t>(K), slack));
  out.beta = out.alpha;
  out.L.resize(static_cast<std::size_t>(t));
  out.M.assign(static_cast<std::size_t>(t),
               std::vector<long long>(static_cast<std::size_t>(K), 1));
  for (int i = 0; i < t; ++i) {
    auto& row = out.L[static_cast<std::size_t>(i)];
    row.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      const double info = tables.iota[static_cast<std::size_t>(i)]
                                     [static_cast<std::size_t>(k)]
                                         .expectation();
      row[static_cast<std::size_t>(k)] =
          size_from_log(static_cast<double>(n) * info + 2.0 * slack);
    }
    for (int j = 0; j < K; ++j) {
      const auto so = static_cast<std::size_t>(pi[static_cast<std::size_t>(j)] - 1);
      const double div = tables.jmath[static_cast<std::size_t>(i)]
                                     [static_cast<std::size_t>(j)]
                                         .expectation();
      const long long l = row[so];
      const double log_m =
          std::log(static_cast<double>(l)) - static_cast<double>(n) * div +
          2.0 * slack;
      out.M[static_cast<std::size_t>(i)][so] =
          std::min(l, size_from_log(log_m));
    }
  }
  return out;
}

}  // namespace ceorate::finite
