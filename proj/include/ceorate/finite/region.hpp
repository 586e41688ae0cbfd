#pragma once

#include <cstdint>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ceorate/finite/pmf.hpp"
#include "ceorate/rng.hpp"

namespace ceorate::finite {

namespace detail {

/// Phase-1 simplex feasibility test for { A x = b, x >= 0 } with b >= 0.
/// Bland's rule keeps the pivoting finite and deterministic.  Sized for the
/// tiny systems of the region check (a handful of rows).
inline bool lp_feasible(const std::vector<std::vector<double>>& a,
                        const std::vector<double>& b, double tol = 1e-10) {
  const std::size_t m = a.size();
  const std::size_t n = m == 0 ? 0 : a[0].size();
  // Tableau [A | I | b] with the artificial identity basis.
  std::vector<std::vector<double>> tab(m, std::vector<double>(n + m + 1, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0.0) throw std::invalid_argument("lp_feasible requires b >= 0");
    for (std::size_t j = 0; j < n; ++j) tab[i][j] = a[i][j];
    tab[i][n + i] = 1.0;
    tab[i][n + m] = b[i];
    basis[i] = n + i;
  }
  // Minimize the sum of artificials: cost 1 on columns n..n+m-1.
  auto reduced_cost = [&](std::size_t j) {
    double c = j >= n ? 1.0 : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] >= n) c -= tab[i][j];
    }
    return c;
  };
  for (;;) {
    std::size_t enter = n + m;
    for (std::size_t j = 0; j < n + m; ++j) {
      if (reduced_cost(j) < -tol) {
        enter = j;
        break;  // Bland's rule: smallest eligible index
      }
    }
    if (enter == n + m) break;
    std::size_t leave = m;
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (tab[i][enter] <= tol) continue;
      const double ratio = tab[i][n + m] / tab[i][enter];
      if (leave == m || ratio < best - 1e-15 ||
          (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m) break;  // unbounded direction; cannot improve feasibility
    const double pivot = tab[leave][enter];
    for (double& v : tab[leave]) v /= pivot;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || tab[i][enter] == 0.0) continue;
      const double factor = tab[i][enter];
      for (std::size_t j = 0; j <= n + m; ++j) {
        tab[i][j] -= factor * tab[leave][j];
      }
    }
    basis[leave] = enter;
  }
  double artificial = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] >= n) artificial += tab[i][n + m];
  }
  return artificial <= tol;
}

}  // namespace detail

/// Outcome of comparing the subset characterization of the achievable rate
/// region against the permutation-corner characterization on sampled points.
///
/// Membership tests: the subset region requires every nonempty observer set
/// to carry more sum rate than its conditional mutual information; the
/// corner form requires the point to dominate a convex combination of the
/// permutation corners (time sharing between decoding orders).  Points
/// within `margin` of any subset boundary are skipped, as both definitions
/// use strict inequalities.  `union_only_mismatches` counts points that are
/// inside the region yet dominate no single corner — the reason the corner
/// form needs convex combinations rather than a plain union.
struct RegionReport {
  int observers = 0;
  std::vector<double> subset_mi;             // indexed by observer bitmask
  std::vector<std::vector<double>> corners;  // per permutation, by observer
  long long sampled = 0;
  long long tested = 0;
  long long boundary_skipped = 0;
  long long agreements = 0;
  long long disagreements = 0;
  long long union_only_mismatches = 0;
  bool all_agree = true;
};

/// Strict subset-form membership: every nonempty observer set must carry
/// more sum rate than its conditional mutual information.
inline bool in_subset_region(const RegionReport& region,
                             const std::vector<double>& point) {
  const unsigned full = (1u << region.observers) - 1u;
  for (unsigned mask = 1; mask <= full; ++mask) {
    double sum = 0.0;
    for (int k = 0; k < region.observers; ++k) {
      if (mask & (1u << k)) sum += point[static_cast<std::size_t>(k)];
    }
    if (sum <= region.subset_mi[mask]) return false;
  }
  return true;
}

/// Distance of the point to the nearest subset-form boundary hyperplane
/// (in sum-rate terms); used to skip points too close to call.
inline double subset_boundary_gap(const RegionReport& region,
                                  const std::vector<double>& point) {
  const unsigned full = (1u << region.observers) - 1u;
  double gap = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask <= full; ++mask) {
    double sum = 0.0;
    for (int k = 0; k < region.observers; ++k) {
      if (mask & (1u << k)) sum += point[static_cast<std::size_t>(k)];
    }
    gap = std::min(gap, std::abs(sum - region.subset_mi[mask]));
  }
  return gap;
}

/// Corner-form membership: the point must dominate some convex combination
/// of the permutation corners (time sharing between decoding orders), i.e.
/// sum_pi lambda_pi corner_pi + slack = point with lambda on the simplex.
inline bool in_corner_hull(const RegionReport& region,
                           const std::vector<double>& point) {
  const int K = region.observers;
  const std::size_t n_corners = region.corners.size();
  std::vector<std::vector<double>> a(
      static_cast<std::size_t>(K + 1),
      std::vector<double>(n_corners + static_cast<std::size_t>(K), 0.0));
  std::vector<double> b(static_cast<std::size_t>(K + 1), 0.0);
  for (int k = 0; k < K; ++k) {
    for (std::size_t c = 0; c < n_corners; ++c) {
      a[static_cast<std::size_t>(k)][c] =
          region.corners[c][static_cast<std::size_t>(k)];
    }
    a[static_cast<std::size_t>(k)][n_corners + static_cast<std::size_t>(k)] = 1.0;
    b[static_cast<std::size_t>(k)] = point[static_cast<std::size_t>(k)];
  }
  for (std::size_t c = 0; c < n_corners; ++c) {
    a[static_cast<std::size_t>(K)][c] = 1.0;
  }
  b[static_cast<std::size_t>(K)] = 1.0;
  return detail::lp_feasible(a, b);
}

/// Whether the point strictly dominates at least one single corner.  Points
/// in the region that fail this are reachable only by time sharing.
inline bool dominates_some_corner(const RegionReport& region,
                                  const std::vector<double>& point) {
  for (const auto& corner : region.corners) {
    bool dominates = true;
    for (int k = 0; k < region.observers; ++k) {
      if (point[static_cast<std::size_t>(k)] <=
          corner[static_cast<std::size_t>(k)]) {
        dominates = false;
        break;
      }
    }
    if (dominates) return true;
  }
  return false;
}

/// Computes both characterizations of the rate region spanned by a
/// single-letter joint: the conditional-information table over observer
/// subsets and the corner point of every decoding order.  `y_axes[k]` and
/// `u_axes[k]` are the observation and codeword axes of observer k+1.
inline RegionReport region_characterize(const Pmf& joint,
                                        const std::vector<int>& y_axes,
                                        const std::vector<int>& u_axes) {
  const int K = static_cast<int>(y_axes.size());
  if (K < 1 || u_axes.size() != y_axes.size()) {
    throw std::invalid_argument(
        "region_characterize needs matching nonempty y/u axis lists");
  }
  if (K > 4) {
    throw std::invalid_argument(
        "region_characterize enumerates subsets and permutations; K <= 4");
  }

  RegionReport report;
  report.observers = K;

  auto gather = [&](unsigned mask, const std::vector<int>& axes) {
    std::vector<int> out;
    for (int k = 0; k < K; ++k) {
      if (mask & (1u << k)) out.push_back(axes[static_cast<std::size_t>(k)]);
    }
    return out;
  };

  const unsigned full = (1u << K) - 1u;
  report.subset_mi.assign(full + 1, 0.0);
  for (unsigned mask = 1; mask <= full; ++mask) {
    report.subset_mi[mask] = joint.conditional_mi(
        gather(mask, y_axes), gather(mask, u_axes), gather(full & ~mask, u_axes));
  }

  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  do {
    std::vector<double> corner(static_cast<std::size_t>(K), 0.0);
    std::vector<int> prev;
    for (int j = 0; j < K; ++j) {
      const int o = order[static_cast<std::size_t>(j)];
      corner[static_cast<std::size_t>(o)] = joint.conditional_mi(
          {y_axes[static_cast<std::size_t>(o)]},
          {u_axes[static_cast<std::size_t>(o)]}, prev);
      prev.push_back(u_axes[static_cast<std::size_t>(o)]);
    }
    report.corners.push_back(std::move(corner));
  } while (std::next_permutation(order.begin(), order.end()));
  return report;
}

/// Samples rate points around the region spanned by the given single-letter
/// joint (horizon 1) and checks that the two region characterizations agree
/// point by point.
inline RegionReport region_equivalence(const Pmf& joint,
                                       const std::vector<int>& y_axes,
                                       const std::vector<int>& u_axes,
                                       long long samples, std::uint64_t seed,
                                       double margin = 1e-9) {
  RegionReport report = region_characterize(joint, y_axes, u_axes);
  const int K = report.observers;

  // Sampling box: each coordinate up to a third more than the largest
  // single-observer requirement, so points land on both sides.
  std::vector<double> hi(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    double top = 0.0;
    for (const auto& corner : report.corners) {
      top = std::max(top, corner[static_cast<std::size_t>(k)]);
    }
    hi[static_cast<std::size_t>(k)] = 1.3 * top + 0.05;
  }

  std::vector<double> point(static_cast<std::size_t>(K));
  for (long long s = 0; s < samples; ++s) {
    ++report.sampled;
    for (int k = 0; k < K; ++k) {
      point[static_cast<std::size_t>(k)] =
          hi[static_cast<std::size_t>(k)] *
          CounterRng::uniform(seed, static_cast<std::uint64_t>(s),
                              static_cast<std::uint64_t>(k));
    }
    if (subset_boundary_gap(report, point) <= margin) {
      ++report.boundary_skipped;
      continue;
    }
    ++report.tested;

    const bool in_subset = in_subset_region(report, point);
    const bool in_hull = in_corner_hull(report, point);
    if (in_subset == in_hull) {
      ++report.agreements;
    } else {
      ++report.disagreements;
      report.all_agree = false;
    }
    if (in_subset && !dominates_some_corner(report, point)) {
      ++report.union_only_mismatches;
    }
  }
  return report;
}

}  // namespace ceorate::finite
