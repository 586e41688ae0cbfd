#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "ceorate/finite/pmf.hpp"

namespace ceorate::finite {

/// A process inside a joint pmf: the axis indices that carry its samples
/// (any number per time step), plus an optional one-step conditioning delay.
/// With `delayed` set, conditioning at step i uses the samples up to time
/// i - 1 instead of i.
struct ProcessRef {
  std::vector<int> axes;
  bool delayed = false;
};

namespace detail {

/// Axes of the process with time <= limit (or < limit when strict).
inline void collect_up_to(const Pmf& joint, const ProcessRef& proc, int limit,
                          bool strict, std::vector<int>* out) {
  for (int a : proc.axes) {
    const int time = joint.axes().at(static_cast<std::size_t>(a)).time;
    if (strict ? time < limit : time <= limit) out->push_back(a);
  }
}

inline int max_time(const Pmf& joint, const std::vector<int>& axes) {
  int t = 0;
  for (int a : axes) {
    t = std::max(t, joint.axes().at(static_cast<std::size_t>(a)).time);
  }
  return t;
}

}  // namespace detail

/// Causally conditioned directed information
///   I(From -> To || Given) = sum_i I(From_[i]; To_i | To_[i-1], Given_[i])
/// in nats, with each conditioning process contributing its samples up to
/// time i (or i - 1 for delayed processes).  Axes are grouped into time
/// steps by their declared time labels.
inline double causally_conditioned_di(const Pmf& joint,
                                      const ProcessRef& from,
                                      const ProcessRef& to,
                                      const std::vector<ProcessRef>& given = {}) {
  if (from.axes.empty() || to.axes.empty()) {
    throw std::invalid_argument(
        "directed information needs nonempty from/to processes");
  }
  const int horizon = detail::max_time(joint, to.axes);
  double total = 0.0;
  for (int i = 1; i <= horizon; ++i) {
    std::vector<int> a_axes;
    detail::collect_up_to(joint, from, i, /*strict=*/false, &a_axes);
    std::vector<int> b_axes;
    for (int a : to.axes) {
      if (joint.axes().at(static_cast<std::size_t>(a)).time == i) {
        b_axes.push_back(a);
      }
    }
    if (b_axes.empty()) continue;
    std::vector<int> c_axes;
    detail::collect_up_to(joint, to, i, /*strict=*/true, &c_axes);
    for (const ProcessRef& g : given) {
      detail::collect_up_to(joint, g, g.delayed ? i - 1 : i,
                            /*strict=*/false, &c_axes);
    }
    total += joint.conditional_mi(a_axes, b_axes, c_axes);
  }
  return total;
}

/// Directed information I(From -> To) = sum_i I(From_[i]; To_i | To_[i-1])
/// in nats.
inline double directed_information(const Pmf& joint, const ProcessRef& from,
                                   const ProcessRef& to) {
  return causally_conditioned_di(joint, from, to, {});
}

}  // namespace ceorate::finite
