#pragma once

#include <cstddef>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ceorate/finite/pmf.hpp"

namespace ceorate::finite {

/// One step of a causal kernel: the conditional law of a new axis given a
/// list of already-existing axes.  The table is row-major over the given
/// axes in their listed order, with the target coordinate fastest.
struct KernelStep {
  Axis target;
  std::vector<Axis> given;
  std::vector<double> table;

  void validate() const {
    target.validate();
    std::size_t rows = 1;
    for (const Axis& g : given) {
      g.validate();
      rows *= static_cast<std::size_t>(g.card);
    }
    const std::size_t cols = static_cast<std::size_t>(target.card);
    if (table.size() != rows * cols) {
      throw std::invalid_argument("kernel " + target.label() + " table has " +
                                  std::to_string(table.size()) +
                                  " entries, expected " +
                                  std::to_string(rows * cols));
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t u = 0; u < cols; ++u) {
        const double v = table[r * cols + u];
        if (!(v >= 0.0)) {
          throw std::invalid_argument("kernel " + target.label() +
                                      " has a negative entry");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("kernel " + target.label() + " row " +
                                    std::to_string(r) + " sums to " +
                                    std::to_string(sum) + ", expected 1");
      }
    }
  }
};

/// A causal kernel: a time-ordered chain of conditional factors, each
/// introducing one new axis conditioned on axes that already exist.
struct CausalKernel {
  std::vector<KernelStep> steps;

  void validate() const {
    for (std::size_t s = 0; s < steps.size(); ++s) {
      steps[s].validate();
      if (s > 0 && steps[s].target.time <= steps[s - 1].target.time) {
        throw std::invalid_argument("kernel steps must be in increasing time "
                                    "order; step " +
                                    steps[s].target.label() + " is not");
      }
    }
  }
};

/// Multiplies a joint pmf by one kernel factor, appending the target axis.
/// Every given axis must already be present with a matching cardinality.
inline Pmf extend(const Pmf& joint, const KernelStep& step) {
  step.validate();
  std::vector<int> given_idx;
  given_idx.reserve(step.given.size());
  for (const Axis& g : step.given) {
    const int a = joint.find_axis(g.name, g.time, g.observer);
    if (a < 0) {
      throw std::invalid_argument("kernel " + step.target.label() +
                                  " conditions on absent axis " + g.label());
    }
    if (joint.axes()[static_cast<std::size_t>(a)].card != g.card) {
      throw std::invalid_argument("kernel " + step.target.label() +
                                  " disagrees on the cardinality of axis " +
                                  g.label());
    }
    given_idx.push_back(a);
  }
  if (joint.find_axis(step.target.name, step.target.time,
                      step.target.observer) >= 0) {
    throw std::invalid_argument("kernel target axis " + step.target.label() +
                                " already present");
  }

  std::vector<Axis> out_axes = joint.axes();
  out_axes.push_back(step.target);
  const std::size_t cols = static_cast<std::size_t>(step.target.card);
  if (joint.size() > kMaxOutcomes / cols) {
    throw std::invalid_argument(
        "product alphabet exceeds the dense-table cap of 2^26 outcomes");
  }
  std::vector<double> out(joint.size() * cols, 0.0);
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const double p = joint.prob(i);
    if (p == 0.0) continue;
    std::size_t row = 0;
    for (std::size_t g = 0; g < given_idx.size(); ++g) {
      row = row * static_cast<std::size_t>(step.given[g].card) +
            static_cast<std::size_t>(joint.coord(i, given_idx[g]));
    }
    for (std::size_t u = 0; u < cols; ++u) {
      out[i * cols + u] = p * step.table[row * cols + u];
    }
  }
  return Pmf(std::move(out_axes), std::move(out));
}

}  // namespace ceorate::finite
