#pragma once

#include <cstddef>
#include <cstdint>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ceorate::finite {

/// One coordinate of a finite product alphabet: a named process sample at a
/// given time step, attributed to an observer (observer 0 = none, used for
/// the source and its estimates).
struct Axis {
  std::string name;
  int time = 1;
  int observer = 0;
  int card = 2;

  /// Axes are identified by (name, time, observer); the cardinality is a
  /// property of the identity and must agree wherever the axis is referenced.
  [[nodiscard]] bool same_id(const Axis& other) const {
    return name == other.name && time == other.time &&
           observer == other.observer;
  }

  /// Human-readable identity, e.g. "u@2#1" for name "u", time 2, observer 1.
  [[nodiscard]] std::string label() const {
    return name + "@" + std::to_string(time) + "#" + std::to_string(observer);
  }

  void validate() const {
    if (name.empty()) throw std::invalid_argument("axis name must be nonempty");
    if (time < 1) throw std::invalid_argument("axis time must be >= 1");
    if (observer < 0) throw std::invalid_argument("axis observer must be >= 0");
    if (card < 1) throw std::invalid_argument("axis cardinality must be >= 1");
  }
};

/// Hard cap on dense table sizes.  Everything in this module enumerates
/// product alphabets exhaustively; beyond this size the caller should switch
/// to Monte Carlo estimation.
inline constexpr std::size_t kMaxOutcomes = std::size_t{1} << 26;

namespace detail {

/// Row-major strides for a list of axes (last axis varies fastest).  Throws
/// if the product alphabet exceeds the dense-table cap.
inline std::vector<std::size_t> make_strides(const std::vector<Axis>& axes) {
  std::vector<std::size_t> strides(axes.size());
  std::size_t size = 1;
  for (std::size_t a = axes.size(); a-- > 0;) {
    strides[a] = size;
    if (size > kMaxOutcomes / static_cast<std::size_t>(axes[a].card)) {
      throw std::invalid_argument(
          "product alphabet exceeds the dense-table cap of 2^26 outcomes");
    }
    size *= static_cast<std::size_t>(axes[a].card);
  }
  return strides;
}

}  // namespace detail

/// Dense probability mass function over a finite product alphabet.  The flat
/// storage is row-major in the declared axis order (last axis fastest).
class Pmf {
 public:
  Pmf() = default;

  Pmf(std::vector<Axis> axes, std::vector<double> probs)
      : axes_(std::move(axes)), p_(std::move(probs)) {
    std::size_t size = 1;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      axes_[a].validate();
      for (std::size_t b = 0; b < a; ++b) {
        if (axes_[a].same_id(axes_[b])) {
          throw std::invalid_argument("duplicate axis " + axes_[a].label());
        }
      }
    }
    strides_ = detail::make_strides(axes_);
    for (const Axis& ax : axes_) size *= static_cast<std::size_t>(ax.card);
    if (p_.size() != size) {
      throw std::invalid_argument("probability table has " +
                                  std::to_string(p_.size()) +
                                  " entries, expected " + std::to_string(size));
    }
    // Compensated summation keeps the normalization check meaningful even
    // for tables with tens of millions of entries.
    double sum = 0.0;
    double comp = 0.0;
    for (double v : p_) {
      if (!(v >= 0.0)) {
        throw std::invalid_argument("probability entries must be >= 0");
      }
      const double y = v - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("probabilities sum to " +
                                  std::to_string(sum) + ", expected 1");
    }
  }

  [[nodiscard]] const std::vector<Axis>& axes() const { return axes_; }
  [[nodiscard]] std::size_t size() const { return p_.size(); }
  [[nodiscard]] const std::vector<double>& probs() const { return p_; }
  [[nodiscard]] double prob(std::size_t flat) const { return p_[flat]; }

  /// Index of the axis with the given identity, or -1 if absent.
  [[nodiscard]] int find_axis(const std::string& name, int time,
                              int observer) const {
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      if (axes_[a].name == name && axes_[a].time == time &&
          axes_[a].observer == observer) {
        return static_cast<int>(a);
      }
    }
    return -1;
  }

  /// Coordinate of axis `a` within the flat outcome index.
  [[nodiscard]] int coord(std::size_t flat, int a) const {
    return static_cast<int>(flat / strides_[static_cast<std::size_t>(a)] %
                            static_cast<std::size_t>(axes_[static_cast<std::size_t>(a)].card));
  }

  /// Marginal over the given axes.  The kept axes appear in their original
  /// declaration order regardless of the order they are listed in `keep`.
  [[nodiscard]] Pmf marginal(const std::vector<int>& keep) const {
    const std::vector<bool> mask = axis_mask(keep);
    std::vector<Axis> out_axes;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      if (mask[a]) out_axes.push_back(axes_[a]);
    }
    std::vector<double> out(table_size(out_axes), 0.0);
    const std::vector<std::size_t> proj = projection_strides(mask, out_axes);
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (p_[i] == 0.0) continue;
      out[project(i, proj)] += p_[i];
    }
    return Pmf(std::move(out_axes), std::move(out));
  }

  /// Conditional mutual information I(A; B | C) in nats, computed exactly
  /// from the joint.  The three axis sets must be pairwise disjoint; C may be
  /// empty, in which case this is the plain mutual information.
  [[nodiscard]] double conditional_mi(const std::vector<int>& a_axes,
                                      const std::vector<int>& b_axes,
                                      const std::vector<int>& c_axes) const {
    require_disjoint(a_axes, b_axes, "conditional_mi");
    require_disjoint(a_axes, c_axes, "conditional_mi");
    require_disjoint(b_axes, c_axes, "conditional_mi");
    if (a_axes.empty() || b_axes.empty()) return 0.0;
    std::vector<int> abc = a_axes;
    abc.insert(abc.end(), b_axes.begin(), b_axes.end());
    abc.insert(abc.end(), c_axes.begin(), c_axes.end());
    std::vector<int> ac = a_axes;
    ac.insert(ac.end(), c_axes.begin(), c_axes.end());
    std::vector<int> bc = b_axes;
    bc.insert(bc.end(), c_axes.begin(), c_axes.end());

    const Pmf joint = marginal(abc);
    const Pmf m_ac = joint.marginal(joint.local(*this, ac));
    const Pmf m_bc = joint.marginal(joint.local(*this, bc));
    const Pmf m_c = joint.marginal(joint.local(*this, c_axes));

    const auto proj_ac = joint.projection_onto(m_ac);
    const auto proj_bc = joint.projection_onto(m_bc);
    const auto proj_c = joint.projection_onto(m_c);
    double total = 0.0;
    for (std::size_t i = 0; i < joint.p_.size(); ++i) {
      const double p = joint.p_[i];
      if (p == 0.0) continue;
      const double pc = c_axes.empty() ? 1.0 : m_c.p_[joint.project(i, proj_c)];
      total += p * std::log(p * pc / (m_ac.p_[joint.project(i, proj_ac)] *
                                      m_bc.p_[joint.project(i, proj_bc)]));
    }
    return total;
  }

  /// E[ log P(T | A) - log P(T | B) ] under the joint, in nats.  Outcomes of
  /// probability zero contribute nothing.  With B a subset of A's information
  /// this is the conditional divergence D( P_{T|A} || P_{T|B} | P_A ).
  [[nodiscard]] double expectation_log_ratio(const std::vector<int>& t_axes,
                                             const std::vector<int>& a_axes,
                                             const std::vector<int>& b_axes) const {
    require_disjoint(t_axes, a_axes, "expectation_log_ratio");
    require_disjoint(t_axes, b_axes, "expectation_log_ratio");
    std::vector<int> all = t_axes;
    for (int ax : a_axes) all.push_back(ax);
    for (int ax : b_axes) {
      if (std::find(all.begin(), all.end(), ax) == all.end()) all.push_back(ax);
    }
    std::vector<int> ta = t_axes;
    ta.insert(ta.end(), a_axes.begin(), a_axes.end());
    std::vector<int> tb = t_axes;
    tb.insert(tb.end(), b_axes.begin(), b_axes.end());

    const Pmf joint = marginal(all);
    const Pmf m_ta = joint.marginal(joint.local(*this, ta));
    const Pmf m_a = joint.marginal(joint.local(*this, a_axes));
    const Pmf m_tb = joint.marginal(joint.local(*this, tb));
    const Pmf m_b = joint.marginal(joint.local(*this, b_axes));

    const auto proj_ta = joint.projection_onto(m_ta);
    const auto proj_a = joint.projection_onto(m_a);
    const auto proj_tb = joint.projection_onto(m_tb);
    const auto proj_b = joint.projection_onto(m_b);
    double total = 0.0;
    for (std::size_t i = 0; i < joint.p_.size(); ++i) {
      const double p = joint.p_[i];
      if (p == 0.0) continue;
      const double pa = a_axes.empty() ? 1.0 : m_a.p_[joint.project(i, proj_a)];
      const double pb = b_axes.empty() ? 1.0 : m_b.p_[joint.project(i, proj_b)];
      total += p * std::log(m_ta.p_[joint.project(i, proj_ta)] * pb /
                            (m_tb.p_[joint.project(i, proj_tb)] * pa));
    }
    return total;
  }

  /// Strides that map a flat index of this pmf onto a flat index of a
  /// marginal of it (the marginal's axes must be a subset of this pmf's).
  [[nodiscard]] std::vector<std::size_t> projection_onto(const Pmf& sub) const {
    std::vector<bool> mask(axes_.size(), false);
    for (const Axis& ax : sub.axes_) {
      const int a = find_axis(ax.name, ax.time, ax.observer);
      if (a < 0) {
        throw std::invalid_argument("projection target axis " + ax.label() +
                                    " not present in source pmf");
      }
      mask[static_cast<std::size_t>(a)] = true;
    }
    return projection_strides(mask, sub.axes_);
  }

  /// Flat index of the projection of outcome `flat` under precomputed
  /// projection strides (zero stride for dropped axes).
  [[nodiscard]] std::size_t project(std::size_t flat,
                                    const std::vector<std::size_t>& proj) const {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      if (proj[a] == 0) continue;
      idx += proj[a] * (flat / strides_[a] %
                        static_cast<std::size_t>(axes_[a].card));
    }
    return idx;
  }

  /// Translates axis indices of `parent` into this pmf's axis indices.
  [[nodiscard]] std::vector<int> local(const Pmf& parent,
                                       const std::vector<int>& parent_axes) const {
    std::vector<int> out;
    out.reserve(parent_axes.size());
    for (int pa : parent_axes) {
      const Axis& ax = parent.axes_.at(static_cast<std::size_t>(pa));
      const int a = find_axis(ax.name, ax.time, ax.observer);
      if (a < 0) {
        throw std::invalid_argument("axis " + ax.label() +
                                    " not present in marginal");
      }
      out.push_back(a);
    }
    return out;
  }

 private:
  [[nodiscard]] std::vector<bool> axis_mask(const std::vector<int>& axes) const {
    std::vector<bool> mask(axes_.size(), false);
    for (int a : axes) {
      if (a < 0 || static_cast<std::size_t>(a) >= axes_.size()) {
        throw std::invalid_argument("axis index " + std::to_string(a) +
                                    " out of range");
      }
      mask[static_cast<std::size_t>(a)] = true;
    }
    return mask;
  }

  /// Projection strides aligned with this pmf's axes: stride 0 for dropped
  /// axes, the output row-major stride for kept ones.  `out_axes` must list
  /// the kept axes in their original declaration order.
  [[nodiscard]] std::vector<std::size_t> projection_strides(
      const std::vector<bool>& mask, const std::vector<Axis>& out_axes) const {
    std::vector<std::size_t> proj(axes_.size(), 0);
    const std::vector<std::size_t> out_strides = detail::make_strides(out_axes);
    std::size_t next = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      if (!mask[a]) continue;
      proj[a] = out_strides[next];
      ++next;
    }
    return proj;
  }

  static std::size_t table_size(const std::vector<Axis>& axes) {
    std::size_t size = 1;
    for (const Axis& ax : axes) size *= static_cast<std::size_t>(ax.card);
    return size;
  }

  static void require_disjoint(const std::vector<int>& a,
                               const std::vector<int>& b, const char* who) {
    for (int x : a) {
      for (int y : b) {
        if (x == y) {
          throw std::invalid_argument(std::string(who) +
                                      ": axis sets must be disjoint");
        }
      }
    }
  }

  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> p_;
};

}  // namespace ceorate::finite
