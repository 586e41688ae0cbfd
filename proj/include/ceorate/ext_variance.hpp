#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ceorate {

/// A strictly positive variance that is allowed to be infinite.
///
/// Infinite variance models a source without a stationary second moment
/// (|a| >= 1).  It is carried through the estimation algebra as a zero
/// precision, so expressions of the form 1/sigma2 degrade gracefully instead
/// of producing NaNs.  Both the variance and its reciprocal are stored at
/// construction, so whichever representation a value was built from reads
/// back exactly.
class ExtVariance {
 public:
  static ExtVariance from_variance(double v) {
    if (std::isnan(v) || v <= 0.0) {
      throw std::invalid_argument("ExtVariance: variance must be > 0 (or inf)");
    }
    return ExtVariance(v, std::isinf(v) ? 0.0 : 1.0 / v);
  }

  static ExtVariance from_precision(double p) {
    if (std::isnan(p) || p < 0.0 || std::isinf(p)) {
      throw std::invalid_argument("ExtVariance: precision must be finite and >= 0");
    }
    return ExtVariance(p == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / p, p);
  }

  static ExtVariance infinite() {
    return ExtVariance(std::numeric_limits<double>::infinity(), 0.0);
  }

  double variance() const { return var_; }
  double precision() const { return prec_; }
  bool is_infinite() const { return std::isinf(var_); }

 private:
  ExtVariance(double v, double p) : var_(v), prec_(p) {}
  double var_;
  double prec_;
};

}  // namespace ceorate
