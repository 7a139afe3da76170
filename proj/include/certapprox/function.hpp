#pragma once

#include <string>
#include <vector>

namespace certapprox {

/// Closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Intersection of two intervals; `lo > hi` when they are disjoint.
inline Interval intersect(const Interval& a, const Interval& b) noexcept {
  return {a.lo > b.lo ? a.lo : b.lo, a.hi < b.hi ? a.hi : b.hi};
}

std::string to_string(const Interval& iv);

/// Anything that can be probed pointwise on an interval: targets, basis
/// elements, approximants, glued approximants.
class RealFunction {
 public:
  virtual ~RealFunction() = default;

  virtual Interval domain() const = 0;
  virtual double value(double x) const = 0;
  /// First derivative; right-hand derivative at kinks.
  virtual double derivative(double x) const = 0;

  /// Points inside the domain where the function or its derivative may be
  /// non-smooth. Quadrature panels are split here.
  virtual std::vector<double> kinks() const { return {}; }
  /// True when the function is linear between consecutive kinks.
  virtual bool piecewise_linear() const { return false; }
  /// Approximate number of half-oscillations over the domain; used to size
  /// quadrature panels for trigonometric content.
  virtual int oscillation_hint() const { return 0; }
};

/// Identically zero on a given domain.
class ZeroFunction final : public RealFunction {
 public:
  explicit ZeroFunction(Interval domain) : domain_(domain) {}
  Interval domain() const override { return domain_; }
  double value(double) const override { return 0.0; }
  double derivative(double) const override { return 0.0; }
  bool piecewise_linear() const override { return true; }

 private:
  Interval domain_;
};

}  // namespace certapprox
