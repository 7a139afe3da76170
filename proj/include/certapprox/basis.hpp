#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "certapprox/function.hpp"

namespace certapprox {

enum class BasisKind { Chebyshev, FourierSine, Monomial, TentHierarchy, CubicBSpline };

/// Lowercase serialization name ("chebyshev", "fourier_sine", ...).
std::string_view basis_kind_name(BasisKind kind);
BasisKind parse_basis_kind(std::string_view name);

/// An evaluable basis system on a closed interval.
///
/// Index conventions:
///   Chebyshev      T_j, j >= 0, domain [-1, 1]
///   FourierSine    sqrt(2) sin(j pi x), j >= 1, domain [0, 1]
///   Monomial       x^j, j >= 0, any domain
///   TentHierarchy  phi_{2^k}(x) = tri(2^k x), k >= 0, domain [0, 1]
///   CubicBSpline   B_j, 1 <= j <= M, clamped uniform knots on the domain
///
/// tri is the 1-periodic triangle wave with tri(0) = 0 and tri(1/2) = 1.
/// Copies share the (immutable) knot vector.
class BasisFamily {
 public:
  static BasisFamily chebyshev();
  static BasisFamily fourier_sine();
  static BasisFamily monomial(Interval domain = {0.0, 1.0});
  static BasisFamily tent();
  /// `count` functions (count >= 4) on a clamped uniform knot vector.
  static BasisFamily cubic_bspline(Interval domain, int count);

  BasisKind kind() const noexcept { return kind_; }
  Interval domain() const noexcept { return domain_; }
  std::string_view name() const { return basis_kind_name(kind_); }

  /// Number of functions for finite families (CubicBSpline only).
  std::optional<int> count() const noexcept { return count_; }
  const std::vector<double>& knots() const;

  int first_index() const noexcept;
  bool valid_index(int j) const noexcept;

  double eval(int j, double x) const;
  double eval_deriv(int j, double x) const;
  Interval support(int j) const;
  std::vector<double> kinks(int j) const;
  int oscillation_hint(int j) const;

  /// Every element of a finite family, for the non-oscillatory families the
  /// first `n` elements starting at first_index().
  std::vector<int> indices(int n = 0) const;

  friend bool operator==(const BasisFamily& a, const BasisFamily& b);

 private:
  BasisFamily(BasisKind kind, Interval domain) : kind_(kind), domain_(domain) {}

  void check_point(int j, double x) const;

  BasisKind kind_;
  Interval domain_;
  std::optional<int> count_;
  std::shared_ptr<const std::vector<double>> knots_;
};

/// One element b_j of a family.
class BasisElement final : public RealFunction {
 public:
  BasisElement(BasisFamily family, int index);

  const BasisFamily& family() const noexcept { return family_; }
  int index() const noexcept { return index_; }

  Interval domain() const override { return family_.domain(); }
  double value(double x) const override { return family_.eval(index_, x); }
  double derivative(double x) const override { return family_.eval_deriv(index_, x); }
  std::vector<double> kinks() const override { return family_.kinks(index_); }
  bool piecewise_linear() const override { return family_.kind() == BasisKind::TentHierarchy; }
  int oscillation_hint() const override { return family_.oscillation_hint(index_); }

 private:
  BasisFamily family_;
  int index_;
};

double eval(const BasisElement& e, double x);
double eval_deriv(const BasisElement& e, double x);
Interval support(const BasisElement& e);

/// Elements j in `indices` of `family`.
std::vector<BasisElement> elements_of(const BasisFamily& family, const std::vector<int>& indices);

/// The 1-periodic triangle wave and its right-hand derivative.
double triangle_wave(double y);
double triangle_wave_slope(double y);

}  // namespace certapprox
