#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "certapprox/function.hpp"

namespace certapprox {

enum class QuadratureKind { GaussLegendre, GaussChebyshev, CompositeGaussLegendre };

std::string_view quadrature_kind_name(QuadratureKind kind);
QuadratureKind parse_quadrature_kind(std::string_view name);

/// Nodes and weights materialized in ascending node order.
///
/// `breakpoints` are the panel boundaries ({lo, hi} for a single panel);
/// Gauss-Chebyshev rules always live on [-1, 1] and carry the weight
/// (1 - x^2)^{-1/2} implicitly.
class QuadratureRule {
 public:
  QuadratureKind kind() const noexcept { return kind_; }
  int points() const noexcept { return points_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  std::size_t panels() const noexcept { return breakpoints_.size() - 1; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  Interval interval() const noexcept { return {breakpoints_.front(), breakpoints_.back()}; }

  friend QuadratureRule gauss_legendre_rule(int n, Interval interval);
  friend QuadratureRule composite_gauss_legendre(int n, std::vector<double> breakpoints);
  friend QuadratureRule gauss_chebyshev_rule(int n);

 private:
  QuadratureRule() = default;

  QuadratureKind kind_ = QuadratureKind::GaussLegendre;
  int points_ = 0;
  std::vector<double> breakpoints_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// n-point Gauss-Legendre on one interval; 1 <= n <= 64.
QuadratureRule gauss_legendre_rule(int n, Interval interval);
/// n points on every panel between consecutive (strictly increasing) breakpoints.
QuadratureRule composite_gauss_legendre(int n, std::vector<double> breakpoints);
/// Nodes cos((2k-1) pi / (2n)), weights pi / n.
QuadratureRule gauss_chebyshev_rule(int n);

/// Composite rule on `domain`, split at every kink strictly inside it, each
/// segment divided into ceil(min_panels * len / |domain|) equal panels.
QuadratureRule construction_rule(Interval domain, std::vector<double> kinks, int min_panels,
                                 int points = 16);
/// Verification-grade refinement: every panel split into four, and further
/// until there are at least 64 panels.
QuadratureRule oracle_rule(const QuadratureRule& construction);

/// Weighted node sum in ascending node order with compensated accumulation.
/// Throws EvaluationError naming the node if f is non-finite there.
double integrate(const std::function<double(double)>& f, const QuadratureRule& rule);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

enum class NormKind { L2, W12, SupNorm, ChebyshevWeightedL2 };

std::string_view norm_kind_name(NormKind kind);
NormKind parse_norm_kind(std::string_view name);

struct NormTag {
  NormKind kind = NormKind::L2;
  Interval domain;
  friend bool operator==(const NormTag&, const NormTag&) = default;
};

/// L2: int f g.  W12: int f g + f' g'.  ChebyshevWeightedL2: Gauss-Chebyshev
/// sum of f g (rule must be a Gauss-Chebyshev rule).  SupNorm: UnsupportedNorm.
double inner_product(const RealFunction& f, const RealFunction& g, const NormTag& norm,
                     const QuadratureRule& rule);

enum class SupNormMethod { NotApplicable, ExactBreakpoints, DenseEstimate };

std::string_view sup_norm_method_name(SupNormMethod method);

struct NormMeasurement {
  double value = 0.0;
  SupNormMethod method = SupNormMethod::NotApplicable;
};

/// Grid size of the dense sup-norm estimate used by default.
inline constexpr int kDenseSupGrid = 4097;

/// ||f - g|| under `norm`. L2/W12/ChebyshevWeightedL2 use `rule`; SupNorm is
/// exact over merged breakpoints when both functions are piecewise linear,
/// otherwise a dense-grid estimate with golden-section refinement around the
/// largest sample.
NormMeasurement norm_of_difference(const RealFunction& f, const RealFunction& g,
                                   const NormTag& norm, const QuadratureRule& rule,
                                   int sup_grid = kDenseSupGrid);

/// Union of both functions' kinks, sorted and deduplicated.
std::vector<double> merged_kinks(const RealFunction& f, const RealFunction& g);

}  // namespace certapprox
