#include "certapprox/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "certapprox/errors.hpp"

namespace certapprox {

std::string_view quadrature_kind_name(QuadratureKind kind) {
  switch (kind) {
    case QuadratureKind::GaussLegendre: return "gauss_legendre";
    case QuadratureKind::GaussChebyshev: return "gauss_chebyshev";
    case QuadratureKind::CompositeGaussLegendre: return "composite_gauss_legendre";
  }
  return "unknown";
}

QuadratureKind parse_quadrature_kind(std::string_view name) {
  for (auto kind : {QuadratureKind::GaussLegendre, QuadratureKind::GaussChebyshev,
                    QuadratureKind::CompositeGaussLegendre}) {
    if (quadrature_kind_name(kind) == name) return kind;
  }
  throw ConfigurationError("unknown quadrature kind '" + std::string(name) + "'");
}

std::string_view norm_kind_name(NormKind kind) {
  switch (kind) {
    case NormKind::L2: return "l2";
    case NormKind::W12: return "w12";
    case NormKind::SupNorm: return "sup";
    case NormKind::ChebyshevWeightedL2: return "chebyshev_weighted_l2";
  }
  return "unknown";
}

NormKind parse_norm_kind(std::string_view name) {
  for (auto kind : {NormKind::L2, NormKind::W12, NormKind::SupNorm, NormKind::ChebyshevWeightedL2}) {
    if (norm_kind_name(kind) == name) return kind;
  }
  throw ConfigurationError("unknown norm '" + std::string(name) + "'");
}

std::string_view sup_norm_method_name(SupNormMethod method) {
  switch (method) {
    case SupNormMethod::NotApplicable: return "not_applicable";
    case SupNormMethod::ExactBreakpoints: return "exact_breakpoints";
    case SupNormMethod::DenseEstimate: return "dense_grid_estimate";
  }
  return "unknown";
}

void CompensatedSum::add(double v) noexcept {
  const double t = sum_ + v;
  if (std::fabs(sum_) >= std::fabs(v)) {
    compensation_ += (sum_ - t) + v;
  } else {
    compensation_ += (v - t) + sum_;
  }
  sum_ = t;
}

namespace {

constexpr int kMaxPoints = 64;

struct ReferenceRule {
  std::vector<double> nodes;  // ascending on [-1, 1]
  std::vector<double> weights;
};

ReferenceRule compute_reference(int n) {
  ReferenceRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    // Final derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

const ReferenceRule& reference_rule(int n) {
  static const std::array<ReferenceRule, kMaxPoints + 1> table = [] {
    std::array<ReferenceRule, kMaxPoints + 1> t{};
    for (int k = 1; k <= kMaxPoints; ++k) t[static_cast<std::size_t>(k)] = compute_reference(k);
    return t;
  }();
  return table[static_cast<std::size_t>(n)];
}

void check_points(int n) {
  if (n < 1 || n > kMaxPoints) {
    throw ConfigurationError("Gauss-Legendre point count " + std::to_string(n) +
                             " outside [1, 64]");
  }
}

}  // namespace

QuadratureRule composite_gauss_legendre(int n, std::vector<double> breakpoints) {
  check_points(n);
  if (breakpoints.size() < 2) throw ConfigurationError("composite rule needs >= 2 breakpoints");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1])) {
      throw ConfigurationError("composite rule breakpoints must be strictly increasing");
    }
  }
  const ReferenceRule& ref = reference_rule(n);
  QuadratureRule rule;
  rule.kind_ = breakpoints.size() == 2 ? QuadratureKind::GaussLegendre
                                       : QuadratureKind::CompositeGaussLegendre;
  rule.points_ = n;
  rule.nodes_.reserve(static_cast<std::size_t>(n) * (breakpoints.size() - 1));
  rule.weights_.reserve(rule.nodes_.capacity());
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p];
    const double b = breakpoints[p + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t k = 0; k < ref.nodes.size(); ++k) {
      rule.nodes_.push_back(mid + half * ref.nodes[k]);
      rule.weights_.push_back(half * ref.weights[k]);
    }
  }
  rule.breakpoints_ = std::move(breakpoints);
  return rule;
}

QuadratureRule gauss_legendre_rule(int n, Interval interval) {
  if (!(interval.lo < interval.hi)) throw ConfigurationError("quadrature interval needs lo < hi");
  auto rule = composite_gauss_legendre(n, {interval.lo, interval.hi});
  rule.kind_ = QuadratureKind::GaussLegendre;
  return rule;
}

QuadratureRule gauss_chebyshev_rule(int n) {
  if (n < 1) throw ConfigurationError("Gauss-Chebyshev needs n >= 1");
  QuadratureRule rule;
  rule.kind_ = QuadratureKind::GaussChebyshev;
  rule.points_ = n;
  rule.breakpoints_ = {-1.0, 1.0};
  const double w = std::numbers::pi / n;
  // k = n .. 1 gives ascending nodes.
  for (int k = n; k >= 1; --k) {
    rule.nodes_.push_back(std::cos((2.0 * k - 1.0) * std::numbers::pi / (2.0 * n)));
    rule.weights_.push_back(w);
  }
  return rule;
}

QuadratureRule construction_rule(Interval domain, std::vector<double> kinks, int min_panels,
                                 int points) {
  std::vector<double> segments{domain.lo};
  std::sort(kinks.begin(), kinks.end());
  for (double k : kinks) {
    if (k > domain.lo && k < domain.hi && k > segments.back()) segments.push_back(k);
  }
  segments.push_back(domain.hi);

  const int target = std::max(1, min_panels);
  std::vector<double> breaks{domain.lo};
  for (std::size_t s = 0; s + 1 < segments.size(); ++s) {
    const double a = segments[s];
    const double b = segments[s + 1];
    const int pieces =
        std::max(1, static_cast<int>(std::ceil(target * (b - a) / domain.length() - 1e-9)));
    for (int p = 1; p < pieces; ++p) {
      const double x = a + (b - a) * p / pieces;
      if (x > breaks.back()) breaks.push_back(x);
    }
    breaks.push_back(b);
  }
  return composite_gauss_legendre(points, std::move(breaks));
}

QuadratureRule oracle_rule(const QuadratureRule& construction) {
  if (construction.kind() == QuadratureKind::GaussChebyshev) {
    return gauss_chebyshev_rule(4 * construction.points());
  }
  const auto& coarse = construction.breakpoints();
  const std::size_t panels = coarse.size() - 1;
  std::size_t split = 4;
  while (panels * split < 64) split *= 2;
  std::vector<double> breaks{coarse.front()};
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = coarse[p];
    const double b = coarse[p + 1];
    for (std::size_t k = 1; k < split; ++k) {
      const double x = a + (b - a) * static_cast<double>(k) / static_cast<double>(split);
      if (x > breaks.back() && x < b) breaks.push_back(x);
    }
    breaks.push_back(b);
  }
  return composite_gauss_legendre(construction.points(), std::move(breaks));
}

double integrate(const std::function<double(double)>& f, const QuadratureRule& rule) {
  CompensatedSum sum;
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double v = f(nodes[k]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "non-finite integrand value at quadrature node x = " << nodes[k];
      throw EvaluationError(msg.str(), nodes[k]);
    }
    sum.add(weights[k] * v);
  }
  return sum.value();
}

double inner_product(const RealFunction& f, const RealFunction& g, const NormTag& norm,
                     const QuadratureRule& rule) {
  switch (norm.kind) {
    case NormKind::L2:
      return integrate([&](double x) { return f.value(x) * g.value(x); }, rule);
    case NormKind::W12:
      return integrate(
          [&](double x) { return f.value(x) * g.value(x) + f.derivative(x) * g.derivative(x); },
          rule);
    case NormKind::ChebyshevWeightedL2:
      if (rule.kind() != QuadratureKind::GaussChebyshev) {
        throw ConfigurationError("Chebyshev-weighted inner product needs a Gauss-Chebyshev rule");
      }
      return integrate([&](double x) { return f.value(x) * g.value(x); }, rule);
    case NormKind::SupNorm:
      throw UnsupportedNorm("the sup norm has no inner product");
  }
  return 0.0;
}

std::vector<double> merged_kinks(const RealFunction& f, const RealFunction& g) {
  std::vector<double> all = f.kinks();
  auto more = g.kinks();
  all.insert(all.end(), more.begin(), more.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

namespace {

double sup_exact(const RealFunction& f, const RealFunction& g, Interval domain) {
  std::vector<double> points{domain.lo};
  for (double k : merged_kinks(f, g)) {
    if (k > domain.lo && k < domain.hi) points.push_back(k);
  }
  points.push_back(domain.hi);
  double best = 0.0;
  for (double x : points) best = std::max(best, std::fabs(f.value(x) - g.value(x)));
  return best;
}

double sup_estimate(const RealFunction& f, const RealFunction& g, Interval domain, int grid) {
  grid = std::max(grid, 3);
  auto gap = [&](double x) { return std::fabs(f.value(x) - g.value(x)); };
  double best = -1.0;
  int best_i = 0;
  for (int i = 0; i < grid; ++i) {
    const double x = i == grid - 1 ? domain.hi : domain.lo + domain.length() * i / (grid - 1);
    const double v = gap(x);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  auto at = [&](int i) { return domain.lo + domain.length() * i / (grid - 1); };
  double a = at(std::max(best_i - 1, 0));
  double b = std::min(at(std::min(best_i + 1, grid - 1)), domain.hi);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = gap(c);
  double fd = gap(d);
  for (int iter = 0; iter < 80 && (b - a) > 1e-15 * std::max(1.0, std::fabs(a)); ++iter) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = gap(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = gap(d);
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

}  // namespace

NormMeasurement norm_of_difference(const RealFunction& f, const RealFunction& g,
                                   const NormTag& norm, const QuadratureRule& rule,
                                   int sup_grid) {
  switch (norm.kind) {
    case NormKind::L2:
    case NormKind::ChebyshevWeightedL2: {
      const double s = integrate(
          [&](double x) {
            const double d = f.value(x) - g.value(x);
            return d * d;
          },
          rule);
      return {std::sqrt(std::max(s, 0.0)), SupNormMethod::NotApplicable};
    }
    case NormKind::W12: {
      const double s = integrate(
          [&](double x) {
            const double d = f.value(x) - g.value(x);
            const double dd = f.derivative(x) - g.derivative(x);
            return d * d + dd * dd;
          },
          rule);
      return {std::sqrt(std::max(s, 0.0)), SupNormMethod::NotApplicable};
    }
    case NormKind::SupNorm:
      if (f.piecewise_linear() && g.piecewise_linear()) {
        return {sup_exact(f, g, norm.domain), SupNormMethod::ExactBreakpoints};
      }
      return {sup_estimate(f, g, norm.domain, sup_grid), SupNormMethod::DenseEstimate};
  }
  return {};
}

}  // namespace certapprox
