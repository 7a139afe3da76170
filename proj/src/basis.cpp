#include "certapprox/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "certapprox/errors.hpp"

namespace certapprox {

std::string to_string(const Interval& iv) {
  std::ostringstream out;
  out.precision(17);
  out << '[' << iv.lo << ", " << iv.hi << ']';
  return out.str();
}

std::string_view basis_kind_name(BasisKind kind) {
  switch (kind) {
    case BasisKind::Chebyshev: return "chebyshev";
    case BasisKind::FourierSine: return "fourier_sine";
    case BasisKind::Monomial: return "monomial";
    case BasisKind::TentHierarchy: return "tent";
    case BasisKind::CubicBSpline: return "cubic_bspline";
  }
  return "unknown";
}

BasisKind parse_basis_kind(std::string_view name) {
  for (auto kind : {BasisKind::Chebyshev, BasisKind::FourierSine, BasisKind::Monomial,
                    BasisKind::TentHierarchy, BasisKind::CubicBSpline}) {
    if (basis_kind_name(kind) == name) return kind;
  }
  throw ConfigurationError("unknown basis family '" + std::string(name) + "'");
}

double triangle_wave(double y) {
  const double frac = y - std::floor(y);
  return 2.0 * std::min(frac, 1.0 - frac);
}

double triangle_wave_slope(double y) {
  const double frac = y - std::floor(y);
  return frac < 0.5 ? 2.0 : -2.0;
}

BasisFamily BasisFamily::chebyshev() { return {BasisKind::Chebyshev, {-1.0, 1.0}}; }
BasisFamily BasisFamily::fourier_sine() { return {BasisKind::FourierSine, {0.0, 1.0}}; }
BasisFamily BasisFamily::tent() { return {BasisKind::TentHierarchy, {0.0, 1.0}}; }

BasisFamily BasisFamily::monomial(Interval domain) {
  if (!(domain.lo < domain.hi)) throw ConfigurationError("monomial basis needs lo < hi");
  return {BasisKind::Monomial, domain};
}

BasisFamily BasisFamily::cubic_bspline(Interval domain, int count) {
  if (!(domain.lo < domain.hi)) throw ConfigurationError("cubic_bspline basis needs lo < hi");
  if (count < 4) throw ConfigurationError("cubic_bspline needs at least 4 functions");
  BasisFamily family{BasisKind::CubicBSpline, domain};
  family.count_ = count;
  const int intervals = count - 3;
  std::vector<double> knots(static_cast<std::size_t>(count) + 4);
  for (int i = 0; i < 3; ++i) {
    knots[static_cast<std::size_t>(i)] = domain.lo;
    knots[static_cast<std::size_t>(count + 1 + i)] = domain.hi;
  }
  for (int i = 0; i <= intervals; ++i) {
    knots[static_cast<std::size_t>(3 + i)] =
        i == intervals ? domain.hi : domain.lo + domain.length() * i / intervals;
  }
  family.knots_ = std::make_shared<const std::vector<double>>(std::move(knots));
  return family;
}

const std::vector<double>& BasisFamily::knots() const {
  static const std::vector<double> empty;
  return knots_ ? *knots_ : empty;
}

bool operator==(const BasisFamily& a, const BasisFamily& b) {
  return a.kind_ == b.kind_ && a.domain_ == b.domain_ && a.count_ == b.count_;
}

int BasisFamily::first_index() const noexcept {
  switch (kind_) {
    case BasisKind::FourierSine:
    case BasisKind::CubicBSpline: return 1;
    default: return 0;
  }
}

bool BasisFamily::valid_index(int j) const noexcept {
  if (j < first_index()) return false;
  if (kind_ == BasisKind::CubicBSpline) return j <= *count_;
  // 2^k must stay exactly representable and its grid resolvable in doubles.
  if (kind_ == BasisKind::TentHierarchy) return j <= 50;
  return true;
}

std::vector<int> BasisFamily::indices(int n) const {
  const int total = count_ ? *count_ : n;
  std::vector<int> out;
  for (int i = 0; i < total; ++i) out.push_back(first_index() + i);
  return out;
}

void BasisFamily::check_point(int j, double x) const {
  if (!valid_index(j)) {
    throw ConfigurationError("index " + std::to_string(j) + " outside " +
                             std::string(name()) + " family");
  }
  if (!domain_.contains(x)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "x = " << x << " outside basis domain " << to_string(domain_);
    throw DomainError(msg.str());
  }
}

namespace {

// Cubic B-spline evaluation on a clamped knot vector (Cox-de Boor, triangular
// form). Returns the knot span s with t[s] <= x < t[s+1] (last span closed).
std::size_t find_span(const std::vector<double>& t, int count, double x) {
  const auto last = static_cast<std::size_t>(count - 1);
  if (x >= t[last + 1]) return last;
  auto it = std::upper_bound(t.begin() + 3, t.begin() + static_cast<std::ptrdiff_t>(last) + 2, x);
  return static_cast<std::size_t>(it - t.begin()) - 1;
}

template <int Degree>
std::array<double, Degree + 1> nonzero_basis(const std::vector<double>& t, std::size_t span,
                                             double x) {
  std::array<double, Degree + 1> n{};
  std::array<double, Degree + 1> left{};
  std::array<double, Degree + 1> right{};
  n[0] = 1.0;
  for (int j = 1; j <= Degree; ++j) {
    left[j] = x - t[span + 1 - static_cast<std::size_t>(j)];
    right[j] = t[span + static_cast<std::size_t>(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom == 0.0 ? 0.0 : n[r] / denom;
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  return n;
}

double bspline_value(const std::vector<double>& t, int count, int j, double x) {
  const std::size_t span = find_span(t, count, x);
  const auto i = static_cast<std::size_t>(j - 1);
  if (i + 3 < span || i > span) return 0.0;
  return nonzero_basis<3>(t, span, x)[i + 3 - span];
}

double bspline_deriv(const std::vector<double>& t, int count, int j, double x) {
  const std::size_t span = find_span(t, count, x);
  const auto i = static_cast<std::size_t>(j - 1);
  if (i + 3 < span || i > span) return 0.0;
  // Degree-2 functions nonzero on the span are N_{span-2..span, 2}.
  const auto n2 = nonzero_basis<2>(t, span, x);
  auto quad = [&](std::size_t idx) -> double {
    if (idx + 2 < span || idx > span) return 0.0;
    return n2[idx + 2 - span];
  };
  double d = 0.0;
  const double w0 = t[i + 3] - t[i];
  if (w0 > 0.0) d += quad(i) / w0;
  const double w1 = t[i + 4] - t[i + 1];
  if (w1 > 0.0) d -= quad(i + 1) / w1;
  return 3.0 * d;
}

}  // namespace

double BasisFamily::eval(int j, double x) const {
  check_point(j, x);
  switch (kind_) {
    case BasisKind::Chebyshev: {
      if (j == 0) return 1.0;
      double prev = 1.0;
      double cur = x;
      for (int k = 1; k < j; ++k) {
        const double next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
      }
      return cur;
    }
    case BasisKind::FourierSine:
      return std::numbers::sqrt2 * std::sin(j * std::numbers::pi * x);
    case BasisKind::Monomial:
      return j == 0 ? 1.0 : std::pow(x, j);
    case BasisKind::TentHierarchy:
      return triangle_wave(std::ldexp(x, j));
    case BasisKind::CubicBSpline:
      return bspline_value(*knots_, *count_, j, x);
  }
  return 0.0;
}

double BasisFamily::eval_deriv(int j, double x) const {
  check_point(j, x);
  switch (kind_) {
    case BasisKind::Chebyshev: {
      // T_j' = j U_{j-1}
      if (j == 0) return 0.0;
      double prev = 1.0;  // U_0
      double cur = 2.0 * x;  // U_1
      if (j == 1) return 1.0;
      for (int k = 1; k < j - 1; ++k) {
        const double next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
      }
      return j * cur;
    }
    case BasisKind::FourierSine:
      return std::numbers::sqrt2 * j * std::numbers::pi * std::cos(j * std::numbers::pi * x);
    case BasisKind::Monomial:
      return j == 0 ? 0.0 : j * std::pow(x, j - 1);
    case BasisKind::TentHierarchy:
      return std::ldexp(triangle_wave_slope(std::ldexp(x, j)), j);
    case BasisKind::CubicBSpline:
      return bspline_deriv(*knots_, *count_, j, x);
  }
  return 0.0;
}

Interval BasisFamily::support(int j) const {
  if (!valid_index(j)) {
    throw ConfigurationError("index " + std::to_string(j) + " outside " +
                             std::string(name()) + " family");
  }
  if (kind_ == BasisKind::CubicBSpline) {
    const auto i = static_cast<std::size_t>(j - 1);
    return {(*knots_)[i], (*knots_)[i + 4]};
  }
  return domain_;
}

std::vector<double> BasisFamily::kinks(int j) const {
  std::vector<double> out;
  if (kind_ == BasisKind::CubicBSpline) {
    const auto i = static_cast<std::size_t>(j - 1);
    for (std::size_t k = i; k <= i + 4; ++k) {
      const double t = (*knots_)[k];
      if (t > domain_.lo && t < domain_.hi && (out.empty() || out.back() != t)) out.push_back(t);
    }
  } else if (kind_ == BasisKind::TentHierarchy) {
    const long long pieces = 1LL << (j + 1);
    for (long long p = 1; p < pieces; ++p) out.push_back(std::ldexp(static_cast<double>(p), -(j + 1)));
  }
  return out;
}

int BasisFamily::oscillation_hint(int j) const {
  switch (kind_) {
    case BasisKind::FourierSine:
    case BasisKind::Chebyshev: return j;
    default: return 0;
  }
}

BasisElement::BasisElement(BasisFamily family, int index)
    : family_(std::move(family)), index_(index) {
  if (!family_.valid_index(index_)) {
    throw ConfigurationError("index " + std::to_string(index_) + " outside " +
                             std::string(family_.name()) + " family");
  }
}

double eval(const BasisElement& e, double x) { return e.value(x); }
double eval_deriv(const BasisElement& e, double x) { return e.derivative(x); }
Interval support(const BasisElement& e) { return e.family().support(e.index()); }

std::vector<BasisElement> elements_of(const BasisFamily& family, const std::vector<int>& indices) {
  std::vector<BasisElement> out;
  out.reserve(indices.size());
  for (int j : indices) out.emplace_back(family, j);
  return out;
}

}  // namespace certapprox
