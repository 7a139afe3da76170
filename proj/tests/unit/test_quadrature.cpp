#include <doctest.h>

#include <cmath>
#include <numbers>

#include "certapprox/basis.hpp"
#include "certapprox/errors.hpp"
#include "certapprox/quadrature.hpp"
#include "certapprox/target.hpp"

using namespace certapprox;

namespace {

// Legendre P_n by the three-term recurrence.
double legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return p0;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace

TEST_CASE("quadrature: two-point rule") {
  const auto r = gauss_legendre_rule(2, {-1.0, 1.0});
  REQUIRE(r.nodes().size() == 2);
  CHECK(r.nodes()[0] == doctest::Approx(-0.5773502691896257).epsilon(1e-15));
  CHECK(r.nodes()[1] == doctest::Approx(0.5773502691896257).epsilon(1e-15));
  CHECK(r.weights()[0] == doctest::Approx(1.0));
  CHECK(r.weights()[1] == doctest::Approx(1.0));
}

TEST_CASE("quadrature: nodes are roots of P_n and weights sum to the length") {
  for (int n : {3, 8, 16, 33, 64}) {
    const auto r = gauss_legendre_rule(n, {-1.0, 1.0});
    double total = 0.0;
    for (std::size_t i = 0; i < r.nodes().size(); ++i) {
      CHECK(std::abs(legendre(n, r.nodes()[i])) < 1e-13);
      total += r.weights()[i];
      if (i > 0) CHECK(r.nodes()[i] > r.nodes()[i - 1]);
    }
    CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("quadrature: exactness and closed forms") {
  const auto r = gauss_legendre_rule(16, {0.0, 1.0});
  CHECK(std::abs(integrate([](double x) { return std::pow(x, 15); }, r) - 1.0 / 16.0) < 1e-15);
  CHECK(std::abs(integrate([](double x) { return std::sin(std::numbers::pi * x); }, r) -
                 0.6366197723675814) < 1e-12);
  CHECK(integrate([](double) { return 1.0; }, r) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate([](double x) { return x; }, gauss_legendre_rule(2, {0.0, 1.0})) ==
        doctest::Approx(0.5).epsilon(1e-15));
  const auto e = gauss_legendre_rule(16, {-1.0, 1.0});
  CHECK(std::abs(integrate([](double x) { return std::exp(x); }, e) - 2.3504023872876028) < 1e-13);
}

TEST_CASE("quadrature: composite rule integrates |x - 0.3| exactly when split at the kink") {
  const auto r = construction_rule({0.0, 1.0}, {0.3}, 4, 4);
  const double exact = 0.3 * 0.3 / 2 + 0.7 * 0.7 / 2;
  CHECK(integrate([](double x) { return std::abs(x - 0.3); }, r) == doctest::Approx(exact).epsilon(1e-15));
  bool has_kink = false;
  for (double b : r.breakpoints()) has_kink |= b == 0.3;
  CHECK(has_kink);
}

TEST_CASE("quadrature: oracle rule refines") {
  const auto c = construction_rule({0.0, 1.0}, {}, 2, 8);
  const auto o = oracle_rule(c);
  CHECK(o.panels() >= 64);
  CHECK(o.panels() % c.panels() == 0);
}

TEST_CASE("quadrature: Gauss-Chebyshev") {
  const auto r = gauss_chebyshev_rule(8);
  CHECK(integrate([](double) { return 1.0; }, r) == doctest::Approx(std::numbers::pi));
  CHECK(std::abs(integrate([](double x) { return x * x; }, r) - std::numbers::pi / 2) < 1e-14);
}

TEST_CASE("quadrature: invalid configuration and non-finite integrands") {
  CHECK_THROWS_AS(gauss_legendre_rule(0, {0.0, 1.0}), ConfigurationError);
  CHECK_THROWS_AS(gauss_legendre_rule(65, {0.0, 1.0}), ConfigurationError);
  CHECK_THROWS_AS(composite_gauss_legendre(4, {0.0, 0.5, 0.5, 1.0}), ConfigurationError);
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / (x - x); }, gauss_legendre_rule(4, {0.0, 1.0})),
                  EvaluationError);
}

TEST_CASE("quadrature: compensated sum") {
  CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1.0);
}

TEST_CASE("quadrature: inner products and norms") {
  const auto rule = construction_rule({0.0, 1.0}, {}, 4, 16);
  const NormTag l2{NormKind::L2, {0.0, 1.0}};
  const auto x = TargetFunction::expression("x", {0.0, 1.0});
  const BasisElement b1(BasisFamily::fourier_sine(), 1);
  CHECK(inner_product(x, b1, l2, rule) == doctest::Approx(0.4501581580785531).epsilon(1e-14));
  for (int j = 1; j <= 5; ++j) {
    const BasisElement b(BasisFamily::cubic_bspline({0.0, 1.0}, 6), j);
    CHECK(inner_product(b, b, {NormKind::W12, {0.0, 1.0}}, construction_rule({0.0, 1.0}, b.kinks(), 1)) > 0.0);
  }
  const auto s = TargetFunction::builtin("sinpi");
  const ZeroFunction zero({0.0, 1.0});
  CHECK(norm_of_difference(s, zero, l2, rule).value == doctest::Approx(0.7071067811865476).epsilon(1e-14));
  CHECK(norm_of_difference(s, s, l2, rule).value < 1e-14);
  CHECK_THROWS_AS(inner_product(s, s, {NormKind::SupNorm, {0.0, 1.0}}, rule), UnsupportedNorm);
}

TEST_CASE("quadrature: sup norm of a tent is exact") {
  const BasisElement phi2(BasisFamily::tent(), 1);
  const ZeroFunction zero({0.0, 1.0});
  const auto m = norm_of_difference(phi2, zero, {NormKind::SupNorm, {0.0, 1.0}},
                                    gauss_legendre_rule(4, {0.0, 1.0}));
  CHECK(m.value == 1.0);
  CHECK(m.method == SupNormMethod::ExactBreakpoints);
}

TEST_CASE("quadrature: dense sup estimate is flagged") {
  const auto s = TargetFunction::builtin("sinpi");
  const ZeroFunction zero({0.0, 1.0});
  const auto m = norm_of_difference(s, zero, {NormKind::SupNorm, {0.0, 1.0}},
                                    gauss_legendre_rule(4, {0.0, 1.0}));
  CHECK(m.method == SupNormMethod::DenseEstimate);
  CHECK(m.value == doctest::Approx(1.0).epsilon(1e-12));
}
