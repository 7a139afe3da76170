#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "certapprox/basis.hpp"
#include "certapprox/errors.hpp"

using namespace certapprox;

namespace {

// Plain Cox-de Boor on an explicit knot vector, 0-based index i.
double cox_de_boor(const std::vector<double>& t, int i, int p, double x) {
  if (p == 0) {
    const bool last = t[i + 1] == t.back() && x == t.back() && t[i] < t[i + 1];
    return (t[i] <= x && x < t[i + 1]) || last ? 1.0 : 0.0;
  }
  double v = 0.0;
  if (t[i + p] > t[i]) v += (x - t[i]) / (t[i + p] - t[i]) * cox_de_boor(t, i, p - 1, x);
  if (t[i + p + 1] > t[i + 1])
    v += (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * cox_de_boor(t, i + 1, p - 1, x);
  return v;
}

std::vector<double> clamped_knots(int count) {
  const int interior = count - 4;
  std::vector<double> t(4, 0.0);
  for (int k = 1; k <= interior; ++k) t.push_back(static_cast<double>(k) / (interior + 1));
  for (int k = 0; k < 4; ++k) t.push_back(1.0);
  return t;
}

}  // namespace

TEST_CASE("basis: point values") {
  CHECK(BasisFamily::chebyshev().eval(2, 0.5) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(BasisFamily::fourier_sine().eval(1, 0.5) == doctest::Approx(1.4142135623730951).epsilon(1e-15));
  CHECK(BasisFamily::tent().eval(1, 0.25) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(BasisFamily::tent().eval(0, 0.5) == 1.0);
  CHECK(BasisFamily::tent().eval(3, 0.0) == 0.0);
}

TEST_CASE("basis: derivatives") {
  CHECK(BasisFamily::monomial({0.0, 3.0}).eval_deriv(3, 2.0) == doctest::Approx(12.0));
  CHECK(BasisFamily::fourier_sine().eval_deriv(1, 0.0) == doctest::Approx(4.442882938158366).epsilon(1e-15));
}

TEST_CASE("basis: chebyshev matches cos(j acos x)") {
  const auto fam = BasisFamily::chebyshev();
  for (int j = 0; j <= 20; ++j)
    for (double x = -1.0; x <= 1.0; x += 0.125)
      CHECK(fam.eval(j, x) == doctest::Approx(std::cos(j * std::acos(x))).epsilon(1e-12));
}

TEST_CASE("basis: cubic B-splines agree with an independent Cox-de Boor") {
  const int count = 10;
  const auto fam = BasisFamily::cubic_bspline({0.0, 1.0}, count);
  const auto t = clamped_knots(count);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = u(rng);
    double sum = 0.0;
    for (int j = 1; j <= count; ++j) {
      CHECK(fam.eval(j, x) == doctest::Approx(cox_de_boor(t, j - 1, 3, x)).epsilon(1e-12));
      sum += fam.eval(j, x);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("basis: B-spline derivatives sum to zero at interior points") {
  const auto fam = BasisFamily::cubic_bspline({0.0, 1.0}, 10);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = u(rng);
    double sum = 0.0;
    for (int j = 1; j <= 10; ++j) sum += fam.eval_deriv(j, x);
    CHECK(std::abs(sum) < 1e-11);
  }
}

TEST_CASE("basis: B-spline derivative by central difference") {
  const auto fam = BasisFamily::cubic_bspline({0.0, 1.0}, 8);
  const double h = 1e-6;
  for (int j = 1; j <= 8; ++j)
    for (double x : {0.11, 0.37, 0.52, 0.81}) {
      const double fd = (fam.eval(j, x + h) - fam.eval(j, x - h)) / (2 * h);
      CHECK(fam.eval_deriv(j, x) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("basis: supports") {
  CHECK(BasisFamily::fourier_sine().support(5) == Interval{0.0, 1.0});
  CHECK(BasisFamily::tent().support(2) == Interval{0.0, 1.0});
  const auto sp = BasisFamily::cubic_bspline({0.0, 1.0}, 10).support(1);
  CHECK(sp.lo == 0.0);
  CHECK(sp.hi <= 0.4);
  CHECK(sp.hi == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("basis: invalid use") {
  CHECK_THROWS_AS(BasisFamily::fourier_sine().eval(0, 0.5), ConfigurationError);
  CHECK_THROWS_AS(BasisFamily::fourier_sine().eval(1, 1.5), DomainError);
  CHECK_THROWS_AS(BasisFamily::chebyshev().eval(1, -1.01), DomainError);
  CHECK_THROWS_AS(BasisFamily::cubic_bspline({0.0, 1.0}, 3), ConfigurationError);
  CHECK_THROWS_AS(BasisFamily::cubic_bspline({0.0, 1.0}, 5).eval(6, 0.5), ConfigurationError);
}

TEST_CASE("basis: triangle wave convention") {
  CHECK(triangle_wave(0.0) == 0.0);
  CHECK(triangle_wave(0.5) == 1.0);
  CHECK(triangle_wave(1.0) == 0.0);
  CHECK(triangle_wave(0.25) == 0.5);
  CHECK(triangle_wave_slope(0.0) == 2.0);
  CHECK(triangle_wave_slope(0.5) == -2.0);
}
