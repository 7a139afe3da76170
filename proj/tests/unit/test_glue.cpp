#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "certapprox/errors.hpp"
#include "certapprox/glue.hpp"

using namespace certapprox;

namespace {

ExtractionSettings eps(double e) {
  ExtractionSettings s;
  s.tolerance = e;
  return s;
}

// Restriction of a global expansion to the elements living on `patch`.
LocalCertificate restricted_local(const BasisFamily& fam, const std::vector<double>& coef, int index,
                                  Interval patch, const TargetFunction& f, double tol) {
  std::vector<Term> terms;
  std::vector<std::pair<int, double>> pairs;
  for (const auto& e : local_elements(fam, patch)) {
    terms.push_back({e.index(), coef[static_cast<std::size_t>(e.index() - 1)], {}});
    pairs.emplace_back(e.index(), terms.back().coefficient);
  }
  const auto local = f.restricted(patch);
  const Approximant approx(fam, pairs, patch);
  const auto rule = oracle_rule(construction_rule(patch, approx.kinks(), 4));
  const double err = norm_of_difference(local, approx, {NormKind::W12, patch}, rule).value;
  Construction c{Method::GramSolve, QuadratureProvenance::of(rule), "restriction"};
  return {index, patch,
          assemble(local.descriptor(), fam, terms, {NormKind::W12, patch}, tol, err, c), tol};
}

}  // namespace

TEST_CASE("glue: covers") {
  const auto one = make_cover({0.0, 1.0}, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.patches[0] == Interval{0.0, 1.0});
  CHECK(one.overlap_pairs.empty());

  const auto five = make_cover({0.0, 1.0}, 5, 0.2);
  REQUIRE(five.overlap_pairs.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(five.overlap(i).length() == doctest::Approx(0.04).epsilon(1e-12));

  const auto three = make_cover({0.0, 1.0}, 3);
  CHECK(three.patches.front().lo == 0.0);
  CHECK(three.patches.back().hi == 1.0);
  for (int i = 0; i < 2; ++i) CHECK(three.patches[i].hi > three.patches[i + 1].lo);

  CHECK_THROWS_AS(make_cover({0.0, 1.0}, 0), ConfigurationError);
  CHECK_THROWS(Cover::from_patches({0.0, 1.0}, {{0.0, 0.4}, {0.5, 1.0}}));
  CHECK_THROWS(Cover::from_patches({0.0, 1.0}, {{0.0, 0.6}, {0.3, 0.8}, {0.5, 1.0}}));
}

TEST_CASE("glue: partition of unity") {
  for (int m : {1, 2, 3, 5, 8}) {
    const auto pou = build_pou(make_cover({0.0, 1.0}, m));
    for (int k = 0; k <= 1000; ++k) {
      const double x = k / 1000.0;
      double sum = 0.0;
      for (int i = 0; i < m; ++i) {
        const double w = pou.weight(i, x);
        CHECK(w >= 0.0);
        sum += w;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
  const auto single = build_pou(make_cover({0.0, 1.0}, 1));
  CHECK(single.weight(0, 0.37) == 1.0);
  CHECK(single.max_slope() == 0.0);

  const auto cover = make_cover({0.0, 1.0}, 3);
  const auto pou = build_pou(cover);
  const auto ov = cover.overlap(0);
  const double x = 0.5 * (ov.lo + ov.hi);
  CHECK(pou.weight(0, x) + pou.weight(1, x) == 1.0);
  CHECK(std::abs(pou.weight_derivative(0, x)) == doctest::Approx(1.0 / ov.length()));
  CHECK(std::abs(pou.weight_derivative(1, x)) == doctest::Approx(1.0 / ov.length()));
  CHECK(pou.max_slope() == doctest::Approx(1.0 / ov.length()));
}

TEST_CASE("glue: local extraction") {
  const auto f = TargetFunction::builtin("sinpi");
  const Interval patch{0.0, 0.3};
  const auto local = extract_local(f, 0, patch, BasisFamily::cubic_bspline(patch, 4), eps(5e-3));
  CHECK(local.inner.reported_error < 5e-3);

  const auto fam = BasisFamily::cubic_bspline({0.0, 1.0}, 10);
  const auto b = TargetFunction::series(fam, {{5, 1.0}}, "series:b5");
  const auto exact = extract_local(b.restricted({0.2, 0.8}), 0, {0.2, 0.8}, fam, eps(1e-6));
  CHECK(exact.inner.reported_error < 1e-10);

  // Four cubics on a sliver of one knot span are nearly dependent in W12.
  CHECK_THROWS_AS(extract_local(f, 0, {0.5, 0.5001}, fam, eps(1e-3)), IllConditionedBasis);
}

TEST_CASE("glue: overlap mismatches of a restricted global expansion") {
  const auto f = TargetFunction::builtin("sinpi");
  const auto fam = BasisFamily::cubic_bspline({0.0, 1.0}, 10);
  const auto sol = solve_gram(f, elements_of(fam, fam.indices()), {NormKind::W12, {0.0, 1.0}});
  const auto a = restricted_local(fam, sol.coefficients, 0, {0.0, 0.6}, f, 0.5);
  const auto b = restricted_local(fam, sol.coefficients, 1, {0.4, 1.0}, f, 0.5);
  CHECK(check_overlap(a, a) < 1e-13);
  CHECK(check_overlap(a, b) < 1e-13);

  const auto r = reconcile(a, b, 1e-3, f);
  CHECK(r.record.identity);
  for (const auto& [j, d] : r.record.adjustments) CHECK(d == 0.0);

  auto bumped = b;
  for (auto& t : bumped.inner.terms)
    if (fam.support(t.index).lo < 0.5 && fam.support(t.index).hi > 0.5) {
      t.coefficient += 0.1;
      break;
    }
  CHECK(check_overlap(a, bumped) > 1e-3);

  const auto c = restricted_local(fam, sol.coefficients, 2, {0.7, 1.0}, f, 0.5);
  CHECK_THROWS_AS(check_overlap(a, c), TopologyError);
}

TEST_CASE("glue: reconciliation repairs a mismatch or refuses") {
  const auto f = TargetFunction::builtin("sinpi");
  GlueSettings settings;
  settings.patches = 3;
  settings.tolerance = 1e-2;
  const auto cert = glue_pipeline(f, settings);
  const auto it = std::find_if(cert.reconciliation.begin(), cert.reconciliation.end(),
                               [](const ReconciliationRecord& r) { return !r.identity; });
  REQUIRE(it != cert.reconciliation.end());
  const auto& rec = *it;
  CHECK(rec.pre_mismatch >= cert.delta);
  CHECK(rec.post_mismatch < cert.delta);
  CHECK(rec.penalty > 0.0);
  for (const auto& [j, d] : rec.adjustments) CHECK(std::abs(d) < cert.delta);

  // Replaying the recorded parent reproduces the adjusted local.
  const LocalCertificate a = cert.locals[static_cast<std::size_t>(rec.left)];
  const LocalCertificate b{rec.right, cert.cover.patches[static_cast<std::size_t>(rec.right)], rec.parent,
                           0.5 * cert.tolerance};
  CHECK(check_overlap(a, b) == doctest::Approx(rec.pre_mismatch).epsilon(1e-12));
  const auto r = reconcile(a, b, cert.delta, f);
  CHECK(serialize(r.adjusted.inner) == serialize(cert.locals[static_cast<std::size_t>(rec.right)].inner));
  CHECK(r.adjusted.inner.genealogy == std::vector<std::string>{b.inner.digest, a.inner.digest});
  CHECK(r.adjusted.inner.reported_error < b.local_tolerance);

  const Interval pa{0.0, 0.6}, pb{0.4, 1.0};
  const auto zero = TargetFunction::expression("0", {0.0, 1.0});
  const auto one = TargetFunction::expression("1", {0.0, 1.0});
  const auto za = extract_local(zero, 0, pa, BasisFamily::cubic_bspline(pa, 6), eps(1e-2));
  const auto ob = extract_local(one, 1, pb, BasisFamily::cubic_bspline(pb, 6), eps(1e-2));
  // The two locals differ by 1 on the overlap, far above any usable delta.
  CHECK(check_overlap(za, ob) == doctest::Approx(std::sqrt(0.2)).epsilon(1e-8));
  CHECK_THROWS_AS(reconcile(za, ob, 1e-3, one), ReconciliationFailure);
}

TEST_CASE("glue: single patch reproduces the local certificate") {
  const auto f = TargetFunction::builtin("sinpi");
  GlueSettings s;
  s.patches = 1;
  s.tolerance = 1e-2;
  const auto cert = glue_pipeline(f, s);
  REQUIRE(cert.locals.size() == 1);
  const auto& inner = cert.locals[0].inner;
  const auto count = *inner.basis.count();
  const auto direct = extract_local(f, 0, {0.0, 1.0}, BasisFamily::cubic_bspline({0.0, 1.0}, count), eps(5e-3));
  CHECK(serialize(direct.inner) == serialize(inner));
  const auto g = glued_approximant(cert);
  const auto local = Approximant::of(inner);
  for (double x = 0.0; x <= 1.0; x += 0.01) CHECK(g.value(x) == local.value(x));
  CHECK(cert.c_pu == 1.0);
  CHECK(cert.reported_error == doctest::Approx(inner.reported_error).epsilon(1e-9));
}

TEST_CASE("glue: three patches") {
  const auto f = TargetFunction::builtin("sinpi");
  GlueSettings s;
  s.patches = 3;
  s.tolerance = 1e-2;
  const auto cert = glue_pipeline(f, s);
  CHECK(cert.reported_error < 1e-2);
  CHECK(cert.delta == doctest::Approx(1e-2 / 6));
  for (const auto& r : cert.reconciliation) CHECK(r.post_mismatch < cert.delta);
  CHECK(cert.reported_error <= cert.bound_estimate);

  const auto g = glued_approximant(cert);
  const auto pou = build_pou(cert.cover);
  for (std::size_t i = 0; i < cert.locals.size(); ++i) {
    const auto local = Approximant::of(cert.locals[i].inner);
    const auto& p = cert.cover.patches[i];
    for (double x = p.lo; x <= p.hi; x += 0.005)
      if (pou.weight(static_cast<int>(i), x) == 1.0) CHECK(g.value(x) == local.value(x));
  }

  const auto v = verify_glued(cert, f);
  CHECK(v.verdict());
  const auto bytes = serialize(cert);
  const auto again = glued_from_json(Json::parse(bytes));
  CHECK(serialize(again) == bytes);
  CHECK(compute_digest(again) == cert.digest);

  auto bad = cert;
  bad.locals[1].inner.terms[2].coefficient += 0.1;
  CHECK_FALSE(verify_glued(bad, f).verdict());
}

TEST_CASE("glue: refuses incompatible locals") {
  const auto f = TargetFunction::builtin("sinpi");
  const auto cover = make_cover({0.0, 1.0}, 2);
  std::vector<LocalCertificate> locals;
  for (int i = 0; i < 2; ++i)
    locals.push_back(extract_local(f, i, cover.patches[i], BasisFamily::cubic_bspline(cover.patches[i], 6),
                                   eps(5e-3)));
  auto apart = locals;
  for (auto& t : apart[1].inner.terms) t.coefficient += 0.05;
  CHECK(check_overlap(apart[0], apart[1]) >= 1e-2 / 4);
  CHECK_THROWS_AS(glue(f, apart, {}, build_pou(cover), 1e-2), CompatibilityError);
}
