#include "certapprox/approximate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "certapprox/errors.hpp"

namespace certapprox {

void ExtractionSettings::validate() const {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    throw ConfigurationError("tolerance must be positive and finite");
  }
  if (max_terms < 1) throw ConfigurationError("max_terms must be >= 1");
  if (points < 1 || points > 64) throw ConfigurationError("points per panel must be in [1, 64]");
}

namespace {

std::string fmt(double v, int digits = 6) {
  std::ostringstream out;
  out.precision(digits);
  out << v;
  return out.str();
}

const BasisFamily& common_family(const std::vector<BasisElement>& elements) {
  if (elements.empty()) throw ConfigurationError("element list is empty");
  for (const auto& e : elements) {
    if (!(e.family() == elements.front().family())) {
      throw ConfigurationError("all elements must come from one basis family");
    }
  }
  return elements.front().family();
}

void check_norm_domain(const RealFunction& f, const BasisFamily& family, const NormTag& norm) {
  const Interval d = norm.domain;
  if (!(d.lo < d.hi) || d.lo < f.domain().lo || d.hi > f.domain().hi || d.lo < family.domain().lo ||
      d.hi > family.domain().hi) {
    throw ConfigurationError("norm domain " + to_string(d) +
                             " must lie inside the target and basis domains");
  }
}

std::vector<Term> make_terms(const std::vector<BasisElement>& elements,
                             const std::vector<double>& coefficients) {
  std::vector<Term> terms;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    terms.push_back({elements[i].index(), coefficients[i], {}});
  }
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.index < b.index; });
  return terms;
}

Approximant approximant_of(const BasisFamily& family, const std::vector<Term>& terms, Interval domain) {
  std::vector<std::pair<int, double>> pairs;
  for (const auto& t : terms) pairs.emplace_back(t.index, t.coefficient);
  return {family, std::move(pairs), domain};
}

}  // namespace

QuadratureRule probe_rule(const RealFunction& f, const std::vector<BasisElement>& elements,
                          Interval domain, int points) {
  std::vector<double> kinks = f.kinks();
  int osc = f.oscillation_hint();
  for (const auto& e : elements) {
    auto k = e.kinks();
    kinks.insert(kinks.end(), k.begin(), k.end());
    osc = std::max(osc, e.oscillation_hint());
  }
  return construction_rule(domain, std::move(kinks), std::max(1, osc), points);
}

// ---------------------------------------------------------------------------
// Orthonormal probing

namespace {

void check_orthonormal(const TargetFunction& f, const BasisFamily& family) {
  if (family.kind() != BasisKind::FourierSine) {
    throw ConfigurationError("orthonormal probing needs the fourier_sine family (orthonormal in L2(0,1))");
  }
  check_norm_domain(f, family, {NormKind::L2, family.domain()});
}

double squared_norm_oracle(const RealFunction& f, Interval domain, int points) {
  const ZeroFunction zero(domain);
  const auto rule = oracle_rule(construction_rule(domain, f.kinks(), std::max(1, f.oscillation_hint()), points));
  const double n = norm_of_difference(f, zero, {NormKind::L2, domain}, rule).value;
  return n * n;
}

}  // namespace

std::vector<double> parseval_errors(const TargetFunction& f, const BasisFamily& family, int count,
                                    int points) {
  check_orthonormal(f, family);
  const Interval domain = family.domain();
  const double norm_sq = squared_norm_oracle(f, domain, points);
  CompensatedSum captured;
  std::vector<double> out;
  for (int j = family.first_index(); j < family.first_index() + count; ++j) {
    const BasisElement e(family, j);
    const double a = inner_product(f, e, {NormKind::L2, domain}, probe_rule(f, {e}, domain, points));
    captured.add(a * a);
    out.push_back(std::sqrt(std::max(norm_sq - captured.value(), 0.0)));
  }
  return out;
}

ApproximationCertificate approximate_orthonormal(const TargetFunction& f, const BasisFamily& family,
                                                 const ExtractionSettings& settings) {
  settings.validate();
  check_orthonormal(f, family);
  const Interval domain = family.domain();
  const NormTag norm{NormKind::L2, domain};
  const double norm_sq = squared_norm_oracle(f, domain, settings.points);

  std::vector<BasisElement> elements;
  std::vector<double> coefficients;
  CompensatedSum captured;
  double parseval = std::sqrt(norm_sq);
  for (int n = 1; n <= settings.max_terms; ++n) {
    const BasisElement e(family, family.first_index() + n - 1);
    const double a = inner_product(f, e, norm, probe_rule(f, {e}, domain, settings.points));
    elements.push_back(e);
    coefficients.push_back(a);
    captured.add(a * a);
    parseval = std::sqrt(std::max(norm_sq - captured.value(), 0.0));
    if (!(parseval < settings.tolerance)) continue;

    // Parseval says done; confirm by direct measurement before certifying.
    auto terms = make_terms(elements, coefficients);
    const auto rule = probe_rule(f, elements, domain, settings.points);
    const double direct =
        norm_of_difference(f, approximant_of(family, terms, domain), norm, rule).value;
    if (!(direct < settings.tolerance)) continue;

    Construction construction{
        Method::OrthonormalProbe, QuadratureProvenance::of(rule),
        "parseval stopping: err_N^2 = ||f||^2 - sum_{j<=N} a_j^2 first below eps^2 at N = " +
            std::to_string(n) + " (parseval err " + fmt(parseval, 17) +
            "); ||f||^2 from verification-grade rule; err re-measured directly"};
    return assemble(f.descriptor(), family, std::move(terms), norm, settings.tolerance, direct,
                    std::move(construction));
  }
  throw ToleranceViolated("orthonormal probing reached max_terms = " + std::to_string(settings.max_terms) +
                              " with error " + fmt(parseval),
                          parseval, settings.tolerance);
}

// ---------------------------------------------------------------------------
// Gram system

GramSolution solve_gram(const RealFunction& f, const std::vector<BasisElement>& elements,
                        const NormTag& norm, int points) {
  if (norm.kind != NormKind::L2 && norm.kind != NormKind::W12) {
    throw UnsupportedNorm("Gram projection needs the l2 or w12 norm");
  }
  const BasisFamily& family = common_family(elements);
  check_norm_domain(f, family, norm);
  const auto n = static_cast<Eigen::Index>(elements.size());
  GramSolution out{{}, 0.0, 0.0, probe_rule(f, elements, norm.domain, points)};

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& bi = elements[static_cast<std::size_t>(i)];
    rhs(i) = inner_product(f, bi, norm, out.rule);
    for (Eigen::Index k = i; k < n; ++k) {
      const auto& bk = elements[static_cast<std::size_t>(k)];
      const Interval overlap = intersect(support(bi), support(bk));
      if (!(overlap.hi > overlap.lo)) continue;
      gram(i, k) = gram(k, i) = inner_product(bi, bk, norm, out.rule);
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  out.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(out.condition <= kMaxGramCondition)) {
    throw IllConditionedBasis("Gram matrix condition estimate " + fmt(out.condition) + " exceeds 1e12",
                              out.condition);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedBasis("Gram matrix is not positive definite", out.condition);
  }
  const Eigen::VectorXd a = llt.solve(rhs);
  out.coefficients.assign(a.data(), a.data() + a.size());

  std::vector<std::pair<int, double>> pairs;
  for (std::size_t i = 0; i < elements.size(); ++i) pairs.emplace_back(elements[i].index(), out.coefficients[i]);
  const Approximant approx(family, std::move(pairs), norm.domain);
  out.error = norm_of_difference(f, approx, norm, out.rule).value;
  return out;
}

ApproximationCertificate approximate_gram(const TargetFunction& f,
                                          const std::vector<BasisElement>& elements,
                                          const NormTag& norm, const ExtractionSettings& settings) {
  settings.validate();
  const GramSolution sol = solve_gram(f, elements, norm, settings.points);
  Construction construction{
      Method::GramSolve, QuadratureProvenance::of(sol.rule),
      "normal equations G a = r solved by Cholesky factorization (LLT); cond(G) = " +
          fmt(sol.condition) + "; error measured directly with the construction rule"};
  return assemble(f.descriptor(), common_family(elements), make_terms(elements, sol.coefficients), norm,
                  settings.tolerance, sol.error, std::move(construction));
}

ApproximationCertificate approximate_raw_probe(const TargetFunction& f,
                                               const std::vector<BasisElement>& elements,
                                               const NormTag& norm,
                                               const ExtractionSettings& settings) {
  settings.validate();
  if (norm.kind != NormKind::L2 && norm.kind != NormKind::W12) {
    throw UnsupportedNorm("raw probing needs the l2 or w12 norm");
  }
  const BasisFamily& family = common_family(elements);
  check_norm_domain(f, family, norm);
  const auto rule = probe_rule(f, elements, norm.domain, settings.points);
  std::vector<double> coefficients;
  for (const auto& e : elements) coefficients.push_back(inner_product(f, e, norm, rule));
  auto terms = make_terms(elements, coefficients);
  const double error = norm_of_difference(f, approximant_of(family, terms, norm.domain), norm, rule).value;
  Construction construction{Method::RawProbe, QuadratureProvenance::of(rule),
                            "raw probes a_j = <f, b_j> without Gram solve; error measured directly"};
  return assemble(f.descriptor(), family, std::move(terms), norm, settings.tolerance, error,
                  std::move(construction));
}

// ---------------------------------------------------------------------------
// Chebyshev

ChebyshevCoefficients chebyshev_coefficients(const RealFunction& f, int degree) {
  if (degree < 0) throw ConfigurationError("Chebyshev degree must be >= 0");
  const BasisFamily family = BasisFamily::chebyshev();
  check_norm_domain(f, family, {NormKind::SupNorm, family.domain()});
  const NormTag weighted{NormKind::ChebyshevWeightedL2, family.domain()};

  auto coefficient = [&](int j, const QuadratureRule& rule) {
    const double ip = inner_product(f, BasisElement(family, j), weighted, rule);
    return (j == 0 ? 1.0 : 2.0) / std::numbers::pi * ip;
  };

  ChebyshevCoefficients out;
  const auto rule = gauss_chebyshev_rule(2 * (degree + 1));
  for (int j = 0; j <= degree; ++j) out.coefficients.push_back(coefficient(j, rule));
  const auto tail_rule = gauss_chebyshev_rule(2 * (degree + kChebyshevTailTerms + 1));
  for (int j = degree + 1; j <= degree + kChebyshevTailTerms; ++j) {
    out.tail.push_back(coefficient(j, tail_rule));
    out.tail_bound += std::fabs(out.tail.back());
  }

  std::vector<std::pair<int, double>> pairs;
  for (int j = 0; j <= degree; ++j) pairs.emplace_back(j, out.coefficients[static_cast<std::size_t>(j)]);
  const Approximant approx(family, std::move(pairs), family.domain());
  for (int k = 0; k < kChebyshevCheckNodes; ++k) {
    const double x = k == 0 ? 1.0
                    : k == kChebyshevCheckNodes - 1
                        ? -1.0
                        : std::cos(std::numbers::pi * k / (kChebyshevCheckNodes - 1));
    out.node_error = std::max(out.node_error, std::fabs(f.value(x) - approx.value(x)));
  }
  return out;
}

ApproximationCertificate approximate_chebyshev(const TargetFunction& f, int degree, double tolerance) {
  const ChebyshevCoefficients c = chebyshev_coefficients(f, degree);
  const BasisFamily family = BasisFamily::chebyshev();
  std::vector<Term> terms;
  for (int j = 0; j <= degree; ++j) terms.push_back({j, c.coefficients[static_cast<std::size_t>(j)], {}});
  const double reported = c.node_error + c.tail_bound;
  Construction construction{
      Method::ChebyshevWeighted, QuadratureProvenance::of(gauss_chebyshev_rule(2 * (degree + 1))),
      "a_0 = (1/pi) sum, a_j = (2/pi) sum over Gauss-Chebyshev nodes; sup-norm ESTIMATE = max |f - f_N| "
      "over " + std::to_string(kChebyshevCheckNodes) + " Chebyshev-Lobatto nodes (" + fmt(c.node_error, 17) +
          ") + tail sum |a_{N+1..N+8}| (" + fmt(c.tail_bound, 17) + ", gauss_chebyshev " +
          std::to_string(2 * (degree + kChebyshevTailTerms + 1)) + " nodes); not a rigorous bound"};
  return assemble(f.descriptor(), family, std::move(terms), {NormKind::SupNorm, family.domain()},
                  tolerance, reported, std::move(construction), {}, SupNormMethod::DenseEstimate);
}

// ---------------------------------------------------------------------------
// Greedy

namespace {

constexpr double kTieWindow = 1e-14;
constexpr double kMinProgress = 1e-15;
constexpr int kStallLimit = 3;

struct GreedyState {
  GreedyTrace trace;
  QuadratureRule rule;
};

GreedyState run_greedy(const RealFunction& f, const std::vector<BasisElement>& dictionary,
                       const NormTag& norm, const ExtractionSettings& settings,
                       const std::function<bool(const GreedyTrace&)>& accept) {
  settings.validate();
  if (norm.kind != NormKind::L2 && norm.kind != NormKind::W12) {
    throw UnsupportedNorm("greedy pursuit needs the l2 or w12 norm");
  }
  const BasisFamily& family = common_family(dictionary);
  check_norm_domain(f, family, norm);
  const std::size_t n = dictionary.size();
  GreedyState state{{}, probe_rule(f, dictionary, norm.domain, settings.points)};

  std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
  std::vector<double> correlation(n);
  for (std::size_t i = 0; i < n; ++i) {
    correlation[i] = inner_product(f, dictionary[i], norm, state.rule);
    for (std::size_t k = i; k < n; ++k) {
      const Interval overlap = intersect(support(dictionary[i]), support(dictionary[k]));
      if (!(overlap.hi > overlap.lo)) continue;
      gram[i][k] = gram[k][i] = inner_product(dictionary[i], dictionary[k], norm, state.rule);
    }
    if (!(gram[i][i] > 0.0)) throw IllConditionedBasis("dictionary element with zero norm", 0.0);
  }
  const ZeroFunction zero(norm.domain);
  double residual = norm_of_difference(f, zero, norm, state.rule).value;
  double residual_sq = residual * residual;
  auto& trace = state.trace;
  trace.residual_norms.push_back(residual);
  std::vector<double> accumulated(n, 0.0);
  std::vector<int> first_pick;
  int stalls = 0;

  for (int iter = 0; iter < settings.max_terms; ++iter) {
    if (residual < settings.tolerance && accept(trace)) break;
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double score = std::fabs(correlation[i]) / std::sqrt(gram[i][i]);
      if (score > best_score + kTieWindow * std::max(1.0, best_score)) {
        best_score = score;
        best = i;
      }
    }
    const double alpha = correlation[best] / gram[best][best];
    for (std::size_t i = 0; i < n; ++i) correlation[i] -= alpha * gram[best][i];
    if (accumulated[best] == 0.0 &&
        std::find(first_pick.begin(), first_pick.end(), static_cast<int>(best)) == first_pick.end()) {
      first_pick.push_back(static_cast<int>(best));
    }
    accumulated[best] += alpha;
    const double next_sq = std::max(residual_sq - alpha * alpha * gram[best][best], 0.0);
    const double next = std::sqrt(next_sq);
    stalls = residual - next < kMinProgress ? stalls + 1 : 0;
    residual = next;
    residual_sq = next_sq;

    trace.selection = first_pick;
    trace.coefficients.clear();
    for (int pos : first_pick) trace.coefficients.push_back(accumulated[static_cast<std::size_t>(pos)]);
    trace.residual_norms.push_back(residual);
    if (stalls >= kStallLimit && !(residual < settings.tolerance)) {
      throw NoProgress("matching pursuit stalled: residual " + fmt(residual) + " above tolerance after " +
                       std::to_string(kStallLimit) + " iterations without progress");
    }
  }
  return state;
}

}  // namespace

GreedyTrace greedy_pursuit(const RealFunction& f, const std::vector<BasisElement>& dictionary,
                           const NormTag& norm, const ExtractionSettings& settings) {
  return run_greedy(f, dictionary, norm, settings, [](const GreedyTrace&) { return true; }).trace;
}

ApproximationCertificate approximate_greedy(const TargetFunction& f,
                                            const std::vector<BasisElement>& dictionary,
                                            const NormTag& norm, const ExtractionSettings& settings) {
  const BasisFamily& family = common_family(dictionary);
  double direct = std::numeric_limits<double>::infinity();
  auto terms_of = [&](const GreedyTrace& t) {
    std::vector<Term> terms;
    for (std::size_t i = 0; i < t.selection.size(); ++i) {
      terms.push_back({dictionary[static_cast<std::size_t>(t.selection[i])].index(), t.coefficients[i], {}});
    }
    return terms;
  };
  const auto rule = probe_rule(f, dictionary, norm.domain, settings.points);
  // Stop only when the direct measurement agrees with the tracked residual.
  auto accept = [&](const GreedyTrace& t) {
    if (t.selection.empty()) return false;
    direct = norm_of_difference(f, approximant_of(family, terms_of(t), norm.domain), norm, rule).value;
    return direct < settings.tolerance;
  };
  const GreedyState state = run_greedy(f, dictionary, norm, settings, accept);
  if (state.trace.selection.empty()) throw ConfigurationError("greedy pursuit selected no element");
  auto terms = terms_of(state.trace);
  direct = norm_of_difference(f, approximant_of(family, terms, norm.domain), norm, rule).value;
  Construction construction{
      Method::Greedy, QuadratureProvenance::of(rule),
      "matching pursuit: argmax |<r, e>| / ||e||, ties to lowest dictionary position; " +
          std::to_string(state.trace.residual_norms.size() - 1) + " iterations; terms in selection order"};
  return assemble(f.descriptor(), family, std::move(terms), norm, settings.tolerance, direct,
                  std::move(construction));
}

}  // namespace certapprox
