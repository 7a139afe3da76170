#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "certapprox/basis.hpp"
#include "certapprox/canonical.hpp"
#include "certapprox/quadrature.hpp"
#include "certapprox/target.hpp"

namespace certapprox {

inline constexpr std::string_view kSchemaVersion = "1";
inline constexpr std::string_view kCertificateExtension = ".uelat.json";

enum class Method {
  OrthonormalProbe,
  GramSolve,
  RawProbe,
  Greedy,
  ChebyshevWeighted,  // weighted Gauss-Chebyshev projection
  ExactSeries,        // target is itself a finite sum of basis terms
};

std::string_view method_name(Method method);
Method parse_method(std::string_view name);

/// {rule kind, points, panel breakpoints} of the rule that produced
/// reported_error.
struct QuadratureProvenance {
  QuadratureKind kind = QuadratureKind::CompositeGaussLegendre;
  int points = 16;
  std::vector<double> breakpoints;

  static QuadratureProvenance of(const QuadratureRule& rule);
  QuadratureRule to_rule() const;
  friend bool operator==(const QuadratureProvenance&, const QuadratureProvenance&) = default;
};

struct Construction {
  Method method = Method::GramSolve;
  QuadratureProvenance rule;
  std::string stopping;
  friend bool operator==(const Construction&, const Construction&) = default;
};

struct Term {
  int index = 0;
  double coefficient = 0.0;
  /// Exact rational data ("coefficient" -> "1/4", ...), when available.
  std::map<std::string, std::string> exact;
  friend bool operator==(const Term&, const Term&) = default;
};

/// A finite-rank approximant with everything needed to re-check its bound.
/// Treated as an immutable value: amendments produce a child certificate
/// whose genealogy names the parent.
struct ApproximationCertificate {
  std::string schema_version{kSchemaVersion};
  std::string target_descriptor;
  BasisFamily basis = BasisFamily::monomial();
  std::vector<Term> terms;
  NormTag norm;
  double tolerance = 0.0;
  double reported_error = 0.0;
  SupNormMethod supnorm_method = SupNormMethod::NotApplicable;
  Construction construction;
  std::vector<std::string> genealogy;
  std::string digest;
};

/// sum_j a_j b_j as an evaluable function.
class Approximant final : public RealFunction {
 public:
  Approximant(BasisFamily basis, std::vector<std::pair<int, double>> terms, Interval domain);
  static Approximant of(const ApproximationCertificate& cert);

  Interval domain() const override { return domain_; }
  double value(double x) const override;
  double derivative(double x) const override;
  std::vector<double> kinks() const override;
  bool piecewise_linear() const override;
  int oscillation_hint() const override;

  const BasisFamily& basis() const noexcept { return basis_; }
  const std::vector<std::pair<int, double>>& terms() const noexcept { return terms_; }

 private:
  BasisFamily basis_;
  std::vector<std::pair<int, double>> terms_;
  Interval domain_;
  /// Dense FourierSine coefficients for Clenshaw summation of long series.
  std::vector<double> dense_;
};

/// Term count from which FourierSine approximants use Clenshaw summation.
inline constexpr std::size_t kClenshawMinTerms = 64;

/// Builds the certificate and its digest. Throws ToleranceViolated when
/// reported_error >= tolerance and ConfigurationError on malformed terms.
ApproximationCertificate assemble(std::string target_descriptor, BasisFamily basis,
                                  std::vector<Term> terms, NormTag norm, double tolerance,
                                  double reported_error, Construction construction,
                                  std::vector<std::string> parents = {},
                                  SupNormMethod supnorm_method = SupNormMethod::NotApplicable);

Json to_json(const ApproximationCertificate& cert);
ApproximationCertificate certificate_from_json(const Json& j, const std::string& path = "$");

/// Canonical bytes (with digest).
std::string serialize(const ApproximationCertificate& cert);
ApproximationCertificate deserialize(std::string_view bytes);

/// Parses certificate text of any kind; truncated input is reported as a
/// ParseError naming the first required top-level field that is missing.
Json parse_certificate_text(std::string_view bytes,
                            const std::vector<std::string>& required_fields = {});

std::string compute_digest(const ApproximationCertificate& cert);

/// Digest-addressed collection of canonical certificate/evidence records.
class CertificateStore {
 public:
  /// Stores `j` under its "digest" member (or its content digest).
  std::string add(const Json& j);
  std::string add(const ApproximationCertificate& cert) { return add(to_json(cert)); }
  bool contains(const std::string& digest) const { return records_.count(digest) > 0; }
  const Json* find(const std::string& digest) const;
  std::size_t size() const noexcept { return records_.size(); }
  /// True when the parent-digest graph (the "genealogy" members) has no cycle.
  bool genealogy_is_acyclic() const;

 private:
  std::map<std::string, Json> records_;
};

struct VerificationReport {
  std::string digest;
  double recomputed_error = 0.0;
  SupNormMethod recomputed_method = SupNormMethod::NotApplicable;
  bool bound_honored = false;
  bool structural_ok = false;
  std::vector<std::string> notes;

  bool verdict() const noexcept { return bound_honored && structural_ok; }
};

inline constexpr double kBoundRelativeSlack = 1e-6;
inline constexpr double kBoundAbsoluteSlack = 1e-12;

/// Rebuilds the approximant from the certificate alone and re-measures the
/// error against `f` with a verification-grade rule. Never throws for
/// adverse findings; they land in the report.
VerificationReport verify(const ApproximationCertificate& cert, const TargetFunction& f,
                          const CertificateStore* store = nullptr);

/// Rule the verifier uses for `cert`: the recorded construction panels merged
/// with the approximant's and target's kinks, then refined by oracle_rule.
QuadratureRule verification_rule(const ApproximationCertificate& cert, const RealFunction& f);

/// Helpers shared by the composite certificate kinds.
Json interval_to_json(const Interval& iv);
Interval interval_from_json(const Json& j, const std::string& path);
Json basis_to_json(const BasisFamily& basis);
BasisFamily basis_from_json(const Json& j, const std::string& path);
const Json& require(const Json& j, std::string_view key, const std::string& path);
double require_number(const Json& j, std::string_view key, const std::string& path);
std::string require_string(const Json& j, std::string_view key, const std::string& path);
int require_int(const Json& j, std::string_view key, const std::string& path);

}  // namespace certapprox
