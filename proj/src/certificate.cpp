#include "certapprox/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "certapprox/errors.hpp"

namespace certapprox {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::OrthonormalProbe: return "orthonormal_probe";
    case Method::GramSolve: return "gram_solve";
    case Method::RawProbe: return "raw_probe";
    case Method::Greedy: return "greedy";
    case Method::ChebyshevWeighted: return "chebyshev_weighted";
    case Method::ExactSeries: return "exact_series";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::OrthonormalProbe, Method::GramSolve, Method::RawProbe, Method::Greedy,
                 Method::ChebyshevWeighted, Method::ExactSeries}) {
    if (method_name(m) == name) return m;
  }
  throw ConfigurationError("unknown construction method '" + std::string(name) + "'");
}

QuadratureProvenance QuadratureProvenance::of(const QuadratureRule& rule) {
  return {rule.kind(), rule.points(), rule.breakpoints()};
}

QuadratureRule QuadratureProvenance::to_rule() const {
  if (kind == QuadratureKind::GaussChebyshev) return gauss_chebyshev_rule(points);
  return composite_gauss_legendre(points, breakpoints);
}

// ---------------------------------------------------------------------------
// Approximant

Approximant::Approximant(BasisFamily basis, std::vector<std::pair<int, double>> terms, Interval domain)
    : basis_(std::move(basis)), terms_(std::move(terms)), domain_(domain) {
  if (basis_.kind() != BasisKind::FourierSine || terms_.size() < kClenshawMinTerms) return;
  int top = 0;
  for (const auto& [j, c] : terms_) {
    if (!basis_.valid_index(j)) return;
    top = std::max(top, j);
  }
  dense_.assign(static_cast<std::size_t>(top) + 1, 0.0);
  for (const auto& [j, c] : terms_) dense_[static_cast<std::size_t>(j)] += c;
}

Approximant Approximant::of(const ApproximationCertificate& cert) {
  std::vector<std::pair<int, double>> terms;
  terms.reserve(cert.terms.size());
  for (const auto& t : cert.terms) terms.emplace_back(t.index, t.coefficient);
  return {cert.basis, std::move(terms), cert.norm.domain};
}

namespace {

// Clenshaw recurrence b_k = c_k + 2 cos(t) b_{k+1} - b_{k+2}, k = top..1.
std::pair<double, double> clenshaw(const std::vector<double>& c, double t, bool weighted) {
  const double alpha = 2.0 * std::cos(t);
  double b1 = 0.0;
  double b2 = 0.0;
  for (std::size_t k = c.size() - 1; k >= 1; --k) {
    const double ck = weighted ? static_cast<double>(k) * c[k] : c[k];
    const double b0 = ck + alpha * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return {b1, b2};
}

void check_sine_point(const BasisFamily& basis, double x) {
  if (!basis.domain().contains(x)) {
    throw DomainError("x = " + format_double(x) + " outside " + to_string(basis.domain()));
  }
}

}  // namespace

double Approximant::value(double x) const {
  if (!dense_.empty()) {
    // sqrt(2) sum a_j sin(j t) = sqrt(2) sin(t) b_1
    check_sine_point(basis_, x);
    const double t = std::numbers::pi * x;
    return std::numbers::sqrt2 * std::sin(t) * clenshaw(dense_, t, false).first;
  }
  double s = 0.0;
  for (const auto& [j, c] : terms_) s += c * basis_.eval(j, x);
  return s;
}

double Approximant::derivative(double x) const {
  if (!dense_.empty()) {
    // sqrt(2) pi sum j a_j cos(j t) = sqrt(2) pi (cos(t) b_1 - b_2)
    check_sine_point(basis_, x);
    const double t = std::numbers::pi * x;
    const auto [b1, b2] = clenshaw(dense_, t, true);
    return std::numbers::sqrt2 * std::numbers::pi * (std::cos(t) * b1 - b2);
  }
  double s = 0.0;
  for (const auto& [j, c] : terms_) s += c * basis_.eval_deriv(j, x);
  return s;
}

std::vector<double> Approximant::kinks() const {
  std::vector<double> out;
  for (const auto& [j, c] : terms_) {
    auto k = basis_.kinks(j);
    out.insert(out.end(), k.begin(), k.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Approximant::piecewise_linear() const { return basis_.kind() == BasisKind::TentHierarchy; }

int Approximant::oscillation_hint() const {
  int h = 0;
  for (const auto& [j, c] : terms_) h = std::max(h, basis_.oscillation_hint(j));
  return h;
}

// ---------------------------------------------------------------------------
// JSON helpers

Json interval_to_json(const Interval& iv) { return Json::array({iv.lo, iv.hi}); }

const Json& require(const Json& j, std::string_view key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
  auto it = j.find(std::string(key));
  if (it == j.end()) throw ParseError(path + "." + std::string(key), "missing field");
  return *it;
}

double require_number(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number()) throw ParseError(path + "." + std::string(key), "expected a number");
  return v.get<double>();
}

std::string require_string(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_string()) throw ParseError(path + "." + std::string(key), "expected a string");
  return v.get<std::string>();
}

int require_int(const Json& j, std::string_view key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ParseError(path + "." + std::string(key), "expected an integer");
  return v.get<int>();
}

namespace {

template <typename F>
auto rethrow_as_parse(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(path, e.what());
  }
}

}  // namespace

Interval interval_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError(path, "expected [lo, hi]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Json basis_to_json(const BasisFamily& basis) {
  Json j = {{"family", std::string(basis.name())}, {"domain", interval_to_json(basis.domain())}};
  if (basis.count()) j["knot_count"] = *basis.count();
  return j;
}

BasisFamily basis_from_json(const Json& j, const std::string& path) {
  const std::string family = require_string(j, "family", path);
  const Interval domain = interval_from_json(require(j, "domain", path), path + ".domain");
  return rethrow_as_parse(path, [&]() -> BasisFamily {
    switch (parse_basis_kind(family)) {
      case BasisKind::Chebyshev: return BasisFamily::chebyshev();
      case BasisKind::FourierSine: return BasisFamily::fourier_sine();
      case BasisKind::Monomial: return BasisFamily::monomial(domain);
      case BasisKind::TentHierarchy: return BasisFamily::tent();
      case BasisKind::CubicBSpline:
        return BasisFamily::cubic_bspline(domain, require_int(j, "knot_count", path));
    }
    throw ParseError(path, "unknown family");
  });
}

Json to_json(const ApproximationCertificate& cert) {
  Json terms = Json::array();
  for (const auto& t : cert.terms) {
    Json jt = {{"index", t.index}, {"coefficient", t.coefficient}};
    if (!t.exact.empty()) jt["exact"] = t.exact;
    terms.push_back(std::move(jt));
  }
  Json j = {
      {"kind", "approximation"},
      {"schema_version", cert.schema_version},
      {"target", cert.target_descriptor},
      {"basis", basis_to_json(cert.basis)},
      {"terms", std::move(terms)},
      {"norm", {{"kind", std::string(norm_kind_name(cert.norm.kind))},
                {"domain", interval_to_json(cert.norm.domain)}}},
      {"tolerance", cert.tolerance},
      {"reported_error", cert.reported_error},
      {"supnorm_method", std::string(sup_norm_method_name(cert.supnorm_method))},
      {"construction",
       {{"method", std::string(method_name(cert.construction.method))},
        {"rule",
         {{"kind", std::string(quadrature_kind_name(cert.construction.rule.kind))},
          {"points", cert.construction.rule.points},
          {"breakpoints", cert.construction.rule.breakpoints}}},
        {"stopping", cert.construction.stopping}}},
      {"genealogy", cert.genealogy},
  };
  if (!cert.digest.empty()) j["digest"] = cert.digest;
  return j;
}

namespace {

SupNormMethod parse_sup_method(std::string_view name, const std::string& path) {
  for (auto m : {SupNormMethod::NotApplicable, SupNormMethod::ExactBreakpoints,
                 SupNormMethod::DenseEstimate}) {
    if (sup_norm_method_name(m) == name) return m;
  }
  throw ParseError(path, "unknown sup-norm method '" + std::string(name) + "'");
}

}  // namespace

ApproximationCertificate certificate_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
  ApproximationCertificate cert;
  cert.schema_version = require_string(j, "schema_version", path);
  if (cert.schema_version != kSchemaVersion) {
    throw ParseError(path + ".schema_version",
                     "unsupported schema version '" + cert.schema_version + "'");
  }
  if (const auto kind = require_string(j, "kind", path); kind != "approximation") {
    throw ParseError(path + ".kind", "expected 'approximation', found '" + kind + "'");
  }
  cert.target_descriptor = require_string(j, "target", path);
  cert.basis = basis_from_json(require(j, "basis", path), path + ".basis");

  const Json& terms = require(j, "terms", path);
  if (!terms.is_array()) throw ParseError(path + ".terms", "expected an array");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string tp = path + ".terms[" + std::to_string(i) + "]";
    Term t;
    t.index = require_int(terms[i], "index", tp);
    t.coefficient = require_number(terms[i], "coefficient", tp);
    if (auto it = terms[i].find("exact"); it != terms[i].end()) {
      if (!it->is_object()) throw ParseError(tp + ".exact", "expected an object");
      for (auto e = it->begin(); e != it->end(); ++e) {
        if (!e->is_string()) throw ParseError(tp + ".exact." + e.key(), "expected a string");
        t.exact[e.key()] = e->get<std::string>();
      }
    }
    cert.terms.push_back(std::move(t));
  }

  const Json& norm = require(j, "norm", path);
  cert.norm.kind = rethrow_as_parse(path + ".norm.kind", [&] {
    return parse_norm_kind(require_string(norm, "kind", path + ".norm"));
  });
  cert.norm.domain = interval_from_json(require(norm, "domain", path + ".norm"), path + ".norm.domain");
  cert.tolerance = require_number(j, "tolerance", path);
  cert.reported_error = require_number(j, "reported_error", path);
  cert.supnorm_method =
      parse_sup_method(require_string(j, "supnorm_method", path), path + ".supnorm_method");

  const std::string cp = path + ".construction";
  const Json& construction = require(j, "construction", path);
  cert.construction.method =
      rethrow_as_parse(cp + ".method", [&] { return parse_method(require_string(construction, "method", cp)); });
  const Json& rule = require(construction, "rule", cp);
  cert.construction.rule.kind = rethrow_as_parse(cp + ".rule.kind", [&] {
    return parse_quadrature_kind(require_string(rule, "kind", cp + ".rule"));
  });
  cert.construction.rule.points = require_int(rule, "points", cp + ".rule");
  const Json& breaks = require(rule, "breakpoints", cp + ".rule");
  if (!breaks.is_array()) throw ParseError(cp + ".rule.breakpoints", "expected an array");
  for (const auto& b : breaks) {
    if (!b.is_number()) throw ParseError(cp + ".rule.breakpoints", "expected numbers");
    cert.construction.rule.breakpoints.push_back(b.get<double>());
  }
  cert.construction.stopping = require_string(construction, "stopping", cp);

  const Json& genealogy = require(j, "genealogy", path);
  if (!genealogy.is_array()) throw ParseError(path + ".genealogy", "expected an array");
  for (const auto& g : genealogy) {
    if (!g.is_string()) throw ParseError(path + ".genealogy", "expected digest strings");
    cert.genealogy.push_back(g.get<std::string>());
  }
  cert.digest = require_string(j, "digest", path);
  return cert;
}

std::string compute_digest(const ApproximationCertificate& cert) { return content_digest(to_json(cert)); }

std::string serialize(const ApproximationCertificate& cert) { return canonical_dump(to_json(cert)); }

namespace {

// Records which top-level members of a (possibly truncated) document were
// completely read.
class TopLevelKeys {
 public:
  using number_integer_t = Json::number_integer_t;
  using number_unsigned_t = Json::number_unsigned_t;
  using number_float_t = Json::number_float_t;
  using string_t = Json::string_t;
  using binary_t = Json::binary_t;

  std::set<std::string> complete;

  bool null() { return scalar(); }
  bool boolean(bool) { return scalar(); }
  bool number_integer(number_integer_t) { return scalar(); }
  bool number_unsigned(number_unsigned_t) { return scalar(); }
  bool number_float(number_float_t, const string_t&) { return scalar(); }
  bool string(string_t&) { return scalar(); }
  bool binary(binary_t&) { return scalar(); }
  bool start_object(std::size_t) { ++depth_; return true; }
  bool end_object() { return close(); }
  bool start_array(std::size_t) { ++depth_; return true; }
  bool end_array() { return close(); }
  bool key(string_t& k) {
    if (depth_ == 1) current_ = k;
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) {
    return false;
  }

 private:
  bool scalar() {
    if (depth_ == 1) complete.insert(current_);
    return true;
  }
  bool close() {
    --depth_;
    if (depth_ == 1) complete.insert(current_);
    return true;
  }

  int depth_ = 0;
  std::string current_;
};

const std::vector<std::string> kApproximationFields = {
    "basis", "construction", "digest", "genealogy", "kind", "norm", "reported_error",
    "schema_version", "supnorm_method", "target", "terms", "tolerance"};

}  // namespace

Json parse_certificate_text(std::string_view bytes, const std::vector<std::string>& required_fields) {
  Json j = Json::parse(bytes, nullptr, false);
  if (!j.is_discarded()) return j;
  TopLevelKeys keys;
  Json::sax_parse(bytes, &keys);
  const auto& required = required_fields.empty() ? kApproximationFields : required_fields;
  for (const auto& field : required) {
    if (!keys.complete.count(field)) {
      throw ParseError("$." + field, "missing field (input is truncated or malformed)");
    }
  }
  throw ParseError("$", "malformed certificate text");
}

ApproximationCertificate deserialize(std::string_view bytes) {
  return certificate_from_json(parse_certificate_text(bytes, kApproximationFields));
}

namespace {

void check_terms(const BasisFamily& basis, const std::vector<Term>& terms, Method method) {
  if (terms.empty()) throw ConfigurationError("certificate needs at least one term");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!basis.valid_index(terms[i].index)) {
      throw ConfigurationError("term index " + std::to_string(terms[i].index) + " outside basis");
    }
    if (!std::isfinite(terms[i].coefficient)) throw ConfigurationError("non-finite coefficient");
    if (i && method != Method::Greedy && !(terms[i].index > terms[i - 1].index)) {
      throw ConfigurationError("term indices must be strictly increasing");
    }
  }
  if (method == Method::Greedy) {
    std::set<int> seen;
    for (const auto& t : terms) {
      if (!seen.insert(t.index).second) throw ConfigurationError("greedy terms repeat an index");
    }
  }
}

std::string format_error(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

ApproximationCertificate assemble(std::string target_descriptor, BasisFamily basis,
                                  std::vector<Term> terms, NormTag norm, double tolerance,
                                  double reported_error, Construction construction,
                                  std::vector<std::string> parents, SupNormMethod supnorm_method) {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    throw ConfigurationError("tolerance must be positive and finite");
  }
  if (!std::isfinite(reported_error) || reported_error < 0.0) {
    throw ConfigurationError("reported error must be finite and non-negative");
  }
  check_terms(basis, terms, construction.method);
  if (!(reported_error < tolerance)) {
    throw ToleranceViolated("achieved error " + format_error(reported_error) +
                                " does not meet tolerance " + format_error(tolerance),
                            reported_error, tolerance);
  }
  ApproximationCertificate cert;
  cert.target_descriptor = std::move(target_descriptor);
  cert.basis = std::move(basis);
  cert.terms = std::move(terms);
  cert.norm = norm;
  cert.tolerance = tolerance;
  cert.reported_error = reported_error;
  cert.supnorm_method = supnorm_method;
  cert.construction = std::move(construction);
  cert.genealogy = std::move(parents);
  cert.digest = compute_digest(cert);
  return cert;
}

// ---------------------------------------------------------------------------
// Store

std::string CertificateStore::add(const Json& j) {
  std::string digest = j.is_object() && j.contains("digest") && j["digest"].is_string()
                           ? j["digest"].get<std::string>()
                           : content_digest(j);
  records_.emplace(digest, j);
  return digest;
}

const Json* CertificateStore::find(const std::string& digest) const {
  auto it = records_.find(digest);
  return it == records_.end() ? nullptr : &it->second;
}

bool CertificateStore::genealogy_is_acyclic() const {
  enum class Mark { None, Active, Done };
  std::map<std::string, Mark> marks;
  std::function<bool(const std::string&)> visit = [&](const std::string& d) {
    auto& m = marks[d];
    if (m == Mark::Active) return false;
    if (m == Mark::Done) return true;
    m = Mark::Active;
    if (const Json* rec = find(d); rec && rec->contains("genealogy")) {
      for (const auto& parent : (*rec)["genealogy"]) {
        if (parent.is_string() && contains(parent.get<std::string>()) && !visit(parent.get<std::string>())) {
          return false;
        }
      }
    }
    marks[d] = Mark::Done;
    return true;
  };
  for (const auto& [d, rec] : records_) {
    if (!visit(d)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Verification

QuadratureRule verification_rule(const ApproximationCertificate& cert, const RealFunction& f) {
  const Interval domain = cert.norm.domain;
  if (cert.norm.kind == NormKind::ChebyshevWeightedL2) {
    return gauss_chebyshev_rule(4 * std::max(cert.construction.rule.points, 1));
  }
  std::vector<double> breaks;
  const auto& recorded = cert.construction.rule.breakpoints;
  const bool usable = recorded.size() >= 2 && recorded.front() == domain.lo &&
                      recorded.back() == domain.hi &&
                      std::is_sorted(recorded.begin(), recorded.end());
  if (usable) breaks = recorded;
  breaks.push_back(domain.lo);
  breaks.push_back(domain.hi);
  const Approximant approx = Approximant::of(cert);
  for (double k : merged_kinks(approx, f)) {
    if (k > domain.lo && k < domain.hi) breaks.push_back(k);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const int points = cert.construction.rule.points >= 1 && cert.construction.rule.points <= 64
                         ? cert.construction.rule.points
                         : 16;
  // Segments are also sized to resolve trigonometric content.
  const int osc = std::max(approx.oscillation_hint(), f.oscillation_hint());
  const QuadratureRule base = construction_rule(
      domain, std::vector<double>(breaks.begin() + 1, breaks.end() - 1), osc, points);
  return oracle_rule(base);
}

VerificationReport verify(const ApproximationCertificate& cert, const TargetFunction& f,
                          const CertificateStore* store) {
  VerificationReport report;
  report.digest = cert.digest;
  bool structural = true;
  auto fail = [&](std::string note) {
    structural = false;
    report.notes.push_back(std::move(note));
  };

  if (cert.schema_version != kSchemaVersion) fail("schema version mismatch");
  if (!(cert.tolerance > 0.0)) fail("tolerance is not positive");
  if (!(cert.reported_error < cert.tolerance)) {
    fail("reported error " + format_error(cert.reported_error) + " is not below tolerance " +
         format_error(cert.tolerance));
  }
  try {
    check_terms(cert.basis, cert.terms, cert.construction.method);
  } catch (const Error& e) {
    fail(std::string("term list: ") + e.what());
  }
  if (compute_digest(cert) != cert.digest) fail("digest does not match canonical bytes");
  try {
    const std::string bytes = serialize(cert);
    if (serialize(deserialize(bytes)) != bytes) fail("serialization round-trip is not byte-identical");
  } catch (const Error& e) {
    fail(std::string("serialization round-trip failed: ") + e.what());
  }
  if (cert.target_descriptor != f.descriptor()) {
    fail("target descriptor '" + cert.target_descriptor + "' does not match '" + f.descriptor() + "'");
  }
  const Interval nd = cert.norm.domain;
  if (!(nd.lo < nd.hi) || nd.lo < f.domain().lo || nd.hi > f.domain().hi ||
      nd.lo < cert.basis.domain().lo || nd.hi > cert.basis.domain().hi) {
    fail("norm domain " + to_string(nd) + " is not inside the target and basis domains");
  }
  for (const auto& parent : cert.genealogy) {
    const bool hex = parent.size() == 64 &&
                     std::all_of(parent.begin(), parent.end(),
                                 [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
    if (!hex) {
      fail("genealogy entry '" + parent + "' is not a SHA-256 digest");
    } else if (store && !store->contains(parent)) {
      fail("genealogy digest " + parent + " does not resolve");
    } else if (!store) {
      report.notes.push_back("genealogy digest " + parent + " not resolved (no store supplied)");
    }
  }

  {
    try {
      const Approximant approx = Approximant::of(cert);
      const Interval domain = cert.norm.domain;
      const TargetFunction target = f.restricted(domain);
      NormMeasurement m;
      if (cert.norm.kind == NormKind::SupNorm) {
        const auto rule = gauss_legendre_rule(1, domain);
        m = norm_of_difference(target, approx, cert.norm, rule, kDenseSupGrid);
      } else {
        m = norm_of_difference(target, approx, cert.norm, verification_rule(cert, target));
      }
      report.recomputed_error = m.value;
      report.recomputed_method = m.method;
    } catch (const Error& e) {
      fail(std::string("recomputation failed: ") + e.what());
      report.recomputed_error = std::numeric_limits<double>::infinity();
    }
  }
  report.structural_ok = structural;
  report.bound_honored =
      std::isfinite(report.recomputed_error) &&
      report.recomputed_error <= cert.reported_error * (1.0 + kBoundRelativeSlack) + kBoundAbsoluteSlack &&
      cert.reported_error < cert.tolerance;
  if (!report.bound_honored) {
    report.notes.push_back("recomputed error " + format_error(report.recomputed_error) +
                           " vs reported " + format_error(cert.reported_error));
  }
  return report;
}

}  // namespace certapprox
