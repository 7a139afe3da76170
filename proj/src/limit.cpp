#include "certapprox/limit.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "certapprox/errors.hpp"

namespace certapprox {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

constexpr std::string_view kTentSpec = "ceil(log2(2/eps))";
constexpr std::string_view kConstantPrefix = "constant:";
constexpr int kMaxExactLevels = 26;

std::string dyadic(int k) {
  if (k == 0) return "1";
  return "1/" + (cpp_int(1) << k).str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Modulus

int Modulus::operator()(double eps) const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigurationError("modulus argument must be positive");
  return rule(eps);
}

Modulus Modulus::tent_closed_form() {
  return {std::string(kTentSpec), [](double eps) {
            // ldexp is exact, so this is the smallest N with 2^N >= 2 / eps.
            int n = 0;
            while (std::ldexp(eps, n) < 2.0) ++n;
            return n;
          }};
}

Modulus Modulus::constant(int n) {
  return {std::string(kConstantPrefix) + std::to_string(n), [n](double) { return n; }};
}

Modulus Modulus::from_spec(const std::string& spec) {
  if (spec == kTentSpec) return tent_closed_form();
  if (spec.rfind(kConstantPrefix, 0) == 0) {
    const std::string rest = spec.substr(kConstantPrefix.size());
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == rest.size() && !rest.empty()) return constant(n);
  }
  throw ConfigurationError("unknown modulus spec '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Sequences

CertifiedSequence::CertifiedSequence(std::string name, Generator generator, Modulus modulus, TailBound tail)
    : name_(std::move(name)), generator_(std::move(generator)), modulus_(std::move(modulus)),
      tail_(std::move(tail)) {}

const CertifiedSequence::Member& CertifiedSequence::member(int n) const {
  if (auto it = members_.find(n); it != members_.end()) return it->second;
  std::optional<Member> m;
  if (n >= 1) m = generator_(n);
  if (!m) throw IncompleteSequence("sequence '" + name_ + "' has no certified member " + std::to_string(n), n);
  return members_.emplace(n, std::move(*m)).first->second;
}

std::optional<double> CertifiedSequence::closed_form_tail(int n) const {
  if (!tail_) return std::nullopt;
  return tail_(n);
}

ApproximationCertificate tent_member_certificate(int n) {
  const TargetFunction f = tent_partial_sum(n);
  std::vector<Term> terms;
  for (int k = 0; k <= n; ++k) {
    terms.push_back({k,
                     std::ldexp(1.0, -k),
                     {{"coefficient", dyadic(k)},
                      {"period", dyadic(k)},
                      {"breakpoint_spacing", dyadic(k + 1)},
                      {"slopes", "2,-2"}}});
  }
  Construction construction{Method::ExactSeries,
                            {QuadratureKind::GaussLegendre, 1, {0.0, 1.0}},
                            "exact: the target is the finite tent sum itself; error 0 by identity"};
  return assemble(f.descriptor(), BasisFamily::tent(), std::move(terms), {NormKind::SupNorm, {0.0, 1.0}},
                  std::ldexp(1.0, -50), 0.0, std::move(construction), {}, SupNormMethod::ExactBreakpoints);
}

CertifiedSequence CertifiedSequence::tent_series(Modulus modulus) {
  return CertifiedSequence(
      "tent_series",
      [](int n) -> std::optional<Member> {
        if (n < 1 || n > 50) return std::nullopt;
        return Member{tent_partial_sum(n), tent_member_certificate(n)};
      },
      std::move(modulus), [](int n) -> std::optional<double> { return std::ldexp(1.0, -n); });
}

CertifiedSequence CertifiedSequence::constant(TargetFunction f, ApproximationCertificate cert, Modulus modulus) {
  const std::string name = "constant:" + f.descriptor();
  return CertifiedSequence(
      name, [f = std::move(f), cert = std::move(cert)](int) -> std::optional<Member> { return Member{f, cert}; },
      std::move(modulus), [](int) -> std::optional<double> { return 0.0; });
}

// ---------------------------------------------------------------------------
// Sup norms

double tent_difference_sup(const std::vector<std::pair<int, double>>& a,
                           const std::vector<std::pair<int, double>>& b) {
  // Every finite double is mant * 2^e with an integer mantissa; scale all
  // coefficients to integers over a common power of two.
  std::map<int, std::pair<long long, int>> scaled;  // level -> (mantissa, exponent)
  std::map<int, cpp_rational> diff;
  auto accumulate = [&](const std::vector<std::pair<int, double>>& terms, int sign) {
    for (const auto& [k, c] : terms) {
      if (k < 0 || k > 50) throw ConfigurationError("tent level " + std::to_string(k) + " outside [0, 50]");
      if (!std::isfinite(c)) throw EvaluationError("non-finite tent coefficient", c);
      if (c == 0.0) continue;
      int e = 0;
      const double m = std::frexp(c, &e);
      const auto mant = static_cast<long long>(std::ldexp(m, 53));
      cpp_rational r(mant);
      e -= 53;
      if (e >= 0) {
        r *= cpp_rational(cpp_int(1) << e);
      } else {
        r /= cpp_rational(cpp_int(1) << -e);
      }
      diff[k] += sign * r;
    }
  };
  accumulate(a, 1);
  accumulate(b, -1);
  for (auto it = diff.begin(); it != diff.end();) it = it->second == 0 ? diff.erase(it) : std::next(it);
  if (diff.empty()) return 0.0;

  const int kmin = diff.begin()->first;
  const int kmax = diff.rbegin()->first;
  if (kmax - kmin > kMaxExactLevels) {
    throw ConfigurationError("exact tent comparison spans more than " + std::to_string(kMaxExactLevels) +
                             " levels");
  }
  cpp_int common(1);
  for (const auto& [k, r] : diff) common = boost::multiprecision::lcm(common, denominator(r));
  std::vector<std::pair<int, cpp_int>> coeffs;
  for (const auto& [k, r] : diff) coeffs.emplace_back(k, numerator(r) * (common / denominator(r)));

  // The difference has period 2^-kmin and is linear between multiples of
  // 2^-(kmax+1); at x = j / D, D = 2^(kmax+1), tri(2^k x) = t / D with
  // t = 2u or 2D - 2u, u = (j 2^k) mod D.
  const std::uint64_t d = std::uint64_t{1} << (kmax + 1);
  const std::uint64_t points = std::uint64_t{1} << (kmax + 1 - kmin);
  cpp_int best(0);
  for (std::uint64_t j = 0; j <= points; ++j) {
    cpp_int s(0);
    for (const auto& [k, c] : coeffs) {
      const std::uint64_t u = (j & ((std::uint64_t{1} << (kmax + 1 - k)) - 1)) << k;
      const std::uint64_t t = 2 * u <= d ? 2 * u : 2 * d - 2 * u;
      s += c * t;
    }
    if (s < 0) s = -s;
    if (s > best) best = s;
  }
  const cpp_rational sup = cpp_rational(best) / (cpp_rational(common) * cpp_rational(cpp_int(d)));
  return sup.convert_to<double>();
}

NormMeasurement cauchy_sup(const TargetFunction& fn, const TargetFunction& fm) {
  const bool tent = fn.source() == TargetSource::Series && fm.source() == TargetSource::Series &&
                    fn.piecewise_linear() && fm.piecewise_linear();
  if (tent) return {tent_difference_sup(fn.series_terms(), fm.series_terms()), SupNormMethod::ExactBreakpoints};
  const Interval d = intersect(fn.domain(), fm.domain());
  if (!(d.hi > d.lo)) throw ConfigurationError("sequence members have disjoint domains");
  return norm_of_difference(fn.restricted(d), fm.restricted(d), {NormKind::SupNorm, d},
                            gauss_legendre_rule(1, d));
}

namespace {

Json evidence_json(const EvidenceRecord& e) {
  Json j = {{"kind", "cauchy_evidence"},
            {"schema_version", std::string(kSchemaVersion)},
            {"sequence", e.sequence},
            {"n", e.n},
            {"m", e.m},
            {"targets", Json::array({e.target_n, e.target_m})},
            {"bound", e.bound},
            {"sup_norm", e.sup_norm},
            {"supnorm_method", std::string(sup_norm_method_name(e.method))},
            {"passed", e.passed}};
  if (!e.digest.empty()) j["digest"] = e.digest;
  return j;
}

SupNormMethod parse_sup(const std::string& name, const std::string& path) {
  for (auto m : {SupNormMethod::NotApplicable, SupNormMethod::ExactBreakpoints, SupNormMethod::DenseEstimate}) {
    if (sup_norm_method_name(m) == name) return m;
  }
  throw ParseError(path, "unknown sup-norm method '" + name + "'");
}

}  // namespace

Json to_json(const EvidenceRecord& e) { return evidence_json(e); }

EvidenceRecord evidence_from_json(const Json& j, const std::string& path) {
  EvidenceRecord e;
  if (require_string(j, "kind", path) != "cauchy_evidence") throw ParseError(path + ".kind", "expected 'cauchy_evidence'");
  e.sequence = require_string(j, "sequence", path);
  e.n = require_int(j, "n", path);
  e.m = require_int(j, "m", path);
  const Json& targets = require(j, "targets", path);
  if (!targets.is_array() || targets.size() != 2 || !targets[0].is_string() || !targets[1].is_string()) {
    throw ParseError(path + ".targets", "expected two descriptors");
  }
  e.target_n = targets[0].get<std::string>();
  e.target_m = targets[1].get<std::string>();
  e.bound = require_number(j, "bound", path);
  e.sup_norm = require_number(j, "sup_norm", path);
  e.method = parse_sup(require_string(j, "supnorm_method", path), path + ".supnorm_method");
  const Json& passed = require(j, "passed", path);
  if (!passed.is_boolean()) throw ParseError(path + ".passed", "expected a boolean");
  e.passed = passed.get<bool>();
  e.digest = require_string(j, "digest", path);
  return e;
}

EvidenceRecord verify_cauchy(CertifiedSequence& seq, int n, int m, double bound) {
  if (auto it = seq.evidence_.find({n, m}); it != seq.evidence_.end() && it->second.bound == bound) {
    return it->second;
  }
  const auto& fn = seq.member(n).f;
  const auto& fm = seq.member(m).f;
  EvidenceRecord e;
  e.sequence = seq.name();
  e.n = n;
  e.m = m;
  e.target_n = fn.descriptor();
  e.target_m = fm.descriptor();
  e.bound = bound;
  if (n == m) {
    e.sup_norm = 0.0;
    e.method = SupNormMethod::ExactBreakpoints;
  } else {
    const NormMeasurement s = cauchy_sup(fn, fm);
    e.sup_norm = s.value;
    e.method = s.method;
  }
  e.passed = e.sup_norm < bound;
  e.digest = content_digest(evidence_json(e));
  seq.evidence_[{n, m}] = e;
  return e;
}

// ---------------------------------------------------------------------------
// Transfer

namespace {

Json modulus_json(const ModulusEvaluation& m) {
  Json j = {{"kind", "modulus_evaluation"},
            {"schema_version", std::string(kSchemaVersion)},
            {"spec", m.spec},
            {"argument", m.argument},
            {"index", m.index},
            {"proxy_depth", m.proxy_depth},
            {"proxy_target", m.proxy_target},
            {"proxy_sup", m.proxy_sup},
            {"proxy_tail", m.proxy_tail ? Json(*m.proxy_tail) : Json(nullptr)}};
  if (!m.digest.empty()) j["digest"] = m.digest;
  return j;
}

std::vector<std::string> expected_genealogy(const LimitCertificate& cert) {
  std::vector<std::string> out;
  for (const auto& c : cert.chain) out.push_back(c.digest);
  for (const auto& e : cert.tail_evidence) out.push_back(e.digest);
  out.push_back(cert.modulus.digest);
  return out;
}

}  // namespace

Json to_json(const ModulusEvaluation& m) { return modulus_json(m); }

LimitCertificate transfer(CertifiedSequence& seq, double eps, int ladder, CertificateStore* store) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigurationError("eps must be positive and finite");
  if (ladder < 1) throw ConfigurationError("ladder size must be >= 1");
  const double half = 0.5 * eps;
  const int n = seq.modulus()(half);
  if (n < 1) throw IncompleteSequence("modulus returned index " + std::to_string(n) + " below 1", n);

  LimitCertificate cert;
  cert.sequence = seq.name();
  cert.tolerance = eps;
  cert.index = n;
  cert.ladder = ladder;
  for (int k = 1; k <= n; ++k) cert.chain.push_back(seq.member(k).cert);

  for (int m = n + 1; m <= n + ladder; ++m) {
    EvidenceRecord e = verify_cauchy(seq, n, m, half);
    if (!e.passed) {
      throw EvidenceContradiction("modulus " + seq.modulus().spec + " claims N(" + fmt(half) + ") = " +
                                      std::to_string(n) + ", but sup |f_" + std::to_string(n) + " - f_" +
                                      std::to_string(m) + "| = " + fmt(e.sup_norm) + " is not below " + fmt(half),
                                  n, m);
    }
    cert.tail_evidence.push_back(std::move(e));
  }

  cert.closed_form_tail = seq.closed_form_tail(n);
  cert.tail_bound = half;
  if (cert.closed_form_tail) {
    if (!(*cert.closed_form_tail <= half)) {
      throw EvidenceContradiction("closed-form tail " + fmt(*cert.closed_form_tail) + " at N = " +
                                      std::to_string(n) + " exceeds eps/2 = " + fmt(half),
                                  n, -1);
    }
    cert.tail_bound = *cert.closed_form_tail;
  }

  ModulusEvaluation& mod = cert.modulus;
  mod.spec = seq.modulus().spec;
  mod.argument = half;
  mod.index = n;
  mod.proxy_depth = kProxyDepth;
  const auto& proxy = seq.member(n + kProxyDepth).f;
  mod.proxy_target = proxy.descriptor();
  mod.proxy_sup = cauchy_sup(seq.member(n).f, proxy).value;
  mod.proxy_tail = seq.closed_form_tail(n + kProxyDepth);
  const double proxy_total = mod.proxy_sup + mod.proxy_tail.value_or(0.0);
  if (!(proxy_total <= cert.tail_bound)) {
    throw EvidenceContradiction("proxy f_" + std::to_string(n + kProxyDepth) + " is " + fmt(proxy_total) +
                                    " away from f_" + std::to_string(n) + ", above the tail bound " +
                                    fmt(cert.tail_bound),
                                n, n + kProxyDepth);
  }
  mod.digest = content_digest(modulus_json(mod));

  cert.combined_bound = cert.base().reported_error + cert.tail_bound;
  if (!(cert.combined_bound < eps)) {
    throw ToleranceViolated("combined limit bound " + fmt(cert.combined_bound) + " is not below eps = " + fmt(eps),
                            cert.combined_bound, eps);
  }
  cert.genealogy = expected_genealogy(cert);
  cert.digest = compute_digest(cert);

  if (store) {
    for (const auto& c : cert.chain) store->add(c);
    for (const auto& e : cert.tail_evidence) store->add(evidence_json(e));
    store->add(modulus_json(mod));
    store->add(to_json(cert));
  }
  return cert;
}

LimitCertificate tent_series(double eps, int ladder, CertificateStore* store) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigurationError("tent series needs 0 < eps < 1");
  CertifiedSequence seq = CertifiedSequence::tent_series();
  return transfer(seq, eps, ladder, store);
}

// ---------------------------------------------------------------------------
// Serialization

Json to_json(const LimitCertificate& cert) {
  Json chain = Json::array();
  for (const auto& c : cert.chain) chain.push_back(to_json(c));
  Json evidence = Json::array();
  for (const auto& e : cert.tail_evidence) evidence.push_back(evidence_json(e));
  Json j = {{"kind", "limit"},
            {"schema_version", cert.schema_version},
            {"sequence", cert.sequence},
            {"tolerance", cert.tolerance},
            {"index", cert.index},
            {"ladder", cert.ladder},
            {"base", cert.chain.empty() ? Json(nullptr) : Json(cert.chain.back().digest)},
            {"chain", std::move(chain)},
            {"tail_evidence", std::move(evidence)},
            {"modulus", modulus_json(cert.modulus)},
            {"closed_form_tail", cert.closed_form_tail ? Json(*cert.closed_form_tail) : Json(nullptr)},
            {"tail_bound", cert.tail_bound},
            {"combined_bound", cert.combined_bound},
            {"genealogy", cert.genealogy}};
  if (!cert.digest.empty()) j["digest"] = cert.digest;
  return j;
}

LimitCertificate limit_from_json(const Json& j) {
  const std::string path = "$";
  if (!j.is_object()) throw ParseError(path, "expected an object");
  LimitCertificate cert;
  cert.schema_version = require_string(j, "schema_version", path);
  if (cert.schema_version != kSchemaVersion) {
    throw ParseError("$.schema_version", "unsupported schema version '" + cert.schema_version + "'");
  }
  if (const auto kind = require_string(j, "kind", path); kind != "limit") {
    throw ParseError("$.kind", "expected 'limit', found '" + kind + "'");
  }
  cert.sequence = require_string(j, "sequence", path);
  cert.tolerance = require_number(j, "tolerance", path);
  cert.index = require_int(j, "index", path);
  cert.ladder = require_int(j, "ladder", path);
  const Json& chain = require(j, "chain", path);
  if (!chain.is_array() || chain.empty()) throw ParseError("$.chain", "expected a non-empty array");
  for (std::size_t i = 0; i < chain.size(); ++i) {
    cert.chain.push_back(certificate_from_json(chain[i], "$.chain[" + std::to_string(i) + "]"));
  }
  if (require_string(j, "base", path) != cert.chain.back().digest) {
    throw ParseError("$.base", "base digest does not name the last chain member");
  }
  const Json& evidence = require(j, "tail_evidence", path);
  if (!evidence.is_array()) throw ParseError("$.tail_evidence", "expected an array");
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    cert.tail_evidence.push_back(evidence_from_json(evidence[i], "$.tail_evidence[" + std::to_string(i) + "]"));
  }
  const std::string mp = "$.modulus";
  const Json& mod = require(j, "modulus", path);
  if (require_string(mod, "kind", mp) != "modulus_evaluation") throw ParseError(mp + ".kind", "expected 'modulus_evaluation'");
  cert.modulus.spec = require_string(mod, "spec", mp);
  cert.modulus.argument = require_number(mod, "argument", mp);
  cert.modulus.index = require_int(mod, "index", mp);
  cert.modulus.proxy_depth = require_int(mod, "proxy_depth", mp);
  cert.modulus.proxy_target = require_string(mod, "proxy_target", mp);
  cert.modulus.proxy_sup = require_number(mod, "proxy_sup", mp);
  if (const Json& t = require(mod, "proxy_tail", mp); !t.is_null()) cert.modulus.proxy_tail = require_number(mod, "proxy_tail", mp);
  cert.modulus.digest = require_string(mod, "digest", mp);
  if (const Json& t = require(j, "closed_form_tail", path); !t.is_null()) {
    cert.closed_form_tail = require_number(j, "closed_form_tail", path);
  }
  cert.tail_bound = require_number(j, "tail_bound", path);
  cert.combined_bound = require_number(j, "combined_bound", path);
  const Json& genealogy = require(j, "genealogy", path);
  if (!genealogy.is_array()) throw ParseError("$.genealogy", "expected an array");
  for (const auto& g : genealogy) {
    if (!g.is_string()) throw ParseError("$.genealogy", "expected digest strings");
    cert.genealogy.push_back(g.get<std::string>());
  }
  cert.digest = require_string(j, "digest", path);
  return cert;
}

std::string serialize(const LimitCertificate& cert) { return canonical_dump(to_json(cert)); }

std::string compute_digest(const LimitCertificate& cert) { return content_digest(to_json(cert)); }

// ---------------------------------------------------------------------------
// Verification

LimitVerification verify_limit(const LimitCertificate& cert) {
  LimitVerification report;
  report.digest = compute_digest(cert);
  auto& notes = report.notes;
  bool structural = true;
  auto fail = [&](bool& flag, std::string note) {
    flag = false;
    notes.push_back(std::move(note));
  };

  if (cert.digest != report.digest) fail(structural, "digest mismatch: recorded " + cert.digest + ", recomputed " + report.digest);
  const double half = 0.5 * cert.tolerance;
  if (static_cast<int>(cert.chain.size()) != cert.index) fail(structural, "chain does not hold C_1 .. C_N");
  if (static_cast<int>(cert.tail_evidence.size()) != cert.ladder) fail(structural, "ladder size differs from evidence count");
  for (std::size_t i = 0; i < cert.tail_evidence.size(); ++i) {
    const auto& e = cert.tail_evidence[i];
    if (e.n != cert.index || e.m != cert.index + 1 + static_cast<int>(i) || e.bound != half) {
      fail(structural, "evidence " + std::to_string(i) + " is not the ladder pair (N, N+" + std::to_string(i + 1) + ")");
    }
    if (content_digest(evidence_json(e)) != e.digest) fail(structural, "evidence " + std::to_string(i) + " digest mismatch");
  }
  if (content_digest(modulus_json(cert.modulus)) != cert.modulus.digest) fail(structural, "modulus record digest mismatch");
  const auto genealogy = expected_genealogy(cert);
  if (cert.genealogy != genealogy ||
      cert.genealogy.size() != static_cast<std::size_t>(cert.index + cert.ladder + 1)) {
    fail(structural, "genealogy is not C_1..C_N, ladder evidence, modulus evaluation");
  }
  try {
    const int n = Modulus::from_spec(cert.modulus.spec)(half);
    if (n != cert.index || cert.modulus.index != n || cert.modulus.argument != half) {
      fail(structural, "modulus " + cert.modulus.spec + " gives N = " + std::to_string(n) + ", certificate says " +
                           std::to_string(cert.index));
    }
  } catch (const Error& e) {
    fail(structural, std::string("modulus not re-evaluable: ") + e.what());
  }
  report.structural_ok = structural;

  report.chain_ok = true;
  CertificateStore store;
  for (const auto& c : cert.chain) store.add(c);
  for (std::size_t i = 0; i < cert.chain.size(); ++i) {
    const auto& c = cert.chain[i];
    try {
      const TargetFunction f = parse_target_spec(c.target_descriptor);
      const auto v = verify(c, f, &store);
      if (!v.verdict()) fail(report.chain_ok, "C_" + std::to_string(i + 1) + " fails verification");
    } catch (const Error& e) {
      fail(report.chain_ok, "C_" + std::to_string(i + 1) + " not re-verifiable: " + e.what());
    }
  }

  report.evidence_ok = true;
  for (const auto& e : cert.tail_evidence) {
    try {
      const auto s = cauchy_sup(parse_target_spec(e.target_n), parse_target_spec(e.target_m));
      if (!(s.value < e.bound) || !e.passed ||
          s.value > e.sup_norm * (1.0 + kBoundRelativeSlack) + kBoundAbsoluteSlack) {
        fail(report.evidence_ok, "pair (" + std::to_string(e.n) + ", " + std::to_string(e.m) + "): sup " +
                                     fmt(s.value) + " against bound " + fmt(e.bound));
      }
    } catch (const Error& ex) {
      fail(report.evidence_ok, "pair (" + std::to_string(e.n) + ", " + std::to_string(e.m) +
                                   ") not re-verifiable: " + ex.what());
    }
  }
  double proxy_sup = cert.modulus.proxy_sup;
  if (!cert.chain.empty()) {
    try {
      proxy_sup = cauchy_sup(parse_target_spec(cert.base().target_descriptor),
                             parse_target_spec(cert.modulus.proxy_target))
                      .value;
      if (proxy_sup > cert.modulus.proxy_sup * (1.0 + kBoundRelativeSlack) + kBoundAbsoluteSlack) {
        fail(report.evidence_ok, "proxy distance " + fmt(proxy_sup) + " exceeds recorded " + fmt(cert.modulus.proxy_sup));
      }
    } catch (const Error& ex) {
      fail(report.evidence_ok, std::string("proxy not re-verifiable: ") + ex.what());
    }
  }

  report.bound_ok = true;
  if (!(cert.tail_bound <= half)) fail(report.bound_ok, "tail bound exceeds eps/2");
  if (cert.closed_form_tail && !(*cert.closed_form_tail <= cert.tail_bound)) {
    fail(report.bound_ok, "closed-form tail exceeds the tail bound");
  }
  if (!(proxy_sup + cert.modulus.proxy_tail.value_or(0.0) <= cert.tail_bound)) {
    fail(report.bound_ok, "proxy distance plus proxy tail exceeds the tail bound");
  }
  if (!cert.chain.empty() && cert.combined_bound != cert.base().reported_error + cert.tail_bound) {
    fail(report.bound_ok, "combined bound is not base error + tail bound");
  }
  if (!(cert.combined_bound < cert.tolerance)) fail(report.bound_ok, "combined bound is not below eps");
  return report;
}

}  // namespace certapprox
