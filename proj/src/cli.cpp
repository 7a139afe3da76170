#include "certapprox/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "certapprox/approximate.hpp"
#include "certapprox/errors.hpp"
#include "certapprox/glue.hpp"
#include "certapprox/limit.hpp"

namespace certapprox::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

Interval parse_domain(const std::string& text) {
  const auto comma = text.find(',');
  Interval iv;
  auto parse = [&](std::string_view part, double& out) {
    const auto* end = part.data() + part.size();
    const auto [ptr, ec] = std::from_chars(part.data(), end, out);
    return ec == std::errc() && ptr == end;
  };
  if (comma == std::string::npos || !parse(std::string_view(text).substr(0, comma), iv.lo) ||
      !parse(std::string_view(text).substr(comma + 1), iv.hi) || !(iv.lo < iv.hi)) {
    throw UsageError("--domain expects 'lo,hi' with lo < hi, got '" + text + "'");
  }
  return iv;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw UsageError("cannot write '" + path + "'");
  }
}

TargetFunction load_target(const std::string& spec, const std::string& domain) {
  if (domain.empty()) return parse_target_spec(spec);
  const Interval iv = parse_domain(domain);
  return parse_target_spec(spec, &iv);
}

// ---------------------------------------------------------------------------
// approximate

struct ApproximateOptions {
  std::string target;
  std::string domain;
  std::string basis;
  std::string norm;
  std::string method;
  std::string out;
  double eps = 0.0;
  int knots = 10;
  int terms = 0;
  int degree = -1;
  int points = 16;
  int max_terms = 4096;
};

std::string default_method(BasisKind kind) {
  switch (kind) {
    case BasisKind::FourierSine: return "orthonormal";
    case BasisKind::Chebyshev: return "chebyshev";
    default: return "gram";
  }
}

NormKind default_norm(BasisKind kind) {
  switch (kind) {
    case BasisKind::Chebyshev: return NormKind::SupNorm;
    case BasisKind::CubicBSpline: return NormKind::W12;
    default: return NormKind::L2;
  }
}

std::string canonical_method(const std::string& m) {
  if (m == "gram" || m == "gram_solve") return "gram";
  if (m == "orthonormal" || m == "orthonormal_probe") return "orthonormal";
  if (m == "raw_probe" || m == "greedy" || m == "chebyshev") return m;
  throw UsageError("unknown --method '" + m + "' (gram, raw_probe, orthonormal, greedy, chebyshev)");
}

BasisFamily make_family(BasisKind kind, const TargetFunction& f, int knots) {
  switch (kind) {
    case BasisKind::Chebyshev: return BasisFamily::chebyshev();
    case BasisKind::FourierSine: return BasisFamily::fourier_sine();
    case BasisKind::Monomial: return BasisFamily::monomial(f.domain());
    case BasisKind::TentHierarchy: return BasisFamily::tent();
    case BasisKind::CubicBSpline: return BasisFamily::cubic_bspline(f.domain(), knots);
  }
  throw UsageError("unknown basis");
}

std::vector<int> element_indices(const BasisFamily& family, const ApproximateOptions& o) {
  switch (family.kind()) {
    case BasisKind::CubicBSpline: return family.indices();
    case BasisKind::FourierSine: return family.indices(o.terms > 0 ? o.terms : 64);
    case BasisKind::TentHierarchy: return family.indices(o.terms > 0 ? o.terms : 8);
    case BasisKind::Monomial:
    case BasisKind::Chebyshev: {
      const int degree = o.degree >= 0 ? o.degree : (o.terms > 0 ? o.terms - 1 : 5);
      return family.indices(degree + 1);
    }
  }
  return {};
}

ApproximationCertificate build_chebyshev(const TargetFunction& f, const ApproximateOptions& o) {
  if (o.degree >= 0) return approximate_chebyshev(f, o.degree, o.eps);
  double best = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= 64; ++n) {
    try {
      return approximate_chebyshev(f, n, o.eps);
    } catch (const ToleranceViolated& e) {
      best = std::min(best, e.achieved());
    }
  }
  throw ToleranceViolated("no Chebyshev degree up to 64 meets the tolerance", best, o.eps);
}

int cmd_approximate(const ApproximateOptions& o, std::ostream& out) {
  const TargetFunction f = load_target(o.target, o.domain);
  BasisKind kind;
  try {
    kind = parse_basis_kind(o.basis);
  } catch (const Error&) {
    throw UsageError("unknown --basis '" + o.basis + "'");
  }
  const std::string method = canonical_method(o.method.empty() ? default_method(kind) : o.method);
  NormKind norm_kind = default_norm(kind);
  if (!o.norm.empty()) {
    try {
      norm_kind = parse_norm_kind(o.norm);
    } catch (const Error&) {
      throw UsageError("unknown --norm '" + o.norm + "' (l2, w12, sup)");
    }
  }
  const BasisFamily family = make_family(kind, f, o.knots);
  ExtractionSettings settings;
  settings.tolerance = o.eps;
  settings.max_terms = o.max_terms;
  settings.points = o.points;

  ApproximationCertificate cert;
  if (method == "chebyshev") {
    if (kind != BasisKind::Chebyshev || norm_kind != NormKind::SupNorm) {
      throw UsageError("--method chebyshev needs --basis chebyshev and --norm sup");
    }
    cert = build_chebyshev(f, o);
  } else if (method == "orthonormal") {
    if (norm_kind != NormKind::L2) throw UsageError("--method orthonormal needs --norm l2");
    cert = approximate_orthonormal(f, family, settings);
  } else {
    const NormTag norm{norm_kind, family.domain()};
    const auto elements = elements_of(family, element_indices(family, o));
    if (method == "gram") {
      cert = approximate_gram(f, elements, norm, settings);
    } else if (method == "raw_probe") {
      cert = approximate_raw_probe(f, elements, norm, settings);
    } else {
      cert = approximate_greedy(f, elements, norm, settings);
    }
  }
  write_file(o.out, serialize(cert));
  out << "method: " << method_name(cert.construction.method) << "\n"
      << "terms: " << cert.terms.size() << "\n"
      << "reported_error: " << g6(cert.reported_error) << "\n"
      << "tolerance: " << g6(cert.tolerance) << "\n"
      << "digest: " << cert.digest << "\n"
      << "wrote: " << o.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// verify

int verification_failure(std::ostream& out, std::ostream& err, const std::string& why) {
  out << "bound_honored: false\n";
  err << "verification failed: " << why << "\n";
  return kVerificationFailed;
}

void print_notes(std::ostream& out, const std::vector<std::string>& notes) {
  for (const auto& n : notes) out << "note: " << n << "\n";
}

int cmd_verify(const std::string& path, const std::string& target, const std::string& domain,
               std::ostream& out, std::ostream& err) {
  const std::string bytes = read_file(path);
  Json j;
  std::string kind;
  try {
    j = parse_certificate_text(bytes);
    kind = require_string(j, "kind", "$");
  } catch (const ParseError& e) {
    return verification_failure(out, err, e.what());
  }

  if (kind == "limit") {
    LimitCertificate cert;
    try {
      cert = limit_from_json(j);
    } catch (const ParseError& e) {
      return verification_failure(out, err, e.what());
    }
    const auto report = verify_limit(cert);
    out << "kind: limit\n"
        << "index: " << cert.index << "\n"
        << "combined_bound: " << g6(cert.combined_bound) << "\n"
        << "structural_ok: " << yes_no(report.structural_ok) << "\n"
        << "chain_ok: " << yes_no(report.chain_ok) << "\n"
        << "evidence_ok: " << yes_no(report.evidence_ok) << "\n"
        << "bound_honored: " << yes_no(report.bound_ok) << "\n"
        << "digest: " << report.digest << "\n";
    print_notes(out, report.notes);
    return report.verdict() ? kSuccess : kVerificationFailed;
  }

  if (target.empty()) throw UsageError("--target is required to verify a " + kind + " certificate");
  const TargetFunction f = load_target(target, domain);

  if (kind == "glued") {
    GluedCertificate cert;
    try {
      cert = glued_from_json(j);
    } catch (const ParseError& e) {
      return verification_failure(out, err, e.what());
    }
    const auto report = verify_glued(cert, f);
    out << "kind: glued\n"
        << "patches: " << cert.cover.size() << "\n"
        << "recomputed_error: " << g6(report.recomputed_error) << "\n"
        << "reported_error: " << g6(cert.reported_error) << "\n"
        << "structural_ok: " << yes_no(report.structural_ok) << "\n"
        << "locals_ok: " << yes_no(report.locals_ok) << "\n"
        << "overlaps_ok: " << yes_no(report.overlaps_ok) << "\n"
        << "bound_honored: " << yes_no(report.bound_honored) << "\n"
        << "digest: " << report.digest << "\n";
    print_notes(out, report.notes);
    return report.verdict() ? kSuccess : kVerificationFailed;
  }

  if (kind != "approximation") return verification_failure(out, err, "unknown certificate kind '" + kind + "'");
  ApproximationCertificate cert;
  try {
    cert = certificate_from_json(j);
  } catch (const ParseError& e) {
    return verification_failure(out, err, e.what());
  }
  const auto report = verify(cert, f);
  out << "kind: approximation\n"
      << "recomputed_error: " << g6(report.recomputed_error) << "\n"
      << "reported_error: " << g6(cert.reported_error) << "\n"
      << "supnorm_method: " << sup_norm_method_name(report.recomputed_method) << "\n"
      << "structural_ok: " << yes_no(report.structural_ok) << "\n"
      << "bound_honored: " << yes_no(report.bound_honored) << "\n"
      << "digest: " << report.digest << "\n";
  print_notes(out, report.notes);
  return report.verdict() ? kSuccess : kVerificationFailed;
}

// ---------------------------------------------------------------------------
// glue and limit

struct GlueOptions {
  std::string target;
  std::string domain;
  std::string out;
  GlueSettings settings;
};

int cmd_glue(const GlueOptions& o, std::ostream& out) {
  const TargetFunction f = load_target(o.target, o.domain);
  const GluedCertificate cert = glue_pipeline(f, o.settings);
  write_file(o.out, serialize(cert));
  std::size_t adjusted = 0;
  for (const auto& r : cert.reconciliation) adjusted += r.identity ? 0 : 1;
  out << "patches: " << cert.cover.size() << "\n"
      << "reconciled_pairs: " << adjusted << "\n"
      << "reported_error: " << g6(cert.reported_error) << "\n"
      << "bound_estimate: " << g6(cert.bound_estimate) << "\n"
      << "c_pu: " << g6(cert.c_pu) << "\n"
      << "tolerance: " << g6(cert.tolerance) << "\n"
      << "digest: " << cert.digest << "\n"
      << "wrote: " << o.out << "\n";
  return kSuccess;
}

int cmd_limit(bool tent, double eps, int ladder, const std::string& modulus, const std::string& path,
              std::ostream& out, std::ostream& err) {
  if (!tent) throw UsageError("limit currently supports the tent series only (--tent)");
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("--eps must lie in (0, 1) for the tent series");
  std::optional<Modulus> mod;
  try {
    mod = modulus.empty() ? Modulus::tent_closed_form() : Modulus::from_spec(modulus);
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  }
  CertifiedSequence seq = CertifiedSequence::tent_series(*mod);
  LimitCertificate cert;
  try {
    cert = transfer(seq, eps, ladder);
  } catch (const EvidenceContradiction& e) {
    err << "evidence contradiction: " << e.what() << "\n";
    return kVerificationFailed;
  }
  write_file(path, serialize(cert));
  out << "index: " << cert.index << "\n"
      << "modulus: " << cert.modulus.spec << "\n"
      << "ladder: " << cert.ladder << "\n"
      << "tail_bound: " << g6(cert.tail_bound) << "\n"
      << "combined_bound: " << g6(cert.combined_bound) << "\n"
      << "tolerance: " << g6(cert.tolerance) << "\n"
      << "digest: " << cert.digest << "\n"
      << "wrote: " << path << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// inspect

std::string describe(const Json& j) {
  const std::string kind = j.value("kind", "record");
  if (kind == "approximation") return "approximation, " + j.value("target", "");
  if (kind == "cauchy_evidence") {
    return "cauchy_evidence, pair (" + std::to_string(j.value("n", 0)) + ", " + std::to_string(j.value("m", 0)) + ")";
  }
  return kind;
}

void print_tree(std::ostream& out, std::ostream& err, const std::map<std::string, Json>& records,
                const std::string& digest, int depth, std::set<std::string>& path) {
  const std::string indent(static_cast<std::size_t>(2 * depth), ' ');
  auto it = records.find(digest);
  if (it == records.end()) {
    out << indent << digest << " (unresolved)\n";
    err << "warning: unresolved genealogy digest " << digest << "\n";
    return;
  }
  out << indent << digest << " (" << describe(it->second) << ")\n";
  if (!path.insert(digest).second) {
    out << indent << "  (cycle)\n";
    return;
  }
  if (auto g = it->second.find("genealogy"); g != it->second.end() && g->is_array()) {
    for (const auto& parent : *g) {
      if (parent.is_string()) print_tree(out, err, records, parent.get<std::string>(), depth + 1, path);
    }
  }
  path.erase(digest);
}

void inspect_approximation(const ApproximationCertificate& cert, std::ostream& out) {
  out << "target: " << cert.target_descriptor << "\n"
      << "basis: " << cert.basis.name() << " on " << to_string(cert.basis.domain());
  if (cert.basis.count()) out << " (" << *cert.basis.count() << " functions)";
  out << "\n"
      << "norm: " << norm_kind_name(cert.norm.kind) << " on " << to_string(cert.norm.domain) << "\n"
      << "tolerance: " << g6(cert.tolerance) << "\n"
      << "reported_error: " << g6(cert.reported_error) << "\n"
      << "supnorm_method: " << sup_norm_method_name(cert.supnorm_method) << "\n"
      << "method: " << method_name(cert.construction.method) << "\n"
      << "rule: " << quadrature_kind_name(cert.construction.rule.kind) << ", " << cert.construction.rule.points
      << " points, " << (cert.construction.rule.breakpoints.size() > 0 ? cert.construction.rule.breakpoints.size() - 1 : 0)
      << " panels\n"
      << "stopping: " << cert.construction.stopping << "\n"
      << "terms: " << cert.terms.size() << "\n"
      << "  index  coefficient\n";
  for (const auto& t : cert.terms) {
    char row[96];
    std::snprintf(row, sizeof row, "  %5d  %s", t.index, g6(t.coefficient).c_str());
    out << row;
    for (const auto& [k, v] : t.exact) out << "  " << k << "=" << v;
    out << "\n";
  }
}

int cmd_inspect(const std::string& path, std::ostream& out, std::ostream& err) {
  const std::string bytes = read_file(path);
  const Json j = parse_certificate_text(bytes);
  const std::string kind = require_string(j, "kind", "$");
  std::map<std::string, Json> records;
  auto add = [&](const Json& r) {
    if (auto d = r.find("digest"); d != r.end() && d->is_string()) records[d->get<std::string>()] = r;
  };
  add(j);
  std::string digest;

  if (kind == "approximation") {
    const auto cert = certificate_from_json(j);
    out << "kind: approximation\n";
    inspect_approximation(cert, out);
    digest = cert.digest;
  } else if (kind == "glued") {
    const auto cert = glued_from_json(j);
    digest = cert.digest;
    out << "kind: glued\n"
        << "target: " << cert.target_descriptor << "\n"
        << "domain: " << to_string(cert.cover.domain) << "\n"
        << "tolerance: " << g6(cert.tolerance) << "\n"
        << "delta: " << g6(cert.delta) << "\n"
        << "reported_error: " << g6(cert.reported_error) << "\n"
        << "bound_estimate: " << g6(cert.bound_estimate) << " (c_pu " << g6(cert.c_pu) << ")\n"
        << "locals: " << cert.locals.size() << "\n";
    for (const auto& l : cert.locals) {
      add(to_json(l.inner));
      out << "  patch " << l.patch_index << " " << to_string(l.patch) << ": " << l.inner.terms.size()
          << " terms, error " << g6(l.inner.reported_error) << ", digest " << l.inner.digest << "\n";
    }
    out << "reconciliation: " << cert.reconciliation.size() << "\n";
    for (const auto& r : cert.reconciliation) {
      if (!r.identity) add(to_json(r.parent));
      double largest = 0.0;
      for (const auto& a : r.adjustments) largest = std::max(largest, std::fabs(a.second));
      out << "  pair (" << r.left << ", " << r.right << "): pre " << g6(r.pre_mismatch) << ", post "
          << g6(r.post_mismatch) << (r.identity ? ", identity" : ", mu " + g6(r.penalty)) << ", max |delta c| "
          << g6(largest) << "\n";
    }
  } else if (kind == "limit") {
    const auto cert = limit_from_json(j);
    digest = cert.digest;
    out << "kind: limit\n"
        << "sequence: " << cert.sequence << "\n"
        << "tolerance: " << g6(cert.tolerance) << "\n"
        << "index: " << cert.index << "\n"
        << "modulus: " << cert.modulus.spec << "\n"
        << "tail_bound: " << g6(cert.tail_bound) << "\n"
        << "combined_bound: " << g6(cert.combined_bound) << "\n"
        << "proxy: " << cert.modulus.proxy_target << ", distance " << g6(cert.modulus.proxy_sup) << "\n"
        << "ladder: " << cert.tail_evidence.size() << "\n";
    for (const auto& c : cert.chain) add(to_json(c));
    for (const auto& e : cert.tail_evidence) {
      add(to_json(e));
      out << "  (" << e.n << ", " << e.m << "): sup " << g6(e.sup_norm) << " < " << g6(e.bound) << " "
          << (e.passed ? "passed" : "failed") << "\n";
    }
    add(to_json(cert.modulus));
  } else {
    throw ParseError("$.kind", "unknown certificate kind '" + kind + "'");
  }
  out << "digest: " << digest << "\n"
      << "genealogy:\n";
  std::set<std::string> visiting;
  print_tree(out, err, records, digest, 1, visiting);
  return kSuccess;
}

void add_subcommand_help(CLI::App& app) {
  app.footer(std::string("Target specs: builtin:<exp|sinpi|linear|runge|tent_series(n)>, expr:<text>, "
                         "data:<file>\n\nExpression grammar:\n") +
             std::string(kExpressionGrammar) +
             "\n\nExit codes: 0 success, 1 computation error, 2 tolerance violated, "
             "3 verification failed, 4 usage or parse error.");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified finite-rank function approximation"};
  app.require_subcommand(1);
  add_subcommand_help(app);

  ApproximateOptions ao;
  auto* approx = app.add_subcommand("approximate", "Build an approximation certificate");
  approx->add_option("--target", ao.target, "Target spec")->required();
  approx->add_option("--domain", ao.domain, "Domain override 'lo,hi'");
  approx->add_option("--basis", ao.basis, "chebyshev | fourier_sine | monomial | cubic_bspline | tent")->required();
  approx->add_option("--knots", ao.knots, "Number of cubic B-spline functions")->capture_default_str();
  approx->add_option("--terms", ao.terms, "Number of elements (fourier_sine and tent dictionaries)");
  approx->add_option("--degree", ao.degree, "Polynomial degree (chebyshev, monomial)");
  approx->add_option("--norm", ao.norm, "l2 | w12 | sup");
  approx->add_option("--eps", ao.eps, "Tolerance")->required();
  approx->add_option("--method", ao.method, "gram | raw_probe | orthonormal | greedy | chebyshev");
  approx->add_option("--points", ao.points, "Gauss-Legendre points per panel")->capture_default_str();
  approx->add_option("--max-terms", ao.max_terms, "Term cap")->capture_default_str();
  approx->add_option("--out", ao.out, "Output certificate path")->required();

  std::string cert_path;
  std::string vtarget;
  std::string vdomain;
  auto* ver = app.add_subcommand("verify", "Re-check a certificate from its contents");
  ver->add_option("--cert", cert_path, "Certificate file")->required();
  ver->add_option("--target", vtarget, "Target spec (approximation and glued certificates)");
  ver->add_option("--domain", vdomain, "Domain override 'lo,hi'");

  GlueOptions go;
  auto* gl = app.add_subcommand("glue", "Local extraction, reconciliation and partition-of-unity gluing");
  gl->add_option("--target", go.target, "Target spec")->required();
  gl->add_option("--domain", go.domain, "Domain override 'lo,hi'");
  gl->add_option("--patches", go.settings.patches, "Patch count M")->capture_default_str();
  gl->add_option("--overlap", go.settings.overlap_fraction, "Overlap fraction")->capture_default_str();
  gl->add_option("--eps", go.settings.tolerance, "Global W12 tolerance")->required();
  gl->add_option("--min-local", go.settings.min_local_count, "Smallest local B-spline count")->capture_default_str();
  gl->add_option("--max-local", go.settings.max_local_count, "Largest local B-spline count")->capture_default_str();
  gl->add_option("--out", go.out, "Output certificate path")->required();

  bool tent = false;
  double leps = 0.0;
  int ladder = kDefaultLadder;
  std::string modulus;
  std::string lout;
  auto* lim = app.add_subcommand("limit", "Certificate transfer to a uniform limit");
  lim->add_flag("--tent", tent, "Use the tent series f_n = sum 2^-k phi_{2^k}");
  lim->add_option("--eps", leps, "Tolerance")->required();
  lim->add_option("--ladder", ladder, "Cauchy ladder size K")->capture_default_str();
  lim->add_option("--modulus", modulus, "Modulus spec: 'ceil(log2(2/eps))' or 'constant:<N>'");
  lim->add_option("--out", lout, "Output certificate path")->required();

  std::string ipath;
  auto* ins = app.add_subcommand("inspect", "Print a certificate and its genealogy");
  ins->add_option("cert,--cert", ipath, "Certificate file")->required();

  for (auto* sub : {approx, ver, gl, lim, ins}) add_subcommand_help(*sub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*approx) return cmd_approximate(ao, out);
    if (*ver) return cmd_verify(cert_path, vtarget, vdomain, out, err);
    if (*gl) return cmd_glue(go, out);
    if (*lim) return cmd_limit(tent, leps, ladder, modulus, lout, out, err);
    if (*ins) return cmd_inspect(ipath, out, err);
  } catch (const ToleranceViolated& e) {
    err << "tolerance violated: " << e.what() << "\n";
    return kToleranceViolated;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsageError;
  } catch (const SyntaxError& e) {
    err << "syntax error: " << e.what() << "\n";
    return kUsageError;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ConfigurationError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kComputationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kComputationError;
  }
  return kUsageError;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace certapprox::cli
