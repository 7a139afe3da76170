#include "certapprox/glue.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "certapprox/errors.hpp"

namespace certapprox {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

constexpr int kPoints = 16;

}  // namespace

// ---------------------------------------------------------------------------
// Cover

Cover Cover::from_patches(Interval domain, std::vector<Interval> patches) {
  if (!(domain.lo < domain.hi)) throw ConfigurationError("cover domain must have positive length");
  if (patches.empty()) throw ConfigurationError("cover needs at least one patch");
  for (const auto& p : patches) {
    if (!(p.lo < p.hi)) throw ConfigurationError("patch " + to_string(p) + " is empty");
    if (p.lo < domain.lo || p.hi > domain.hi) {
      throw ConfigurationError("patch " + to_string(p) + " leaves the domain " + to_string(domain));
    }
  }
  if (patches.front().lo != domain.lo || patches.back().hi != domain.hi) {
    throw TopologyError("patches do not reach both ends of " + to_string(domain));
  }
  Cover cover{domain, std::move(patches), {}};
  const auto& ps = cover.patches;
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    if (!(ps[i].lo < ps[i + 1].lo && ps[i].hi < ps[i + 1].hi)) {
      throw TopologyError("patches must be ordered left to right without nesting");
    }
    if (!(ps[i].hi > ps[i + 1].lo)) {
      throw TopologyError("consecutive patches " + to_string(ps[i]) + " and " + to_string(ps[i + 1]) +
                          " do not overlap");
    }
    if (i + 2 < ps.size() && ps[i + 2].lo < ps[i].hi) {
      throw TopologyError("non-consecutive patches " + to_string(ps[i]) + " and " + to_string(ps[i + 2]) +
                          " intersect");
    }
    cover.overlap_pairs.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  }
  return cover;
}

Interval Cover::overlap(int i) const {
  if (i < 0 || static_cast<std::size_t>(i) + 1 >= patches.size()) {
    throw TopologyError("no overlap pair (" + std::to_string(i) + ", " + std::to_string(i + 1) + ")");
  }
  return intersect(patches[static_cast<std::size_t>(i)], patches[static_cast<std::size_t>(i) + 1]);
}

Cover make_cover(Interval domain, int m, double overlap_fraction) {
  if (m < 1) throw ConfigurationError("patch count must be >= 1");
  if (!(overlap_fraction > 0.0 && overlap_fraction <= 0.5)) {
    throw ConfigurationError("overlap fraction must lie in (0, 0.5]");
  }
  if (!(domain.lo < domain.hi)) throw ConfigurationError("cover domain must have positive length");
  const double h = domain.length() / m;
  const double half = 0.5 * h * overlap_fraction;
  std::vector<Interval> patches;
  for (int i = 0; i < m; ++i) {
    const double lo = i == 0 ? domain.lo : std::max(domain.lo, domain.lo + i * h - half);
    const double hi = i == m - 1 ? domain.hi : std::min(domain.hi, domain.lo + (i + 1) * h + half);
    patches.push_back({lo, hi});
  }
  return Cover::from_patches(domain, std::move(patches));
}

// ---------------------------------------------------------------------------
// Local extraction and overlaps

std::vector<BasisElement> local_elements(const BasisFamily& basis, Interval patch) {
  if (!basis.count()) throw ConfigurationError("local extraction needs a finite basis family");
  std::vector<BasisElement> out;
  for (int j : basis.indices()) {
    const Interval s = intersect(basis.support(j), patch);
    if (s.hi > s.lo) out.emplace_back(basis, j);
  }
  if (out.empty()) throw ConfigurationError("no basis element lives on patch " + to_string(patch));
  return out;
}

LocalCertificate extract_local(const TargetFunction& f, int patch_index, Interval patch,
                               const BasisFamily& basis, const ExtractionSettings& settings) {
  const TargetFunction local = f.restricted(patch);
  auto cert = approximate_gram(local, local_elements(basis, patch), {NormKind::W12, patch}, settings);
  return {patch_index, patch, std::move(cert), settings.tolerance};
}

double overlap_mismatch(const RealFunction& fa, const RealFunction& fb, Interval overlap) {
  if (!(overlap.hi > overlap.lo)) throw TopologyError("empty overlap " + to_string(overlap));
  const int osc = std::max({1, fa.oscillation_hint(), fb.oscillation_hint()});
  const auto rule = oracle_rule(construction_rule(overlap, merged_kinks(fa, fb), osc, kPoints));
  return norm_of_difference(fa, fb, {NormKind::W12, overlap}, rule).value;
}

double check_overlap(const LocalCertificate& a, const LocalCertificate& b) {
  const Interval ov = intersect(a.patch, b.patch);
  if (!(ov.hi > ov.lo)) {
    throw TopologyError("patches " + to_string(a.patch) + " and " + to_string(b.patch) + " are disjoint");
  }
  return overlap_mismatch(Approximant::of(a.inner), Approximant::of(b.inner), ov);
}

// ---------------------------------------------------------------------------
// Reconciliation

const std::vector<double>& reconciliation_penalties() {
  static const std::vector<double> ladder = {1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10};
  return ladder;
}

Reconciliation reconcile(const LocalCertificate& a, const LocalCertificate& b, double delta,
                         const TargetFunction& f) {
  if (!(delta > 0.0)) throw ConfigurationError("reconciliation threshold must be positive");
  const Interval ov = intersect(a.patch, b.patch);
  const double pre = check_overlap(a, b);
  ReconciliationRecord record;
  record.left = a.patch_index;
  record.right = b.patch_index;
  record.pre_mismatch = pre;
  record.post_mismatch = pre;
  for (const auto& t : b.inner.terms) record.adjustments.emplace_back(t.index, 0.0);
  if (pre < delta) return {b, std::move(record)};

  const BasisFamily& basis = b.inner.basis;
  std::vector<BasisElement> elements;
  Eigen::VectorXd original(static_cast<Eigen::Index>(b.inner.terms.size()));
  for (std::size_t i = 0; i < b.inner.terms.size(); ++i) {
    elements.emplace_back(basis, b.inner.terms[i].index);
    original(static_cast<Eigen::Index>(i)) = b.inner.terms[i].coefficient;
  }
  const Approximant fa = Approximant::of(a.inner);
  const TargetFunction local = f.restricted(b.patch);
  const NormTag patch_norm{NormKind::W12, b.patch};
  const NormTag overlap_norm{NormKind::W12, ov};
  const auto patch_rule = probe_rule(local, elements, b.patch, kPoints);
  const auto overlap_rule = oracle_rule(probe_rule(fa, elements, ov, kPoints));

  const auto n = static_cast<Eigen::Index>(elements.size());
  Eigen::MatrixXd gp = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd go = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rp(n);
  Eigen::VectorXd ro(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& bi = elements[static_cast<std::size_t>(i)];
    rp(i) = inner_product(local, bi, patch_norm, patch_rule);
    ro(i) = inner_product(fa, bi, overlap_norm, overlap_rule);
    for (Eigen::Index k = i; k < n; ++k) {
      const auto& bk = elements[static_cast<std::size_t>(k)];
      gp(i, k) = gp(k, i) = inner_product(bi, bk, patch_norm, patch_rule);
      go(i, k) = go(k, i) = inner_product(bi, bk, overlap_norm, overlap_rule);
    }
  }

  auto approximant_of = [&](const Eigen::VectorXd& c) {
    std::vector<std::pair<int, double>> pairs;
    for (Eigen::Index i = 0; i < n; ++i) pairs.emplace_back(elements[static_cast<std::size_t>(i)].index(), c(i));
    return Approximant(basis, std::move(pairs), b.patch);
  };

  std::string closest = "no penalty produced a positive-definite system";
  for (double mu : reconciliation_penalties()) {
    const Eigen::LLT<Eigen::MatrixXd> llt(gp + mu * go);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::VectorXd c = llt.solve(rp + mu * ro);
    const Approximant fb = approximant_of(c);
    const double post = overlap_mismatch(fa, fb, ov);
    const double local_error = norm_of_difference(local, fb, patch_norm, patch_rule).value;
    const double max_delta = (c - original).cwiseAbs().maxCoeff();
    closest = "mu = " + fmt(mu) + ": overlap mismatch " + fmt(post) + ", local error " + fmt(local_error) +
              ", max |c_j - a_j| " + fmt(max_delta);
    if (!(post < delta && local_error < b.local_tolerance && max_delta < delta)) continue;

    record.post_mismatch = post;
    record.penalty = mu;
    record.identity = false;
    record.parent = b.inner;
    for (Eigen::Index i = 0; i < n; ++i) {
      record.adjustments[static_cast<std::size_t>(i)].second = c(i) - original(i);
    }
    std::vector<Term> terms;
    for (Eigen::Index i = 0; i < n; ++i) terms.push_back({elements[static_cast<std::size_t>(i)].index(), c(i), {}});
    Construction construction{
        Method::GramSolve, QuadratureProvenance::of(patch_rule),
        "overlap reconciliation against patch " + std::to_string(a.patch_index) +
            ": penalized normal equations (G_U + mu G_O) c = r_U + mu r_O, mu = " + fmt(mu) +
            ", Cholesky factorization (LLT)"};
    LocalCertificate adjusted{b.patch_index, b.patch,
                              assemble(b.inner.target_descriptor, basis, std::move(terms), patch_norm,
                                       b.local_tolerance, local_error, std::move(construction),
                                       {b.inner.digest, a.inner.digest}),
                              b.local_tolerance};
    return {std::move(adjusted), std::move(record)};
  }
  throw ReconciliationFailure("patches " + std::to_string(a.patch_index) + " and " +
                              std::to_string(b.patch_index) + ": mismatch " + fmt(pre) +
                              " cannot be brought below delta = " + fmt(delta) +
                              " within the local tolerance; last attempt " + closest);
}

// ---------------------------------------------------------------------------
// Partition of unity

PartitionOfUnity::PartitionOfUnity(Cover cover) : cover_(std::move(cover)) {}

PartitionOfUnity build_pou(const Cover& cover) { return PartitionOfUnity(cover); }

double PartitionOfUnity::weight(int i, double x) const {
  const auto& ps = cover_.patches;
  const auto k = static_cast<std::size_t>(i);
  if (k >= ps.size()) throw ConfigurationError("no patch " + std::to_string(i));
  if (!ps[k].contains(x)) return 0.0;
  if (k > 0 && x < ps[k - 1].hi) return (x - ps[k].lo) / (ps[k - 1].hi - ps[k].lo);
  if (k + 1 < ps.size() && x > ps[k + 1].lo) return 1.0 - (x - ps[k + 1].lo) / (ps[k].hi - ps[k + 1].lo);
  return 1.0;
}

double PartitionOfUnity::weight_derivative(int i, double x) const {
  const auto& ps = cover_.patches;
  const auto k = static_cast<std::size_t>(i);
  if (k >= ps.size()) throw ConfigurationError("no patch " + std::to_string(i));
  if (k > 0 && x >= ps[k].lo && x < ps[k - 1].hi) return 1.0 / (ps[k - 1].hi - ps[k].lo);
  if (k + 1 < ps.size() && x >= ps[k + 1].lo && x < ps[k].hi) return -1.0 / (ps[k].hi - ps[k + 1].lo);
  return 0.0;
}

std::vector<double> PartitionOfUnity::kinks() const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < cover_.patches.size(); ++i) {
    out.push_back(cover_.patches[i + 1].lo);
    out.push_back(cover_.patches[i].hi);
  }
  return out;
}

double PartitionOfUnity::max_slope() const {
  double slope = 0.0;
  for (std::size_t i = 0; i + 1 < cover_.patches.size(); ++i) {
    slope = std::max(slope, 1.0 / (cover_.patches[i].hi - cover_.patches[i + 1].lo));
  }
  return slope;
}

GluedApproximant::GluedApproximant(PartitionOfUnity pou, std::vector<Approximant> locals)
    : pou_(std::move(pou)), locals_(std::move(locals)) {
  if (locals_.size() != pou_.cover().size()) {
    throw ConfigurationError("one local approximant per patch is required");
  }
}

double GluedApproximant::value(double x) const {
  if (!domain().contains(x)) throw DomainError("x = " + fmt(x) + " outside " + to_string(domain()));
  double s = 0.0;
  for (std::size_t i = 0; i < locals_.size(); ++i) {
    const double w = pou_.weight(static_cast<int>(i), x);
    if (w != 0.0) s += w * locals_[i].value(x);
  }
  return s;
}

double GluedApproximant::derivative(double x) const {
  if (!domain().contains(x)) throw DomainError("x = " + fmt(x) + " outside " + to_string(domain()));
  double s = 0.0;
  for (std::size_t i = 0; i < locals_.size(); ++i) {
    if (!pou_.cover().patches[i].contains(x)) continue;
    const double w = pou_.weight(static_cast<int>(i), x);
    const double dw = pou_.weight_derivative(static_cast<int>(i), x);
    if (dw != 0.0) s += dw * locals_[i].value(x);
    if (w != 0.0) s += w * locals_[i].derivative(x);
  }
  return s;
}

std::vector<double> GluedApproximant::kinks() const {
  std::vector<double> out = pou_.kinks();
  for (const auto& l : locals_) {
    const auto k = l.kinks();
    out.insert(out.end(), k.begin(), k.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int GluedApproximant::oscillation_hint() const {
  int osc = 0;
  for (const auto& l : locals_) osc = std::max(osc, l.oscillation_hint());
  return osc;
}

GluedApproximant glued_approximant(const GluedCertificate& cert) {
  std::vector<Approximant> locals;
  for (const auto& l : cert.locals) locals.push_back(Approximant::of(l.inner));
  return {build_pou(cert.cover), std::move(locals)};
}

// ---------------------------------------------------------------------------
// Gluing

namespace {

double global_error(const TargetFunction& f, const GluedApproximant& g, Interval domain) {
  std::vector<double> kinks = merged_kinks(f, g);
  const int osc = std::max({1, f.oscillation_hint(), g.oscillation_hint()});
  const auto rule = oracle_rule(construction_rule(domain, std::move(kinks), osc, kPoints));
  return norm_of_difference(f, g, {NormKind::W12, domain}, rule).value;
}

double max_patch_width(const Cover& cover) {
  double w = 0.0;
  for (const auto& p : cover.patches) w = std::max(w, p.length());
  return w;
}

std::vector<std::string> expected_genealogy(const GluedCertificate& cert) {
  std::vector<std::string> out;
  for (const auto& l : cert.locals) out.push_back(l.inner.digest);
  for (const auto& r : cert.reconciliation) {
    if (!r.identity) out.push_back(r.parent.digest);
  }
  return out;
}

}  // namespace

GluedCertificate glue(const TargetFunction& f, const std::vector<LocalCertificate>& locals,
                      std::vector<ReconciliationRecord> records, const PartitionOfUnity& pou,
                      double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigurationError("tolerance must be positive and finite");
  const Cover& cover = pou.cover();
  const std::size_t m = cover.size();
  if (locals.size() != m) throw ConfigurationError("one local certificate per patch is required");
  for (std::size_t i = 0; i < m; ++i) {
    const auto& l = locals[i];
    if (l.patch_index != static_cast<int>(i) || !(l.patch == cover.patches[i]) ||
        !(l.inner.norm == NormTag{NormKind::W12, cover.patches[i]})) {
      throw ConfigurationError("local certificate " + std::to_string(i) + " does not match patch " +
                               to_string(cover.patches[i]));
    }
    if (!(l.inner.reported_error < 0.5 * eps) || l.local_tolerance > 0.5 * eps) {
      throw ToleranceViolated("local certificate " + std::to_string(i) + " is not below eps/2",
                              l.inner.reported_error, 0.5 * eps);
    }
  }

  GluedCertificate cert;
  cert.target_descriptor = f.descriptor();
  cert.cover = cover;
  cert.locals = locals;
  cert.norm = {NormKind::W12, cover.domain};
  cert.tolerance = eps;
  cert.delta = eps / (2.0 * static_cast<double>(m));

  for (const auto& [i, k] : cover.overlap_pairs) {
    const double mismatch = check_overlap(locals[static_cast<std::size_t>(i)], locals[static_cast<std::size_t>(k)]);
    if (!(mismatch < cert.delta)) {
      throw CompatibilityError("overlap (" + std::to_string(i) + ", " + std::to_string(k) + ") mismatch " +
                               fmt(mismatch) + " is not below delta = " + fmt(cert.delta));
    }
    auto it = std::find_if(records.begin(), records.end(),
                           [&](const ReconciliationRecord& r) { return r.left == i && r.right == k; });
    if (it == records.end()) {
      ReconciliationRecord r;
      r.left = i;
      r.right = k;
      r.pre_mismatch = mismatch;
      for (const auto& t : locals[static_cast<std::size_t>(k)].inner.terms) r.adjustments.emplace_back(t.index, 0.0);
      records.push_back(std::move(r));
      it = std::prev(records.end());
    }
    it->post_mismatch = mismatch;
  }
  std::sort(records.begin(), records.end(),
            [](const ReconciliationRecord& a, const ReconciliationRecord& b) { return a.left < b.left; });
  cert.reconciliation = std::move(records);

  const GluedApproximant glued = glued_approximant(cert);
  cert.reported_error = global_error(f, glued, cover.domain);
  cert.max_slope = pou.max_slope();
  cert.c_pu = 1.0 + 2.0 * cert.max_slope * max_patch_width(cover);
  double max_local = 0.0;
  for (const auto& l : locals) max_local = std::max(max_local, l.inner.reported_error);
  cert.bound_estimate = max_local + cert.c_pu * 0.5 * eps;
  if (!(cert.reported_error < eps)) {
    throw ToleranceViolated("glued W12 error " + fmt(cert.reported_error) + " (direct) is not below eps = " +
                                fmt(eps) + "; partition-of-unity bound " + fmt(cert.bound_estimate),
                            cert.reported_error, eps);
  }
  cert.genealogy = expected_genealogy(cert);
  cert.digest = compute_digest(cert);
  return cert;
}

GluedCertificate glue_pipeline(const TargetFunction& f, const GlueSettings& settings) {
  if (settings.min_local_count < 4 || settings.max_local_count < settings.min_local_count) {
    throw ConfigurationError("local B-spline counts must satisfy 4 <= min <= max");
  }
  const Cover cover = make_cover(f.domain(), settings.patches, settings.overlap_fraction);
  const std::size_t m = cover.size();
  const double eps = settings.tolerance;
  const double delta = eps / (2.0 * static_cast<double>(m));
  ExtractionSettings local_settings;
  local_settings.tolerance = 0.5 * eps;
  local_settings.points = settings.points;

  std::vector<int> counts(m, settings.min_local_count);
  std::vector<LocalCertificate> fresh(m);
  auto extract = [&](std::size_t i) {
    for (; counts[i] <= settings.max_local_count; ++counts[i]) {
      try {
        fresh[i] = extract_local(f, static_cast<int>(i), cover.patches[i],
                                 BasisFamily::cubic_bspline(cover.patches[i], counts[i]), local_settings);
        return;
      } catch (const ToleranceViolated&) {
      }
    }
    throw ToleranceViolated("patch " + std::to_string(i) + " needs more than " +
                                std::to_string(settings.max_local_count) + " local B-splines",
                            std::numeric_limits<double>::infinity(), local_settings.tolerance);
  };
  for (std::size_t i = 0; i < m; ++i) extract(i);

  for (;;) {
    std::vector<LocalCertificate> locals = fresh;
    std::vector<ReconciliationRecord> records;
    std::size_t failed = m;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      try {
        auto r = reconcile(locals[i], locals[i + 1], delta, f);
        locals[i + 1] = std::move(r.adjusted);
        records.push_back(std::move(r.record));
      } catch (const ReconciliationFailure&) {
        if (counts[i] >= settings.max_local_count || counts[i + 1] >= settings.max_local_count) throw;
        failed = i;
        break;
      }
    }
    if (failed == m) return glue(f, locals, std::move(records), build_pou(cover), eps);
    ++counts[failed];
    ++counts[failed + 1];
    extract(failed);
    extract(failed + 1);
  }
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

Json norm_to_json(const NormTag& n) {
  return {{"kind", std::string(norm_kind_name(n.kind))}, {"domain", interval_to_json(n.domain)}};
}

}  // namespace

Json to_json(const GluedCertificate& cert) {
  Json patches = Json::array();
  for (const auto& p : cert.cover.patches) patches.push_back(interval_to_json(p));
  Json locals = Json::array();
  for (const auto& l : cert.locals) {
    locals.push_back({{"patch_index", l.patch_index},
                      {"patch", interval_to_json(l.patch)},
                      {"local_tolerance", l.local_tolerance},
                      {"certificate", to_json(l.inner)}});
  }
  Json records = Json::array();
  for (const auto& r : cert.reconciliation) {
    Json adjustments = Json::array();
    for (const auto& [index, d] : r.adjustments) adjustments.push_back({{"index", index}, {"delta", d}});
    records.push_back({{"pair", Json::array({r.left, r.right})},
                       {"pre_mismatch", r.pre_mismatch},
                       {"post_mismatch", r.post_mismatch},
                       {"penalty", r.penalty},
                       {"identity", r.identity},
                       {"adjustments", std::move(adjustments)},
                       {"parent", r.identity ? Json(nullptr) : to_json(r.parent)}});
  }
  Json j = {
      {"kind", "glued"},
      {"schema_version", cert.schema_version},
      {"target", cert.target_descriptor},
      {"cover", {{"domain", interval_to_json(cert.cover.domain)}, {"patches", std::move(patches)}}},
      {"locals", std::move(locals)},
      {"reconciliation", std::move(records)},
      {"partition",
       {{"kind", "piecewise_linear_ramps"}, {"max_slope", cert.max_slope}, {"c_pu", cert.c_pu}}},
      {"norm", norm_to_json(cert.norm)},
      {"tolerance", cert.tolerance},
      {"delta", cert.delta},
      {"bound_estimate", cert.bound_estimate},
      {"reported_error", cert.reported_error},
      {"genealogy", cert.genealogy},
  };
  if (!cert.digest.empty()) j["digest"] = cert.digest;
  return j;
}

GluedCertificate glued_from_json(const Json& j) {
  const std::string path = "$";
  if (!j.is_object()) throw ParseError(path, "expected an object");
  GluedCertificate cert;
  cert.schema_version = require_string(j, "schema_version", path);
  if (cert.schema_version != kSchemaVersion) {
    throw ParseError("$.schema_version", "unsupported schema version '" + cert.schema_version + "'");
  }
  if (const auto kind = require_string(j, "kind", path); kind != "glued") {
    throw ParseError("$.kind", "expected 'glued', found '" + kind + "'");
  }
  cert.target_descriptor = require_string(j, "target", path);

  const Json& cover = require(j, "cover", path);
  const Interval domain = interval_from_json(require(cover, "domain", "$.cover"), "$.cover.domain");
  const Json& patches = require(cover, "patches", "$.cover");
  if (!patches.is_array()) throw ParseError("$.cover.patches", "expected an array");
  std::vector<Interval> ps;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    ps.push_back(interval_from_json(patches[i], "$.cover.patches[" + std::to_string(i) + "]"));
  }
  try {
    cert.cover = Cover::from_patches(domain, std::move(ps));
  } catch (const Error& e) {
    throw ParseError("$.cover", e.what());
  }

  const Json& locals = require(j, "locals", path);
  if (!locals.is_array()) throw ParseError("$.locals", "expected an array");
  for (std::size_t i = 0; i < locals.size(); ++i) {
    const std::string lp = "$.locals[" + std::to_string(i) + "]";
    LocalCertificate l;
    l.patch_index = require_int(locals[i], "patch_index", lp);
    l.patch = interval_from_json(require(locals[i], "patch", lp), lp + ".patch");
    l.local_tolerance = require_number(locals[i], "local_tolerance", lp);
    l.inner = certificate_from_json(require(locals[i], "certificate", lp), lp + ".certificate");
    cert.locals.push_back(std::move(l));
  }

  const Json& records = require(j, "reconciliation", path);
  if (!records.is_array()) throw ParseError("$.reconciliation", "expected an array");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string rp = "$.reconciliation[" + std::to_string(i) + "]";
    const Json& r = records[i];
    ReconciliationRecord rec;
    const Json& pair = require(r, "pair", rp);
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
      throw ParseError(rp + ".pair", "expected [i, i+1]");
    }
    rec.left = pair[0].get<int>();
    rec.right = pair[1].get<int>();
    rec.pre_mismatch = require_number(r, "pre_mismatch", rp);
    rec.post_mismatch = require_number(r, "post_mismatch", rp);
    rec.penalty = require_number(r, "penalty", rp);
    const Json& identity = require(r, "identity", rp);
    if (!identity.is_boolean()) throw ParseError(rp + ".identity", "expected a boolean");
    rec.identity = identity.get<bool>();
    const Json& adjustments = require(r, "adjustments", rp);
    if (!adjustments.is_array()) throw ParseError(rp + ".adjustments", "expected an array");
    for (std::size_t k = 0; k < adjustments.size(); ++k) {
      const std::string ap = rp + ".adjustments[" + std::to_string(k) + "]";
      rec.adjustments.emplace_back(require_int(adjustments[k], "index", ap),
                                   require_number(adjustments[k], "delta", ap));
    }
    const Json& parent = require(r, "parent", rp);
    if (!rec.identity) rec.parent = certificate_from_json(parent, rp + ".parent");
    cert.reconciliation.push_back(std::move(rec));
  }

  const Json& partition = require(j, "partition", path);
  cert.max_slope = require_number(partition, "max_slope", "$.partition");
  cert.c_pu = require_number(partition, "c_pu", "$.partition");
  const Json& norm = require(j, "norm", path);
  try {
    cert.norm.kind = parse_norm_kind(require_string(norm, "kind", "$.norm"));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError("$.norm.kind", e.what());
  }
  cert.norm.domain = interval_from_json(require(norm, "domain", "$.norm"), "$.norm.domain");
  cert.tolerance = require_number(j, "tolerance", path);
  cert.delta = require_number(j, "delta", path);
  cert.bound_estimate = require_number(j, "bound_estimate", path);
  cert.reported_error = require_number(j, "reported_error", path);
  const Json& genealogy = require(j, "genealogy", path);
  if (!genealogy.is_array()) throw ParseError("$.genealogy", "expected an array");
  for (const auto& g : genealogy) {
    if (!g.is_string()) throw ParseError("$.genealogy", "expected digest strings");
    cert.genealogy.push_back(g.get<std::string>());
  }
  cert.digest = require_string(j, "digest", path);
  return cert;
}

std::string serialize(const GluedCertificate& cert) { return canonical_dump(to_json(cert)); }

std::string compute_digest(const GluedCertificate& cert) { return content_digest(to_json(cert)); }

// ---------------------------------------------------------------------------
// Verification

GluedVerification verify_glued(const GluedCertificate& cert, const TargetFunction& f) {
  GluedVerification report;
  report.digest = compute_digest(cert);
  auto& notes = report.notes;

  bool structural = true;
  auto fail = [&](std::string note) {
    structural = false;
    notes.push_back(std::move(note));
  };
  if (cert.digest != report.digest) fail("digest mismatch: recorded " + cert.digest + ", recomputed " + report.digest);
  if (cert.target_descriptor != f.descriptor()) {
    fail("target descriptor '" + cert.target_descriptor + "' differs from '" + f.descriptor() + "'");
  }
  const std::size_t m = cert.cover.size();
  if (cert.locals.size() != m) fail("expected one local certificate per patch");
  if (!(cert.norm == NormTag{NormKind::W12, cert.cover.domain})) fail("global norm must be w12 on the cover domain");
  if (!(cert.tolerance > 0.0)) fail("tolerance must be positive");
  if (cert.delta != cert.tolerance / (2.0 * static_cast<double>(m))) fail("delta differs from eps / (2M)");
  if (!(cert.reported_error < cert.tolerance)) fail("reported error is not below the tolerance");
  if (cert.genealogy != expected_genealogy(cert)) fail("genealogy does not list every local certificate and parent");
  if (cert.reconciliation.size() + 1 != m && m > 0) fail("expected one reconciliation record per overlap pair");

  CertificateStore store;
  for (const auto& l : cert.locals) store.add(l.inner);
  for (const auto& r : cert.reconciliation) {
    if (!r.identity) store.add(r.parent);
  }

  report.locals_ok = structural && cert.locals.size() == m;
  for (std::size_t i = 0; i < cert.locals.size() && i < m; ++i) {
    const auto& l = cert.locals[i];
    if (l.patch_index != static_cast<int>(i) || !(l.patch == cert.cover.patches[i]) ||
        !(l.inner.norm == NormTag{NormKind::W12, l.patch})) {
      report.locals_ok = false;
      notes.push_back("local " + std::to_string(i) + " does not match its patch");
      continue;
    }
    if (!(l.inner.reported_error < 0.5 * cert.tolerance)) {
      report.locals_ok = false;
      notes.push_back("local " + std::to_string(i) + " is not below eps/2");
    }
    const auto v = verify(l.inner, f, &store);
    if (!v.verdict()) {
      report.locals_ok = false;
      notes.push_back("local " + std::to_string(i) + " fails verification");
      for (const auto& n : v.notes) notes.push_back("  " + n);
    }
  }

  report.overlaps_ok = report.locals_ok;
  if (report.locals_ok) {
    for (const auto& [i, k] : cert.cover.overlap_pairs) {
      const double mismatch = check_overlap(cert.locals[static_cast<std::size_t>(i)],
                                            cert.locals[static_cast<std::size_t>(k)]);
      if (!(mismatch < cert.delta)) {
        report.overlaps_ok = false;
        notes.push_back("overlap (" + std::to_string(i) + ", " + std::to_string(k) + ") mismatch " +
                        fmt(mismatch) + " is not below delta " + fmt(cert.delta));
      }
    }
    report.recomputed_error = global_error(f, glued_approximant(cert), cert.cover.domain);
    report.bound_honored =
        report.recomputed_error <= cert.reported_error * (1.0 + kBoundRelativeSlack) + kBoundAbsoluteSlack &&
        cert.reported_error < cert.tolerance;
    if (!report.bound_honored) {
      notes.push_back("recomputed global error " + fmt(report.recomputed_error) + " exceeds reported " +
                      fmt(cert.reported_error));
    }
  }
  report.structural_ok = structural;
  return report;
}

}  // namespace certapprox
