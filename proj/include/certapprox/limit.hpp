#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "certapprox/certificate.hpp"

namespace certapprox {

/// Computable rule eps -> N(eps), identified by a spec string:
///   "ceil(log2(2/eps))"  smallest N with 2^N >= 2/eps (tent series)
///   "constant:<N>"       N for every eps
struct Modulus {
  std::string spec;
  std::function<int(double)> rule;

  int operator()(double eps) const;

  static Modulus tent_closed_form();
  static Modulus constant(int n);
  /// Rebuilds a modulus from its spec; ConfigurationError when unknown.
  static Modulus from_spec(const std::string& spec);
};

inline constexpr int kDefaultLadder = 8;
/// Extra depth of the partial sum standing in for the limit.
inline constexpr int kProxyDepth = 12;

/// One checked Cauchy pair: sup |f_n - f_m| against a bound.
struct EvidenceRecord {
  std::string sequence;
  int n = 0;
  int m = 0;
  std::string target_n;
  std::string target_m;
  double bound = 0.0;
  double sup_norm = 0.0;
  SupNormMethod method = SupNormMethod::NotApplicable;
  bool passed = false;
  std::string digest;
};

Json to_json(const EvidenceRecord& e);
EvidenceRecord evidence_from_json(const Json& j, const std::string& path);

/// n -> (f_n, C_n) with a modulus of uniform convergence. Members and
/// evidence are cached.
class CertifiedSequence {
 public:
  struct Member {
    TargetFunction f;
    ApproximationCertificate cert;
  };
  using Generator = std::function<std::optional<Member>(int)>;
  /// Closed-form bound on sup |f - f_n| when one is known.
  using TailBound = std::function<std::optional<double>(int)>;

  CertifiedSequence(std::string name, Generator generator, Modulus modulus, TailBound tail = {});

  const std::string& name() const noexcept { return name_; }
  const Modulus& modulus() const noexcept { return modulus_; }
  /// Throws IncompleteSequence when the generator has no member n.
  const Member& member(int n) const;
  std::optional<double> closed_form_tail(int n) const;
  const std::map<std::pair<int, int>, EvidenceRecord>& evidence() const noexcept { return evidence_; }

  /// f_n = sum_{k=0}^{n} 2^{-k} phi_{2^k}, exact-series certificates, tail 2^{-n}.
  static CertifiedSequence tent_series(Modulus modulus = Modulus::tent_closed_form());
  /// f_n = f for every n, tail 0.
  static CertifiedSequence constant(TargetFunction f, ApproximationCertificate cert,
                                    Modulus modulus = Modulus::constant(1));

 private:
  friend EvidenceRecord verify_cauchy(CertifiedSequence& seq, int n, int m, double bound);

  std::string name_;
  Generator generator_;
  Modulus modulus_;
  TailBound tail_;
  mutable std::map<int, Member> members_;
  std::map<std::pair<int, int>, EvidenceRecord> evidence_;
};

/// sup |f_n - f_m| on the common domain. Tent-hierarchy series are compared
/// exactly in rational arithmetic at the dyadic breakpoints of one period;
/// other piecewise-linear pairs via merged breakpoints; everything else by
/// the flagged dense-grid estimate.
NormMeasurement cauchy_sup(const TargetFunction& fn, const TargetFunction& fm);

/// Exact sup over [0, 1] of sum_k (a_k - b_k) phi_{2^k}, rounded to double.
double tent_difference_sup(const std::vector<std::pair<int, double>>& a,
                           const std::vector<std::pair<int, double>>& b);

/// Measures sup |f_n - f_m| and records whether it is below `bound`.
/// Failure is reported in the record, not thrown.
EvidenceRecord verify_cauchy(CertifiedSequence& seq, int n, int m, double bound);

struct ModulusEvaluation {
  std::string spec;
  double argument = 0.0;  // eps / 2
  int index = 0;
  int proxy_depth = 0;
  std::string proxy_target;
  double proxy_sup = 0.0;  // sup |f_N - f_{N + depth}|
  std::optional<double> proxy_tail;
  std::string digest;
};

Json to_json(const ModulusEvaluation& m);

struct LimitCertificate {
  std::string schema_version{kSchemaVersion};
  std::string sequence;
  double tolerance = 0.0;  // eps
  int index = 0;           // N(eps / 2)
  int ladder = kDefaultLadder;
  std::vector<ApproximationCertificate> chain;  // C_1 .. C_N
  std::vector<EvidenceRecord> tail_evidence;
  ModulusEvaluation modulus;
  std::optional<double> closed_form_tail;
  double tail_bound = 0.0;
  double combined_bound = 0.0;
  std::vector<std::string> genealogy;
  std::string digest;

  const ApproximationCertificate& base() const { return chain.back(); }
};

/// Evaluates N(eps/2), checks the ladder (N, N+1) .. (N, N+K) against eps/2
/// and the proxy f_{N+12}, and chains every consulted record. Throws
/// EvidenceContradiction on a failed check, IncompleteSequence on a missing
/// member. Every record is added to `store` when one is given.
LimitCertificate transfer(CertifiedSequence& seq, double eps, int ladder = kDefaultLadder,
                          CertificateStore* store = nullptr);

/// The worked tent-series example; 0 < eps < 1.
LimitCertificate tent_series(double eps, int ladder = kDefaultLadder, CertificateStore* store = nullptr);

/// Exact-series certificate for the tent partial sum f_n.
ApproximationCertificate tent_member_certificate(int n);

Json to_json(const LimitCertificate& cert);
LimitCertificate limit_from_json(const Json& j);
std::string serialize(const LimitCertificate& cert);
std::string compute_digest(const LimitCertificate& cert);

struct LimitVerification {
  std::string digest;
  bool structural_ok = false;
  bool chain_ok = false;
  bool evidence_ok = false;
  bool bound_ok = false;
  std::vector<std::string> notes;

  bool verdict() const noexcept { return structural_ok && chain_ok && evidence_ok && bound_ok; }
};

/// Re-runs every evidence record and member verification from the
/// descriptors stored in the certificate.
LimitVerification verify_limit(const LimitCertificate& cert);

}  // namespace certapprox
