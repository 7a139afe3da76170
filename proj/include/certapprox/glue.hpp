#pragma once

#include <string>
#include <utility>
#include <vector>

#include "certapprox/approximate.hpp"
#include "certapprox/certificate.hpp"

namespace certapprox {

inline constexpr double kDefaultOverlapFraction = 0.2;

/// 1-D chain cover: consecutive patches overlap, all others are disjoint.
struct Cover {
  Interval domain;
  std::vector<Interval> patches;
  std::vector<std::pair<int, int>> overlap_pairs;

  /// Validates the chain structure and fills overlap_pairs.
  /// Throws ConfigurationError or TopologyError.
  static Cover from_patches(Interval domain, std::vector<Interval> patches);

  std::size_t size() const noexcept { return patches.size(); }
  /// patches[i] intersected with patches[i + 1].
  Interval overlap(int i) const;
};

/// M patches of width h (1 + overlap_fraction) centred at (i + 1/2) h,
/// h = |domain| / M, clipped to the domain.
Cover make_cover(Interval domain, int m, double overlap_fraction = kDefaultOverlapFraction);

struct LocalCertificate {
  int patch_index = 0;
  Interval patch;
  ApproximationCertificate inner;  // norm W12(patch)
  double local_tolerance = 0.0;
};

/// Elements of `basis` whose support meets `patch` in more than a point.
std::vector<BasisElement> local_elements(const BasisFamily& basis, Interval patch);

/// Gram projection of f onto the basis elements living on the patch, under
/// W12(patch), with tolerance settings.tolerance (the caller passes eps/2).
LocalCertificate extract_local(const TargetFunction& f, int patch_index, Interval patch,
                               const BasisFamily& basis, const ExtractionSettings& settings);

/// ||f_a - f_b|| in W12(overlap) with a verification-grade rule.
double overlap_mismatch(const RealFunction& fa, const RealFunction& fb, Interval overlap);

/// Mismatch of two local approximants on their overlap. TopologyError when
/// the patches are disjoint.
double check_overlap(const LocalCertificate& a, const LocalCertificate& b);

struct ReconciliationRecord {
  int left = 0;
  int right = 0;
  double pre_mismatch = 0.0;
  double post_mismatch = 0.0;
  /// Overlap weight mu of the penalized solve; 0 for the identity.
  double penalty = 0.0;
  /// (basis index, c_j - a_j) for every coefficient of the right patch.
  std::vector<std::pair<int, double>> adjustments;
  /// Certificate of the right patch before adjustment.
  ApproximationCertificate parent;
  bool identity = true;
};

struct Reconciliation {
  LocalCertificate adjusted;
  ReconciliationRecord record;
};

/// Penalty weights tried in order by reconcile.
const std::vector<double>& reconciliation_penalties();

/// Adjusts b's coefficients by minimizing
///   ||f - sum c_j b_j||^2_{W12(U_b)} + mu ||f_a - sum c_j b_j||^2_{W12(overlap)}
/// over an increasing ladder of mu. Accepts the first solution with overlap
/// mismatch < delta, local error < b.local_tolerance and every
/// |c_j - a_j| < delta. Throws ReconciliationFailure otherwise.
Reconciliation reconcile(const LocalCertificate& a, const LocalCertificate& b, double delta,
                         const TargetFunction& f);

/// Piecewise-linear weights: ramps across each overlap, 1 on the cores.
class PartitionOfUnity {
 public:
  explicit PartitionOfUnity(Cover cover);

  const Cover& cover() const noexcept { return cover_; }
  double weight(int i, double x) const;
  /// Right-hand derivative.
  double weight_derivative(int i, double x) const;
  /// Every ramp endpoint inside the domain.
  std::vector<double> kinks() const;
  /// max_i ||psi_i'||_inf = 1 / (smallest overlap width), 0 for one patch.
  double max_slope() const;

 private:
  Cover cover_;
};

PartitionOfUnity build_pou(const Cover& cover);

/// sum_i psi_i (sum_j a_j^(i) b_j): only patches containing x contribute.
class GluedApproximant final : public RealFunction {
 public:
  GluedApproximant(PartitionOfUnity pou, std::vector<Approximant> locals);

  Interval domain() const override { return pou_.cover().domain; }
  double value(double x) const override;
  double derivative(double x) const override;
  std::vector<double> kinks() const override;
  int oscillation_hint() const override;

 private:
  PartitionOfUnity pou_;
  std::vector<Approximant> locals_;
};

struct GluedCertificate {
  std::string schema_version{kSchemaVersion};
  std::string target_descriptor;
  Cover cover;
  std::vector<LocalCertificate> locals;
  std::vector<ReconciliationRecord> reconciliation;
  NormTag norm;  // W12(domain)
  double tolerance = 0.0;
  double delta = 0.0;
  double max_slope = 0.0;
  double c_pu = 0.0;
  double bound_estimate = 0.0;
  double reported_error = 0.0;
  std::vector<std::string> genealogy;
  std::string digest;
};

GluedApproximant glued_approximant(const GluedCertificate& cert);

/// Blends reconciled locals. CompatibilityError when an overlap mismatch is
/// at or above delta = eps / (2M); ToleranceViolated when the directly
/// measured global error is not below eps.
GluedCertificate glue(const TargetFunction& f, const std::vector<LocalCertificate>& locals,
                      std::vector<ReconciliationRecord> records, const PartitionOfUnity& pou,
                      double eps);

struct GlueSettings {
  int patches = 3;
  double overlap_fraction = kDefaultOverlapFraction;
  double tolerance = 1e-2;
  int min_local_count = 4;
  int max_local_count = 64;
  int points = 16;
};

/// Cover, local cubic B-spline extraction at eps/2 (local function count
/// raised until the tolerance is met), left-to-right reconciliation, gluing.
GluedCertificate glue_pipeline(const TargetFunction& f, const GlueSettings& settings);

Json to_json(const GluedCertificate& cert);
GluedCertificate glued_from_json(const Json& j);
std::string serialize(const GluedCertificate& cert);
std::string compute_digest(const GluedCertificate& cert);

struct GluedVerification {
  std::string digest;
  bool structural_ok = false;
  bool locals_ok = false;
  bool overlaps_ok = false;
  double recomputed_error = 0.0;
  bool bound_honored = false;
  std::vector<std::string> notes;

  bool verdict() const noexcept { return structural_ok && locals_ok && overlaps_ok && bound_honored; }
};

/// Re-verifies every local certificate, every overlap mismatch and the
/// global error from the certificate alone.
GluedVerification verify_glued(const GluedCertificate& cert, const TargetFunction& f);

}  // namespace certapprox
