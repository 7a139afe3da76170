#pragma once

#include <vector>

#include "certapprox/basis.hpp"
#include "certapprox/certificate.hpp"
#include "certapprox/quadrature.hpp"
#include "certapprox/target.hpp"

namespace certapprox {

struct ExtractionSettings {
  double tolerance = 1e-3;
  int max_terms = 4096;
  Method method = Method::GramSolve;
  /// Gauss-Legendre points per panel of the construction rule.
  int points = 16;

  void validate() const;
};

/// Largest Gram condition number accepted.
inline constexpr double kMaxGramCondition = 1e12;

/// Construction rule for integrands built from `f` and `elements` on `domain`:
/// panels split at every kink, sized to the largest oscillation hint.
QuadratureRule probe_rule(const RealFunction& f, const std::vector<BasisElement>& elements,
                          Interval domain, int points);

/// Sequential probing a_j = <f, b_j> on an orthonormal family (FourierSine
/// under L2(0,1)). Stops at the first N whose Parseval error
/// (||f||^2 - sum a_j^2)^{1/2} is below tolerance and whose directly measured
/// error confirms it.
ApproximationCertificate approximate_orthonormal(const TargetFunction& f, const BasisFamily& family,
                                                 const ExtractionSettings& settings);

/// Parseval error after each probe, err_N for N = 1..count (no stopping).
std::vector<double> parseval_errors(const TargetFunction& f, const BasisFamily& family, int count,
                                    int points = 16);

struct GramSolution {
  std::vector<double> coefficients;
  double condition = 0.0;
  double error = 0.0;
  QuadratureRule rule;
};

/// Least-squares projection: solves G a = r by Cholesky, G_ij = <b_i, b_j>,
/// r_i = <f, b_i>. Throws IllConditionedBasis when cond(G) > 1e12.
GramSolution solve_gram(const RealFunction& f, const std::vector<BasisElement>& elements,
                        const NormTag& norm, int points = 16);

ApproximationCertificate approximate_gram(const TargetFunction& f,
                                          const std::vector<BasisElement>& elements,
                                          const NormTag& norm, const ExtractionSettings& settings);

/// a_j = <f, b_j> with no Gram solve, error measured directly.
ApproximationCertificate approximate_raw_probe(const TargetFunction& f,
                                               const std::vector<BasisElement>& elements,
                                               const NormTag& norm,
                                               const ExtractionSettings& settings);

/// Points used for the dense part of the Chebyshev sup-norm estimate.
inline constexpr int kChebyshevCheckNodes = 513;
/// Extra coefficients a_{N+1..N+8} summed into the tail estimate.
inline constexpr int kChebyshevTailTerms = 8;

struct ChebyshevCoefficients {
  std::vector<double> coefficients;  // a_0 .. a_N
  std::vector<double> tail;          // a_{N+1} .. a_{N+8}
  double node_error = 0.0;           // max |f - f_N| over the check nodes
  double tail_bound = 0.0;           // sum |tail|
};

/// a_0 = (1/pi) int f w, a_j = (2/pi) int f T_j w via Gauss-Chebyshev with
/// 2(N+1) nodes; the tail coefficients use 2(N+9) nodes.
ChebyshevCoefficients chebyshev_coefficients(const RealFunction& f, int degree);

/// Sup-norm certificate for the degree-N Chebyshev projection on [-1, 1].
ApproximationCertificate approximate_chebyshev(const TargetFunction& f, int degree, double tolerance);

struct GreedyTrace {
  std::vector<int> selection;        // dictionary positions, in pick order
  std::vector<double> coefficients;  // accumulated coefficient per selected element
  std::vector<double> residual_norms;  // ||r_0||, ||r_1||, ... after each iteration
};

/// Plain matching pursuit: each pick maximizes |<r, e>| / ||e||, ties go to the
/// lowest dictionary position.
GreedyTrace greedy_pursuit(const RealFunction& f, const std::vector<BasisElement>& dictionary,
                           const NormTag& norm, const ExtractionSettings& settings);

ApproximationCertificate approximate_greedy(const TargetFunction& f,
                                            const std::vector<BasisElement>& dictionary,
                                            const NormTag& norm, const ExtractionSettings& settings);

}  // namespace certapprox
