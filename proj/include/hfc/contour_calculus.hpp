#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hfc/operator_core.hpp"
#include "hfc/quadrature.hpp"
#include "hfc/sector_function.hpp"

namespace hfc {

struct ContourOptions {
  /// Contour angles; empty means the midpoint between type and function angle.
  std::vector<double> nu;
  int nodes_per_decade = 16;
  /// Radial range is widened until the certified tails fall below this
  /// fraction of the certified integral.
  double truncation_eps = 1e-16;
  /// Optional overrides of the certificate-derived range.
  std::optional<double> r_min;
  std::optional<double> r_max;
};

struct QuadratureMeta {
  std::vector<double> nu;
  std::vector<double> r_min;
  std::vector<double> r_max;
  int nodes_per_decade = 0;
  std::vector<int> nodes;        ///< per coordinate, both rays
  bool separable = true;         ///< false if a brute-force product rule was needed
};

struct FCResult {
  Matrix value;
  double tail_estimate = 0.0;
  QuadratureMeta meta;
};

/// Wraps a certified function as a one-component form (or a constant when
/// the function does not depend on any variable).
H01Form as_h01(const SectorFunction& f, int d);

/// f(A_1,...,A_d) by sectorial contour quadrature.
FCResult contour_fc(const H01Form& f, const CommutingTuple& tuple, const ContourOptions& options = {});
FCResult contour_fc(const SectorFunction& f, const CommutingTuple& tuple,
                    const ContourOptions& options = {});

/// S diag(f(lambda)) S^{-1}.
Matrix spectral_oracle_fc(const SectorFunction& f, const CommutingTuple& tuple);
Matrix spectral_oracle_fc(const SectorFunction& f, const JointSpectrum& js);
Matrix spectral_oracle_fc(const H01Form& f, const CommutingTuple& tuple);
Matrix spectral_oracle_fc(const H01Form& f, const JointSpectrum& js);

/// Type of each operator: the largest eigenvalue argument.
std::vector<double> estimated_types(const CommutingTuple& tuple);

enum class FcMethod { automatic, contour, oracle };

struct FcOptions {
  FcMethod method = FcMethod::automatic;
  ContourOptions contour;
  NormOptions norm;
  SupNormGrid sup;
  /// automatic picks the oracle when the eigenbasis condition number is below this
  double oracle_condition_limit = 1e8;
};

/// Evaluates f(A) with the requested method; `js` may carry a precomputed
/// eigenbasis for the oracle.
Matrix evaluate_fc(const H01Form& f, const CommutingTuple& tuple, const FcOptions& options,
                   const JointSpectrum* js = nullptr);

struct EnsembleOptions {
  int size = 32;
  std::uint64_t seed = 1;
  int max_atoms = 8;
  double t_min = 1e-3;
  double t_max = 1e3;
  /// member 0 is the constant 1 and other members may carry a constant
  bool include_constant = true;
  /// allow z^{1/2} e^{-z} atoms; unset means "when every angle is below pi/2"
  std::optional<bool> allow_exp;
};

struct EnsembleMember {
  H01Form f;
  std::string description;
};

/// Seeded random H-infinity_{0,1} test functions on the given domain. The
/// random draws do not depend on the domain angles, so equal seeds give
/// matched ensembles across domains.
std::vector<EnsembleMember> fc_ensemble(int d, const SectorDomain& domain,
                                        const EnsembleOptions& options);

struct FcConstantReport {
  double estimate = 0.0;  ///< lower bound for the calculus constant
  int best = -1;
  std::string best_description;
  std::vector<double> norms;
  std::vector<double> sups;
  std::vector<double> ratios;
};

FcConstantReport fc_constant_estimate(const CommutingTuple& tuple, const SectorDomain& domain,
                                      const EnsembleOptions& ensemble, const FcOptions& options = {});
/// Ratios for a prepared ensemble.
FcConstantReport fc_constant_estimate(const CommutingTuple& tuple, const SectorDomain& domain,
                                      const std::vector<EnsembleMember>& ensemble,
                                      const FcOptions& options = {});

struct AngleProfile {
  std::vector<double> angles;
  std::vector<double> estimates;
  std::vector<bool> flagged;
  double flag_multiple = 0.0;
};

/// fc_constant_estimate along a ladder of uniform angles with a matched
/// ensemble; sup norms are made monotone in the angle (a larger sector
/// contains the boundary of a smaller one).
AngleProfile angle_dependence_profile(const CommutingTuple& tuple, std::vector<double> angles,
                                      const EnsembleOptions& ensemble,
                                      const FcOptions& options = {}, double flag_multiple = 2.0);

struct PhiApproximationReport {
  std::vector<int> m;
  std::vector<double> errors;
  std::vector<double> predicted;  ///< max over nonzero eigenvalues of |1 - phi_m| times |x|
  int monotone_from = 0;          ///< errors are nonincreasing from this index on
  double fitted_exponent = 0.0;   ///< e in errors ~ m^{-e} over the monotone tail
};

/// ||phi_m(A) x - x|| along an m ladder; without x, the operator norm of
/// (phi_m(A) - I) on the range component.
PhiApproximationReport phi_approximation_check(const Matrix& A, const SpaceModel& space,
                                               const std::optional<Vector>& x,
                                               const std::vector<int>& m_ladder);

/// phi_m(A) = m^2 A (m + A)^{-1} (1 + m A)^{-1}.
Matrix phi_m_matrix(const Matrix& A, int m);

struct IntegralIdentityReport {
  Matrix value;
  double defect = 0.0;
};

/// Midpoint rule in log s for the integral of A e^{-sA} phi_m(A) ds.
IntegralIdentityReport integral_identity_check(const Matrix& A, int m, double s_min = 1e-6,
                                               double s_max = 1e3, int nodes = 400);

}  // namespace hfc
