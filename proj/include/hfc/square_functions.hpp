#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hfc/contour_calculus.hpp"
#include "hfc/quadrature.hpp"
#include "hfc/stochastic.hpp"

namespace hfc {

/// t -> F(t_1 A_1, ..., t_d A_d) x sampled on grid^d with dt/t weights.
struct SquareFunctionJob {
  CommutingTuple tuple;
  SectorFunction F;
  LogGrid grid;
  Vector x;
};

struct SFEReport {
  double norm_F = 0.0;                   ///< value on the finest grid
  std::vector<double> refinement_curve;  ///< job grid, then two refinements
  bool cauchy = true;                    ///< differences shrink by `cauchy_factor`
  double constant_estimate = 0.0;        ///< norm_F / ||x||
  std::string mode;
};

struct SquareFunctionOptions {
  int refinements = 2;
  double cauchy_factor = 0.5;
  AverageMode mode = AverageMode::automatic;
  MonteCarloOptions mc;
};

/// Materialised sample of t -> F(tA)x; columns are grid nodes in
/// lexicographic order (last coordinate fastest). Uses the eigenbasis when
/// the tuple is diagonalizable and contour calculus otherwise.
GammaElement sample_zeta(const SquareFunctionJob& job);

/// sum_t w_t F(t lambda_j) conj(F(t lambda_l)) over grid^d, for joint
/// eigenvalue rows lambda_j (zero eigenvalues are allowed).
Matrix zeta_gram(const SectorFunction& F, const std::vector<std::vector<Complex>>& lambdas,
                 const LogGrid& grid);

/// sum_t w_t P(t lambda) over grid^d, one value per row of `lambdas`.
std::vector<Complex> grid_integral(const SectorFunction& P,
                                   const std::vector<std::vector<Complex>>& lambdas,
                                   const LogGrid& grid);

SFEReport square_function_norm(const SquareFunctionJob& job, const SquareFunctionOptions& options = {});

/// Unit eigenvectors of the tuple followed by seeded random unit vectors.
std::vector<Vector> sfe_probes(const CommutingTuple& tuple, int count = 64, std::uint64_t seed = 1);

struct SFEConstantReport {
  double constant_estimate = 0.0;
  int best = -1;
  std::vector<double> ratios;
};

SFEConstantReport sfe_constant(const CommutingTuple& tuple, const SectorFunction& F,
                               const std::vector<Vector>& probes, const LogGrid& grid = {},
                               const SquareFunctionOptions& options = {});

struct QuadInequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// Rademacher average of {F_j(A) x} against sup |(sum |F_j|^2)^{1/2}| ||x||
/// on the common domain's distinguished boundary.
QuadInequalityReport quad_inequality_check(const CommutingTuple& tuple,
                                           const std::vector<SectorFunction>& F, const Vector& x,
                                           std::uint64_t seed = 1, const FcOptions& options = {});

/// c with c * integral of Psi F1 F2t over Omega_0^d equal to 1, the
/// integral taken on the positive diagonal.
Complex calibrate_resolution(const SectorFunction& Psi, const SectorFunction& F1,
                             const SectorFunction& F2t, const LogGrid& grid = {},
                             double threshold = 1e-12);

struct ReproducingReport {
  Complex calibration{0.0};
  double defect = 0.0;                ///< on the job grid
  std::vector<double> defect_curve;   ///< job grid, then refinements
  std::vector<double> per_decade;
};

/// Quadrature of the integral of f(A) c Psi(tA) F1(tA) F2t(tA) dM(t) against
/// f(A) on the component where every A_k is injective (F2t is the
/// conjugate reflection of F2).
ReproducingReport reproducing_formula_check(const CommutingTuple& tuple, const H01Form& f,
                                            const SectorFunction& Psi, const SectorFunction& F1,
                                            const SectorFunction& F2, const LogGrid& grid = {},
                                            int refinements = 2);

struct SchattenGrowthReport {
  double p = 0.0;
  std::vector<int> n;
  std::vector<double> K;
  std::vector<double> sups;
  std::string expectation;
};

struct SchattenOptions {
  double domain_angle = 0.1;
  EnsembleOptions ensemble;
  int norm_restarts = 4;
  int norm_iterations = 40;
  /// adds z1^q / (z1^q + z2^q) times cut-offs, a smoothed triangular
  /// truncation on the spectrum 2^{-k}
  bool triangular_witness = true;
};

/// Left and right multiplication by c = diag(2^{-k}) on S^p_n; fc constant
/// estimate of the pair for each n of the ladder.
SchattenGrowthReport schatten_growth_experiment(double p, const std::vector<int>& ladder,
                                                std::uint64_t seed = 1,
                                                const SchattenOptions& options = {});

/// The pair (L_c, R_c) on S^p_n.
CommutingTuple schatten_pair(double p, int n);

}  // namespace hfc
