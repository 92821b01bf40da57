#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfc/operator_core.hpp"

namespace hfc {

struct VectorFamily {
  SpaceModel space;
  std::vector<Vector> vectors;
};

enum class AverageMode { automatic, exact, montecarlo };

struct MonteCarloOptions {
  int samples = 4096;
  int batches = 16;
  std::uint64_t seed = 1;
};

/// L^2 average with a 95% batch-means interval; exact modes report a
/// degenerate interval.
struct AverageEstimate {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string mode;
  std::uint64_t seed = 0;
  int samples = 0;
};

/// (E || sum eps_j x_j ||^2)^{1/2}. Exact enumeration for up to 20 vectors
/// (automatic picks it then), Monte Carlo otherwise.
AverageEstimate rademacher_average(const VectorFamily& family, AverageMode mode = AverageMode::automatic,
                                   const MonteCarloOptions& mc = {});

/// (E || sum g_j x_j ||^2)^{1/2} over complex standard Gaussians (E|g|^2 = 1).
/// Exact on Hilbert models (automatic picks it there), Monte Carlo otherwise.
AverageEstimate gaussian_average(const VectorFamily& family, AverageMode mode = AverageMode::automatic,
                                 const MonteCarloOptions& mc = {});

/// Gaussian average of a centred complex Gaussian vector with covariance K
/// (the law of sum g_j x_j depends on the family only through sum x_j x_j^*).
AverageEstimate gaussian_average_covariance(const Matrix& K, const SpaceModel& space,
                                            AverageMode mode = AverageMode::automatic,
                                            const MonteCarloOptions& mc = {});

struct RBoundEstimate {
  double estimate = 0.0;
  std::vector<int> indices;    ///< operators of the witnessing probe
  std::vector<Vector> vectors; ///< vectors of the witnessing probe
};

/// Lower bound for the R-bound of a finite family: singleton probes at each
/// operator's norm witness plus `probe_budget` random probes of size <= 8,
/// all with exact Rademacher averages.
RBoundEstimate r_bound_estimate(const std::vector<Matrix>& operators, const SpaceModel& space,
                                int probe_budget = 64, std::uint64_t seed = 1);

struct RSectorialityOptions {
  double r_min = 1e-4;
  double r_max = 1e4;
  int per_decade = 4;
  int probe_budget = 32;
  std::uint64_t seed = 1;
};

struct RSectorialityProfile {
  std::vector<double> angles;
  std::vector<double> constants;
  std::vector<int> family_sizes;
};

/// R-bound estimates of {z R(z,A)} sampled on the boundary rays of each
/// ladder sector and of every larger one, with the per-ray maximisers of
/// ||z R(z,A)|| included.
RSectorialityProfile r_sectoriality_profile(const Matrix& A, const SpaceModel& space,
                                            std::vector<double> angles,
                                            const RSectorialityOptions& options = {});

/// Finite-rank map from a weighted grid space into a model space. Column j
/// is sqrt(weight_j) times the value at grid index j, i.e. the coordinates
/// against an orthonormal basis of the weighted grid space.
struct GammaElement {
  SpaceModel space;
  Matrix columns;  ///< vector_dim x grid size
};

GammaElement make_gamma_element(const SpaceModel& space, const Matrix& values,
                                const std::vector<double>& weights);

AverageEstimate gamma_norm(const GammaElement& u, AverageMode mode = AverageMode::automatic,
                           const MonteCarloOptions& mc = {});

/// u composed with S^T on the grid index.
GammaElement tensor_extend(const Matrix& S, const GammaElement& u);

struct IteratedGammaReport {
  AverageEstimate iterated;
  AverageEstimate flat;
  double ratio = 0.0;
  double ratio_low = 0.0;
  double ratio_high = 0.0;
};

/// `tensor[i]` holds the vectors x_{i,j} as columns (vector_dim x m2). The
/// iterated norm averages the inner gamma norm of sum_i g_i x_{i,.} over
/// outer Gaussians; the flat norm is the gamma norm over the product index.
IteratedGammaReport iterated_gamma_compare(const std::vector<Matrix>& tensor,
                                           const SpaceModel& space,
                                           AverageMode mode = AverageMode::automatic,
                                           const MonteCarloOptions& mc = {});

}  // namespace hfc
