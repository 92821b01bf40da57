#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hfc/errors.hpp"

namespace hfc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Subsets of {1,...,d} are stored as bit masks; bit k-1 marks coordinate k.
using Mask = std::uint32_t;

/// Finite-dimensional normed space. Vectors of a `schatten` model are the
/// column-major vectorisation of a dim x dim matrix.
struct SpaceModel {
  enum class Kind { euclidean, lp, schatten };

  Kind kind = Kind::euclidean;
  double p = 2.0;
  int dim = 1;

  static SpaceModel euclidean(int dim);
  static SpaceModel lp(double p, int dim);
  static SpaceModel schatten(double p, int dim);

  /// Length of the coordinate vectors (dim, or dim^2 for schatten).
  int vector_dim() const;
  double norm(const Vector& x) const;
  /// Norming functional of x: an element y of the dual model with
  /// <x, y> = sum x_i conj(y_i) = norm(x) and dual norm(y) = 1.
  Vector norming_functional(const Vector& x) const;
  /// Dual model (p -> p', euclidean self-dual).
  SpaceModel dual() const;
  bool is_hilbert() const;

  bool operator==(const SpaceModel&) const = default;
};

std::string to_string(SpaceModel::Kind kind);
double conjugate_exponent(double p);

/// Throws InvalidArgument unless A is square, non-empty and finite.
void check_matrix(const Matrix& A, const char* what = "matrix");

/// Max over pairs of ||A_k A_k' - A_k' A_k|| / (||A_k|| ||A_k'||), 0/0 := 0.
double commutation_defect(std::span<const Matrix> operators);

/// A d-tuple of commuting square matrices acting on a space model.
class CommutingTuple {
 public:
  CommutingTuple(std::vector<Matrix> operators, SpaceModel space,
                 double tolerance = 1e-10);

  int d() const { return static_cast<int>(operators_.size()); }
  int n() const { return static_cast<int>(operators_.front().rows()); }
  const Matrix& op(int k) const { return operators_.at(k); }
  const std::vector<Matrix>& operators() const { return operators_; }
  const SpaceModel& space() const { return space_; }
  double tolerance() const { return tolerance_; }

 private:
  std::vector<Matrix> operators_;
  SpaceModel space_;
  double tolerance_;
};

double commutation_defect(const CommutingTuple& tuple);

/// (zI - A)^{-1}. Throws SingularResolvent when the condition number of
/// zI - A exceeds `cond_ceiling`.
Matrix resolvent(const Matrix& A, Complex z, double cond_ceiling = 1e13);

/// Largest |arg(lambda)| over the nonzero eigenvalues of A.
double spectral_angle(const Matrix& A);

struct NormOptions {
  int restarts = 32;
  int max_iterations = 200;
  double tolerance = 1e-13;
  std::uint64_t seed = 0x5eed;
  std::vector<Vector> warm_starts;
};

struct NormEstimate {
  double value = 0.0;
  Vector witness;  ///< unit vector attaining `value`
};

/// Operator norm on the space model. Exact (largest singular value) on
/// euclidean models and lp with p in {1, inf}; otherwise a seeded
/// multi-start dual power iteration, i.e. a lower bound.
NormEstimate operator_norm(const Matrix& A, const SpaceModel& space,
                           const NormOptions& options = {});

struct ProfileOptions {
  double r_min = 1e-6;
  double r_max = 1e6;
  int per_decade = 64;
  int refine_rounds = 3;
  double type_threshold = 1e4;
  NormOptions norm;
};

struct SectorialProfile {
  std::vector<double> angles;
  std::vector<double> constants;
  std::optional<double> inferred_type;
};

/// Sampled sup of ||z R(z,A)|| over the boundary rays of each sector in
/// `angles`; a point on the boundary of a larger sector lies outside every
/// smaller one, so each constant is the max over its own and all larger
/// rays.
SectorialProfile sectorial_profile(const Matrix& A, const SpaceModel& space,
                                   std::vector<double> angles,
                                   const ProfileOptions& options = {});

/// Joint eigenbasis S (columns) and per-column eigenvalue d-tuples.
struct JointSpectrum {
  Matrix basis;
  Matrix basis_inverse;
  std::vector<std::vector<Complex>> eigenvalues;  ///< [column][k]
};

JointSpectrum joint_spectral_decompose(const CommutingTuple& tuple,
                                       std::uint64_t seed = 0x1a5e);

/// Sets eigenvalues below kZeroEigenvalueThreshold times the coordinate's
/// largest modulus to exactly 0, so kernel components stay exact.
void snap_zero_eigenvalues(JointSpectrum& js);

/// Principal square root. Throws BranchCutViolation when an eigenvalue lies
/// on (-inf, 0].
Matrix fractional_sqrt(const Matrix& A);

/// Projections onto X_Lambda, one per subset mask of {1..d}.
struct ErgodicSplit {
  int d = 0;
  std::map<Mask, Matrix> projections;
  const Matrix& projection(Mask mask) const { return projections.at(mask); }
};

inline constexpr double kZeroEigenvalueThreshold = 1e-10;

ErgodicSplit ergodic_split(const CommutingTuple& tuple);
ErgodicSplit ergodic_split(const CommutingTuple& tuple, const JointSpectrum& js);

/// Conjugate transposes on the dual model.
CommutingTuple adjoint_tuple(const CommutingTuple& tuple);

/// Norm of a vector of the model equivalent to the euclidean one:
/// ||T||_space <= factor * ||T||_2.
double euclidean_equivalence_factor(const SpaceModel& space);

}  // namespace hfc
