#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hfc/contour_calculus.hpp"

namespace hfc {

/// Uniform grid on [-S, S]^d with step h; S/h must be an integer.
struct LineGrid {
  int d = 1;
  double h = 1e-2;
  double S = 30.0;

  /// Number of nodes per coordinate on [0, S].
  int half_nodes() const;
  void validate() const;
  LineGrid refined() const { return LineGrid{d, h / 2, S}; }
};

/// Grid h = 1e-2 and S = 30, with S stretched to 15/sigma when the smallest
/// real part sigma of the spectrum is below 1/2.
LineGrid default_line_grid(const CommutingTuple& tuple);

/// Dilation of a diagonalizable tuple on the grid: J x samples
/// phi_x(s) = prod_k A_k^{1/2} e^{-s_k A_k} x on the positive orthant,
/// Q = 2^d times the adjoint of the same map built from the adjoint tuple,
/// and the groups act by index shifts with zero fill.
struct DilationSystem {
  LineGrid grid;
  JointSpectrum spectrum;
  SpaceModel space;
  int d = 1;
  double norm_J = 0.0;
  double norm_Q = 0.0;
  /// Eigen-columns where every coordinate is nonzero (the restricted space).
  std::vector<bool> full;
};

DilationSystem build_dilation(const CommutingTuple& tuple, const LineGrid& grid);

/// Q U_t J on the restricted space, in closed form per joint eigenvalue:
/// 2h lambda e^{-t lambda} sum_{m=0}^{(S-t)/h} e^{-2 m h lambda} per coordinate.
Matrix dilated_semigroup(const DilationSystem& system, const std::vector<double>& t);

/// T_t = prod_k e^{-t_k A_k} on the restricted space.
Matrix semigroup(const DilationSystem& system, const std::vector<double>& t);

/// ||T_t - Q U_t J|| on the restricted space.
double verify_factorization(const DilationSystem& system, const std::vector<double>& t);

struct DenseDilation {
  Matrix J;  ///< node blocks i = -M..M stacked, zero for i < 0
  Matrix Q;
  int M = 0;
};

/// Explicit J and Q for d = 1 (at most 20001 nodes).
DenseDilation dense_dilation(const CommutingTuple& tuple, const LineGrid& grid);

/// Explicit J, Q and U_t for d = 1 on small grids (at most 20001 nodes);
/// returns Q U_t J. Used to cross-check the closed form.
Matrix dense_dilated_semigroup(const CommutingTuple& tuple, const LineGrid& grid, double t);

struct DilationRecord {
  double h = 0.0;
  double S = 0.0;
  std::vector<double> t;
  double defect = 0.0;
};

/// Defects along h-halving with S fixed, then S-doubling with h fixed.
std::vector<DilationRecord> dilation_refinement_curve(const CommutingTuple& tuple, const LineGrid& grid,
                                                      const std::vector<double>& t, int steps = 2);

/// d commuting invertible matrices: the groups at unit step.
struct GroupTuple {
  std::vector<Matrix> U;
  SpaceModel space;
};

/// max over k and |m| <= M of ||(U^k)^m||.
double group_power_bound(const GroupTuple& group, int M);
/// Zero-padded shifts are contractions and the circulant ones isometries.
inline double shift_power_bound() { return 1.0; }

/// Kernel on the offsets {-R, ..., R}^d (row-major, last coordinate
/// fastest), sampled at step h.
struct SampledKernel {
  int d = 1;
  int R = 0;
  double h = 1.0;
  std::vector<Complex> values;

  Complex at(std::span<const int> m) const;
  void validate() const;
  /// sum_m h^d b(m) e^{-i xi.m h}.
  Complex symbol(std::span<const double> xi) const;
};

enum class MultiplierMode { circulant, zero_padded };

struct MultiplierReport {
  MultiplierMode mode = MultiplierMode::circulant;
  int N = 0;
  double operator_norm = 0.0;
  double symbol_sup = 0.0;
  double relative_gap = 0.0;  ///< (symbol - operator) / symbol
};

/// Norm of sum_m h^d b(m) U_{mh} on C^{N^d} (euclidean payload) by explicit
/// SVD, against the sup of the symbol: on the DFT frequencies in circulant
/// mode, on an oversampled and refined frequency grid when zero-padded.
MultiplierReport multiplier_norm(const SampledKernel& b, int N, MultiplierMode mode);

/// Same comparison for a group tuple: ||sum_m b(m) prod_k U_k^{m_k}|| against
/// the sup over [-pi, pi]^d of sum_m b(m) e^{-i xi.m} (h is ignored).
MultiplierReport group_multiplier_norm(const SampledKernel& b, const GroupTuple& group);

struct TransferReport {
  double norm_fA = 0.0;
  double norm_fB = 0.0;
  double norm_J = 0.0;
  double norm_Q = 0.0;
  double defect = 0.0;
  double slack = 0.0;   ///< bound - norm_fA
  bool holds = false;
};

/// ||f(A)|| <= ||Q|| ||J|| ||f(B)|| + defect ||f(B)||, where B generates the
/// shift groups so that ||f(B)|| is the sup of |f| over the imaginary axes.
TransferReport transfer_fc(const H01Form& f, const CommutingTuple& tuple, const DilationSystem& system,
                           const std::vector<std::vector<double>>& times = {{}},
                           const FcOptions& options = {});

/// Riemann sum of beta(t) prod_k e^{-z_k t_k} over the grid t = m h, m >= 0;
/// `beta` holds (M+1)^d samples, last coordinate fastest.
Complex laplace_transform(const std::vector<Complex>& beta, int d, double h, std::span<const Complex> z);

/// eps I + B (I + eps B)^{-1}.
Matrix yosida_regularize(const Matrix& B, double eps);

/// Principal -log of each unit-step matrix.
std::vector<Matrix> group_generators(const GroupTuple& group);

/// N x N cyclic forward shift (odd N keeps -1 out of its spectrum).
Matrix cyclic_shift(int N);

struct GroupEquivalenceReport {
  double K_multiplier = 0.0;
  double K_fc = 0.0;
  double ratio = 0.0;
  double power_bound = 0.0;
  double angle = 0.0;
  std::vector<double> kernel_ratios;
};

GroupEquivalenceReport group_calculus_equivalence_check(const GroupTuple& group,
                                                        const std::vector<SampledKernel>& kernels,
                                                        const EnsembleOptions& ensemble,
                                                        double angle_margin = 0.1, int power_range = 16,
                                                        const FcOptions& options = {});

/// Deltas, decaying exponentials and seeded random kernels on {-R..R}^d.
std::vector<SampledKernel> kernel_family(int d, int R, int count, std::uint64_t seed);

}  // namespace hfc
