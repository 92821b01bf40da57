#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "hfc/operator_core.hpp"

namespace hfc {

/// Candidate triple (Delta_i, psi_i, psi~_i), i = 1..N, given pointwise.
struct UnitTriple {
  int N = 0;
  std::function<Complex(int, Complex)> delta;
  std::function<Complex(int, Complex)> psi;
  std::function<Complex(int, Complex)> psi_tilde;
};

/// Dyadic surrogate: psi_i = psi~_i = w^{1/2}/(1+w) with w = 2^{i-N/2} z, and
/// Delta_i = psi_i / H where H(z) = sum over all j in Z of (2^j z)^{3/2}/(1+2^j z)^3.
/// H is 1-periodic in log2|z| and is checked to stay away from 0 on Sigma_mu.
UnitTriple dyadic_unit_surrogate(int N, double mu);

/// The log-periodic normaliser H of the surrogate.
Complex dyadic_normaliser(Complex z);

struct UnitDecompositionGrid {
  double r_min = std::pow(2.0, -8);  ///< range on which the defect is measured
  double r_max = std::pow(2.0, 8);
  int per_octave = 16;
  int rays = 5;  ///< rays per half sector, boundary included
  /// radial range and density of the ray integrals of property (2)
  double integral_r_min = 1e-30;
  double integral_r_max = 1e30;
  int integral_per_decade = 32;
};

struct UnitDecompositionReport {
  double C = 0.0;       ///< max of sum |psi_i|, sum |psi~_i| and |Delta_i|
  double sum_psi = 0.0;
  double sum_psi_tilde = 0.0;
  double delta_sup = 0.0;
  double K = 0.0;       ///< max over i of the ray integrals of |Delta_i| |dz/z|
  std::vector<double> ray_integrals;  ///< one per i
  double defect = 0.0;  ///< max |1 - sum Delta_i psi_i psi~_i|
  int points = 0;
};

/// Checks the three unit-decomposition properties on samples of Sigma_mu
/// (closed, ray fractions of mu) and on the boundary of Sigma_nu.
UnitDecompositionReport unit_decomposition_check(const UnitTriple& triple, double mu, double nu,
                                                 const UnitDecompositionGrid& grid = {});

/// Integral of |g(z)| |dz/z| over both rays of the boundary of Sigma_nu,
/// midpoint rule in log r.
double ray_integral(const std::function<Complex(Complex)>& g, double nu, double r_min,
                    double r_max, int per_decade);

}  // namespace hfc
