#pragma once

#include <functional>
#include <vector>

#include "hfc/operator_core.hpp"

namespace hfc {

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

GaussLegendre gauss_legendre(int n);

/// Composite Gauss-Legendre rule in log r on the boundary of Sigma_nu, lower
/// ray traversed outward and upper ray inward, so that
/// sum_i weights[i] g(nodes[i]) approximates (2 pi i)^{-1} times the contour
/// integral of g with the spectrum inside. Panels hold `nodes_per_decade`
/// nodes and span one decade, or less when singularities sit within `gap`
/// (in angle) of the rays.
class ContourQuadrature {
 public:
  ContourQuadrature(double nu, double r_min, double r_max, int nodes_per_decade = 16,
                    double gap = kPi);

  double nu() const { return nu_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  int nodes_per_decade() const { return nodes_per_decade_; }
  const std::vector<Complex>& nodes() const { return nodes_; }
  const std::vector<Complex>& weights() const { return weights_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  Complex integrate(const std::function<Complex(Complex)>& g) const;
  /// |rule applied to phi_1(z)/(z-1) - 1/4|; checked at construction.
  double cauchy_self_test_error() const { return self_test_error_; }

 private:
  double nu_, r_min_, r_max_;
  int nodes_per_decade_;
  std::vector<Complex> nodes_, weights_;
  double self_test_error_ = 0.0;
};

/// Midpoint rule in log t on [t_min, t_max]: weights approximate dt/t.
struct LogGrid {
  double t_min = 1e-8;
  double t_max = 1e8;
  int per_decade = 32;

  std::vector<double> nodes() const;
  std::vector<double> weights() const;
  int size() const;
  /// Same range, twice the density.
  LogGrid refined() const;
};

}  // namespace hfc
