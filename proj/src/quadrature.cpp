#include "hfc/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace hfc {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre needs n >= 1");
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  GaussLegendre rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute the derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    rule.w[i] = w;
    rule.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.x[n / 2] = 0.0;
  cache.emplace(n, rule);
  return rule;
}

ContourQuadrature::ContourQuadrature(double nu, double r_min, double r_max, int nodes_per_decade,
                                     double gap)
    : nu_(nu), r_min_(r_min), r_max_(r_max), nodes_per_decade_(nodes_per_decade) {
  if (!(nu > 0.0 && nu < kPi)) throw InvalidArgument("contour angle must lie in (0, pi)");
  if (!(r_min > 0.0 && r_min < 1.0 && r_max > 1.0))
    throw InvalidArgument("contour range must satisfy 0 < r_min < 1 < r_max");
  if (nodes_per_decade < 4) throw InvalidArgument("contour needs >= 4 nodes per decade");

  if (!(gap > 0.0)) throw InvalidArgument("contour gap must be positive");

  const GaussLegendre gl = gauss_legendre(nodes_per_decade);
  const double u0 = std::log(r_min), u1 = std::log(r_max);
  // The self-test poles at 1 and -1 sit nu and pi - nu away from the rays.
  // A pole at distance g from a panel of half-length L/2 limits n-point
  // Gauss-Legendre to rho^{-2n} with rho = x + sqrt(1 + x^2), x = 2g/L;
  // the panel is sized for rho^{-2n} = 1e-13.
  const double g = std::min({gap, nu, kPi - nu});
  const double rho = std::pow(10.0, 13.0 / (2.0 * nodes_per_decade));
  const double x = 0.5 * (rho - 1.0 / rho);
  const double panel = std::min(std::log(10.0), 2.0 * g / x);
  const int panels = std::max(1, static_cast<int>(std::ceil((u1 - u0) / panel)));
  const double len = (u1 - u0) / panels;

  std::vector<double> r, w;
  for (int p = 0; p < panels; ++p) {
    const double a = u0 + p * len;
    for (int i = 0; i < nodes_per_decade; ++i) {
      r.push_back(std::exp(a + 0.5 * len * (gl.x[i] + 1.0)));
      w.push_back(0.5 * len * gl.w[i]);
    }
  }
  // dz = z d(log r) on either ray; 1/(2 pi i) folded into the weights.
  const Complex factor = 1.0 / (2.0 * kPi * kI);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Complex z = std::polar(r[i], -nu);
    nodes_.push_back(z);
    weights_.push_back(factor * z * w[i]);
  }
  for (std::size_t i = r.size(); i-- > 0;) {
    const Complex z = std::polar(r[i], nu);
    nodes_.push_back(z);
    weights_.push_back(-factor * z * w[i]);
  }

  const Complex got = integrate([](Complex z) { return z / ((1.0 + z) * (1.0 + z)) / (z - 1.0); });
  self_test_error_ = std::abs(got - 0.25);
  if (self_test_error_ > 1e-8)
    throw InvalidArgument("contour rule fails the Cauchy self-test (error " +
                          std::to_string(self_test_error_) + "); widen the radial range");
}

Complex ContourQuadrature::integrate(const std::function<Complex(Complex)>& g) const {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * g(nodes_[i]);
  return acc;
}

int LogGrid::size() const {
  if (!(t_min > 0.0 && t_max > t_min) || per_decade < 1)
    throw InvalidArgument("log grid needs 0 < t_min < t_max and per_decade >= 1");
  return std::max(1, static_cast<int>(std::ceil(std::log10(t_max / t_min) * per_decade - 1e-9)));
}

std::vector<double> LogGrid::nodes() const {
  const int n = size();
  const double u0 = std::log(t_min), h = std::log(t_max / t_min) / n;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::exp(u0 + (i + 0.5) * h);
  return out;
}

std::vector<double> LogGrid::weights() const {
  const int n = size();
  return std::vector<double>(n, std::log(t_max / t_min) / n);
}

LogGrid LogGrid::refined() const { return LogGrid{t_min, t_max, 2 * per_decade}; }

}  // namespace hfc
