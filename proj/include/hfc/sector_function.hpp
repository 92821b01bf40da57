#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hfc/operator_core.hpp"

namespace hfc {

/// Product of open sectors Sigma_{theta_1} x ... x Sigma_{theta_d}.
struct SectorDomain {
  std::vector<double> angles;

  SectorDomain() = default;
  explicit SectorDomain(std::vector<double> a);
  static SectorDomain uniform(int d, double theta);

  int d() const { return static_cast<int>(angles.size()); }
  bool contains(std::span<const Complex> z) const;
  /// Coordinatewise minimum; the shorter domain is padded with pi.
  static SectorDomain intersect(const SectorDomain& a, const SectorDomain& b);
};

/// |f(z)| <= C * prod_{k in active} (|z_k| / (1 + |z_k|)^2)^{s_k}.
/// An empty active set certifies boundedness by C.
struct DecayCertificate {
  Mask active = 0;
  std::vector<double> s;  ///< one exponent per coordinate, 0 when inactive
  double C = 0.0;

  double bound(std::span<const Complex> z) const;
};

namespace ast {

enum class Op { constant, pow, shift_recip, exp, dilate, add, mul, recip };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::constant;
  Complex value{0.0};  ///< constant value, or shift `a` for shift_recip
  double s = 1.0;      ///< exponent of pow
  double t = 1.0;      ///< dilation factor
  int coord = 0;       ///< 0-based coordinate of pow/shift_recip/exp/dilate
  std::vector<NodePtr> args;
};

Complex eval(const Node& node, std::span<const Complex> z);
/// Bit mask of coordinates the subtree depends on.
Mask coordinates(const Node& node);
NodePtr shift_coordinates(const NodePtr& node, int offset);
NodePtr conjugate_reflect(const NodePtr& node);

}  // namespace ast

/// Immutable expression tree for a function holomorphic on a product of
/// sectors, with an optional decay certificate.
class SectorFunction {
 public:
  SectorFunction() = default;
  SectorFunction(ast::NodePtr root, SectorDomain domain,
                 std::optional<DecayCertificate> certificate = std::nullopt);

  // Primitives. `d` is the arity, `k` a 0-based coordinate.
  static SectorFunction constant(int d, Complex c);
  static SectorFunction coordinate_power(int d, int k, double s);
  static SectorFunction shift_recip(int d, int k, Complex a);
  static SectorFunction exp_neg(int d, int k);

  int arity() const { return domain_.d(); }
  const SectorDomain& domain() const { return domain_; }
  const std::optional<DecayCertificate>& certificate() const { return certificate_; }
  const ast::NodePtr& root() const { return root_; }

  /// Checked evaluation: throws DomainViolation outside the open domain.
  Complex operator()(std::span<const Complex> z) const;
  Complex operator()(std::initializer_list<Complex> z) const;
  /// Evaluation without the domain check (closed boundary, contours).
  Complex eval_unchecked(std::span<const Complex> z) const;

  SectorFunction dilate(int k, double t) const;
  SectorFunction scaled(Complex c) const;
  SectorFunction reciprocal() const;
  SectorFunction with_domain(SectorDomain domain) const;
  SectorFunction with_certificate(std::optional<DecayCertificate> cert) const;

  friend SectorFunction operator+(const SectorFunction& a, const SectorFunction& b);
  friend SectorFunction operator*(const SectorFunction& a, const SectorFunction& b);

 private:
  ast::NodePtr root_;
  SectorDomain domain_;
  std::optional<DecayCertificate> certificate_;
};

/// f (x) g: g's coordinates are shifted after f's.
SectorFunction tensor(const SectorFunction& f, const SectorFunction& g);
SectorFunction conjugate_reflect(const SectorFunction& f);

/// m^2 z / ((m + z)(1 + m z)) on Sigma_theta, certified with s = 1.
SectorFunction phi_m(int m, double theta = kPi / 2);
SectorFunction phi_m_tensor(int m, int d, double theta = kPi / 2);
/// (t z)^a e^{-t z} on Sigma_theta (theta <= pi/2), certified with s = a.
SectorFunction power_exp(double a, double theta = kPi / 4, double t = 1.0);
/// rho^{k/4} z^{1/4} / ((rho^k e^{i gamma})^{1/2} - z^{1/2}) on Sigma_mu.
SectorFunction sigma_k(int k, double rho, double gamma, double mu);

struct SupNormGrid {
  double r_min = 1e-6;
  double r_max = 1e6;
  int per_decade = 64;       ///< used for d = 1
  int per_decade_multi = 12; ///< coarse pass for d = 2, a third of it for d >= 3
  int refine_rounds = 3;
};

struct SupNormEstimate {
  double value = 0.0;
  std::vector<Complex> argmax;
  int points = 0;
};

/// Lower bound for sup |f| over the domain, sampled on the distinguished
/// boundary with local refinement around the running maximum.
SupNormEstimate sup_norm_estimate(const SectorFunction& f, const SectorDomain& domain,
                                  const SupNormGrid& grid = {});
/// Same sampling scheme for any nonnegative function of the d coordinates.
SupNormEstimate sup_sampled(const std::function<double(std::span<const Complex>)>& g,
                            const SectorDomain& domain, const SupNormGrid& grid = {});

struct DecaySamples {
  double r_min = 1e-8;
  double r_max = 1e8;
  int per_decade = 8;
  /// Ray angles as fractions of each domain angle; +-1 is the boundary.
  std::vector<double> ray_fractions{-1.0, -0.5, 0.0, 0.5, 1.0};
  double slack = 1e-9;
};

struct DecayReport {
  bool pass = true;
  double worst_ratio = 0.0;  ///< max |f| / (C * profile)
  std::vector<Complex> worst_point;
  int points = 0;
};

DecayReport decay_check(const SectorFunction& f, const DecayCertificate& cert,
                        const DecaySamples& samples = {});

/// Certificate with the given exponents whose constant is the sampled
/// boundary maximum of |f (1+z)^{2s} / z^s| / cos(theta/2)^{2s} (times a
/// safety factor); the resulting bound is then checked with decay_check.
DecayCertificate certify_by_sampling(const SectorFunction& f, Mask active,
                                     std::vector<double> s, double safety = 1.05);

/// H-infinity_{0,1} element: constant plus one certified summand per
/// nonempty active set.
class H01Form {
 public:
  H01Form(int d, Complex constant = 0.0);

  void add_component(Mask active, const SectorFunction& f);
  int d() const { return d_; }
  Complex constant() const { return constant_; }
  const std::map<Mask, SectorFunction>& components() const { return components_; }
  SectorDomain domain() const;

  /// Zero coordinates are allowed: summands active on them vanish.
  Complex eval(std::span<const Complex> z) const;
  /// Sum as a single (uncertified) function.
  SectorFunction total() const;

  H01Form product(const H01Form& other) const;
  H01Form conjugate_reflect() const;

 private:
  int d_;
  Complex constant_;
  std::map<Mask, SectorFunction> components_;
};

}  // namespace hfc
