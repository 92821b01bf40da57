#include "hfc/sector_function.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "hfc/detail/maximize.hpp"

namespace hfc {

SectorDomain::SectorDomain(std::vector<double> a) : angles(std::move(a)) {
  for (double t : angles)
    if (!(t > 0.0 && t <= kPi)) throw InvalidArgument("sector angles must lie in (0, pi]");
}

SectorDomain SectorDomain::uniform(int d, double theta) {
  return SectorDomain(std::vector<double>(d, theta));
}

bool SectorDomain::contains(std::span<const Complex> z) const {
  if (static_cast<int>(z.size()) < d()) return false;
  for (int k = 0; k < d(); ++k) {
    if (z[k] == Complex(0.0)) return false;
    if (!(std::abs(std::arg(z[k])) < angles[k])) return false;
  }
  return true;
}

SectorDomain SectorDomain::intersect(const SectorDomain& a, const SectorDomain& b) {
  const int d = std::max(a.d(), b.d());
  std::vector<double> out(d, kPi);
  for (int k = 0; k < d; ++k) {
    if (k < a.d()) out[k] = std::min(out[k], a.angles[k]);
    if (k < b.d()) out[k] = std::min(out[k], b.angles[k]);
  }
  return SectorDomain(std::move(out));
}

double DecayCertificate::bound(std::span<const Complex> z) const {
  double b = C;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!(active & (Mask{1} << k))) continue;
    const double r = std::abs(z[k]);
    b *= std::pow(r / ((1.0 + r) * (1.0 + r)), s[k]);
  }
  return b;
}

namespace ast {

namespace {

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

}  // namespace

Complex eval(const Node& node, std::span<const Complex> z) {
  switch (node.op) {
    case Op::constant: return node.value;
    case Op::pow: {
      const Complex w = z[node.coord];
      if (node.s == 1.0) return w;
      if (w == Complex(0.0)) return node.s > 0.0 ? Complex(0.0) : Complex(INFINITY);
      return std::exp(node.s * std::log(w));
    }
    case Op::shift_recip: return 1.0 / (node.value + z[node.coord]);
    case Op::exp: return std::exp(-z[node.coord]);
    case Op::dilate: {
      std::array<Complex, 16> buffer;
      std::vector<Complex> heap;
      std::span<Complex> w;
      if (z.size() <= buffer.size()) {
        std::copy(z.begin(), z.end(), buffer.begin());
        w = std::span<Complex>(buffer.data(), z.size());
      } else {
        heap.assign(z.begin(), z.end());
        w = std::span<Complex>(heap);
      }
      // dilations of variables a subtree does not see are no-ops
      if (node.coord >= 0 && static_cast<std::size_t>(node.coord) < w.size()) w[node.coord] *= node.t;
      return eval(*node.args[0], w);
    }
    case Op::add: {
      Complex acc = 0.0;
      for (const auto& a : node.args) acc += eval(*a, z);
      return acc;
    }
    case Op::mul: {
      Complex acc = 1.0;
      for (const auto& a : node.args) acc *= eval(*a, z);
      return acc;
    }
    case Op::recip: return 1.0 / eval(*node.args[0], z);
  }
  return 0.0;
}

Mask coordinates(const Node& node) {
  switch (node.op) {
    case Op::constant: return 0;
    case Op::pow:
    case Op::shift_recip:
    case Op::exp: return Mask{1} << node.coord;
    default: break;
  }
  Mask m = 0;
  for (const auto& a : node.args) m |= coordinates(*a);
  return m;
}

NodePtr shift_coordinates(const NodePtr& node, int offset) {
  Node copy = *node;
  if (copy.op == Op::pow || copy.op == Op::shift_recip || copy.op == Op::exp ||
      copy.op == Op::dilate)
    copy.coord += offset;
  for (auto& a : copy.args) a = shift_coordinates(a, offset);
  return make(std::move(copy));
}

NodePtr conjugate_reflect(const NodePtr& node) {
  Node copy = *node;
  copy.value = std::conj(copy.value);
  for (auto& a : copy.args) a = conjugate_reflect(a);
  return make(std::move(copy));
}

}  // namespace ast

namespace {

using ast::Node;
using ast::NodePtr;
using ast::Op;

NodePtr leaf(Op op, int k, Complex value = 0.0, double s = 1.0) {
  Node n;
  n.op = op;
  n.coord = k;
  n.value = value;
  n.s = s;
  return std::make_shared<const Node>(std::move(n));
}

NodePtr combine(Op op, std::vector<NodePtr> args) {
  Node n;
  n.op = op;
  // Flatten nested sums/products for cheaper evaluation.
  for (auto& a : args) {
    if (a->op == op && (op == Op::add || op == Op::mul)) {
      n.args.insert(n.args.end(), a->args.begin(), a->args.end());
    } else {
      n.args.push_back(std::move(a));
    }
  }
  return std::make_shared<const Node>(std::move(n));
}

DecayCertificate padded(DecayCertificate c, int d) {
  c.s.resize(d, 0.0);
  return c;
}

std::optional<DecayCertificate> cert_product(const std::optional<DecayCertificate>& a,
                                             const std::optional<DecayCertificate>& b, int d) {
  if (!a || !b) return std::nullopt;
  DecayCertificate x = padded(*a, d);
  const DecayCertificate y = padded(*b, d);
  x.active |= y.active;
  for (int k = 0; k < d; ++k) x.s[k] += y.s[k];
  x.C *= y.C;
  return x;
}

std::optional<DecayCertificate> cert_sum(const std::optional<DecayCertificate>& a,
                                         const std::optional<DecayCertificate>& b, int d) {
  if (!a || !b) return std::nullopt;
  DecayCertificate x = padded(*a, d);
  const DecayCertificate y = padded(*b, d);
  x.active &= y.active;
  for (int k = 0; k < d; ++k)
    x.s[k] = (x.active & (Mask{1} << k)) ? std::min(x.s[k], y.s[k]) : 0.0;
  x.C += y.C;
  return x;
}

double boundary_angle(double theta) { return std::min(theta, kPi - 1e-9); }

}  // namespace

SectorFunction::SectorFunction(ast::NodePtr root, SectorDomain domain,
                               std::optional<DecayCertificate> certificate)
    : root_(std::move(root)), domain_(std::move(domain)), certificate_(std::move(certificate)) {
  if (!root_) throw InvalidArgument("null expression tree");
  if (certificate_) certificate_ = padded(*certificate_, domain_.d());
}

SectorFunction SectorFunction::constant(int d, Complex c) {
  return SectorFunction(leaf(Op::constant, 0, c), SectorDomain::uniform(d, kPi),
                        DecayCertificate{0, std::vector<double>(d, 0.0), std::abs(c)});
}

SectorFunction SectorFunction::coordinate_power(int d, int k, double s) {
  if (k < 0 || k >= d) throw InvalidArgument("coordinate out of range");
  return SectorFunction(leaf(Op::pow, k, 0.0, s), SectorDomain::uniform(d, kPi));
}

SectorFunction SectorFunction::shift_recip(int d, int k, Complex a) {
  if (k < 0 || k >= d) throw InvalidArgument("coordinate out of range");
  // (a + z)^{-1} has its pole at -a, which must avoid the sector.
  if (a == Complex(0.0)) throw InvalidArgument("shift_recip needs a nonzero shift");
  const double phi = std::abs(std::arg(-a));
  std::vector<double> angles(d, kPi);
  angles[k] = std::max(1e-12, std::min(kPi, phi));
  SectorDomain dom(angles);
  return SectorFunction(leaf(Op::shift_recip, k, a), std::move(dom));
}

SectorFunction SectorFunction::exp_neg(int d, int k) {
  if (k < 0 || k >= d) throw InvalidArgument("coordinate out of range");
  std::vector<double> angles(d, kPi);
  angles[k] = kPi / 2;
  return SectorFunction(leaf(Op::exp, k), SectorDomain(angles),
                        DecayCertificate{0, std::vector<double>(d, 0.0), 1.0});
}

Complex SectorFunction::operator()(std::span<const Complex> z) const {
  if (static_cast<int>(z.size()) != arity()) throw InvalidArgument("wrong number of arguments");
  if (!domain_.contains(z)) throw DomainViolation("point outside the declared sector domain");
  return ast::eval(*root_, z);
}

Complex SectorFunction::operator()(std::initializer_list<Complex> z) const {
  return (*this)(std::span<const Complex>(z.begin(), z.size()));
}

Complex SectorFunction::eval_unchecked(std::span<const Complex> z) const {
  return ast::eval(*root_, z);
}

SectorFunction SectorFunction::dilate(int k, double t) const {
  if (!(t > 0.0)) throw InvalidArgument("dilation factor must be positive");
  if (k < 0 || k >= arity()) throw InvalidArgument("coordinate out of range");
  Node n;
  n.op = Op::dilate;
  n.coord = k;
  n.t = t;
  n.args = {root_};
  std::optional<DecayCertificate> cert = certificate_;
  if (cert && (cert->active & (Mask{1} << k)))
    cert->C *= std::pow(std::max(t, 1.0 / t), cert->s[k]);
  return SectorFunction(std::make_shared<const Node>(std::move(n)), domain_, cert);
}

SectorFunction SectorFunction::scaled(Complex c) const {
  std::optional<DecayCertificate> cert = certificate_;
  if (cert) cert->C *= std::abs(c);
  return SectorFunction(combine(Op::mul, {leaf(Op::constant, 0, c), root_}), domain_, cert);
}

SectorFunction SectorFunction::reciprocal() const {
  Node n;
  n.op = Op::recip;
  n.args = {root_};
  return SectorFunction(std::make_shared<const Node>(std::move(n)), domain_);
}

SectorFunction SectorFunction::with_domain(SectorDomain domain) const {
  return SectorFunction(root_, std::move(domain), certificate_);
}

SectorFunction SectorFunction::with_certificate(std::optional<DecayCertificate> cert) const {
  return SectorFunction(root_, domain_, std::move(cert));
}

SectorFunction operator+(const SectorFunction& a, const SectorFunction& b) {
  SectorDomain dom = SectorDomain::intersect(a.domain(), b.domain());
  const int d = dom.d();
  return SectorFunction(combine(Op::add, {a.root(), b.root()}), std::move(dom),
                        cert_sum(a.certificate(), b.certificate(), d));
}

SectorFunction operator*(const SectorFunction& a, const SectorFunction& b) {
  SectorDomain dom = SectorDomain::intersect(a.domain(), b.domain());
  const int d = dom.d();
  return SectorFunction(combine(Op::mul, {a.root(), b.root()}), std::move(dom),
                        cert_product(a.certificate(), b.certificate(), d));
}

SectorFunction tensor(const SectorFunction& f, const SectorFunction& g) {
  const int df = f.arity();
  const int dg = g.arity();
  std::vector<double> angles = f.domain().angles;
  angles.insert(angles.end(), g.domain().angles.begin(), g.domain().angles.end());
  std::optional<DecayCertificate> cert;
  if (f.certificate() && g.certificate()) {
    DecayCertificate c;
    c.active = f.certificate()->active | (g.certificate()->active << df);
    c.s = f.certificate()->s;
    c.s.resize(df, 0.0);
    auto gs = g.certificate()->s;
    gs.resize(dg, 0.0);
    c.s.insert(c.s.end(), gs.begin(), gs.end());
    c.C = f.certificate()->C * g.certificate()->C;
    cert = c;
  }
  return SectorFunction(combine(Op::mul, {f.root(), ast::shift_coordinates(g.root(), df)}),
                        SectorDomain(std::move(angles)), cert);
}

SectorFunction conjugate_reflect(const SectorFunction& f) {
  return SectorFunction(ast::conjugate_reflect(f.root()), f.domain(), f.certificate());
}

SectorFunction phi_m(int m, double theta) {
  if (m < 1) throw InvalidArgument("phi_m needs m >= 1");
  if (!(theta > 0.0 && theta < kPi)) throw InvalidArgument("phi_m angle must lie in (0, pi)");
  const double md = m;
  auto root = combine(Op::mul, {leaf(Op::constant, 0, md), leaf(Op::pow, 0, 0.0, 1.0),
                                leaf(Op::shift_recip, 0, md), leaf(Op::shift_recip, 0, 1.0 / md)});
  // |m + z| >= cos(theta/2)(m + |z|), |1 + m z| >= cos(theta/2)(1 + m|z|) and
  // (m + r)(1 + m r) >= m (1 + r)^2.
  const double c = std::cos(theta / 2);
  return SectorFunction(root, SectorDomain({theta}), DecayCertificate{1, {1.0}, md / (c * c)});
}

SectorFunction phi_m_tensor(int m, int d, double theta) {
  if (d < 1) throw InvalidArgument("phi_m_tensor needs d >= 1");
  SectorFunction f = phi_m(m, theta);
  for (int k = 1; k < d; ++k) f = tensor(f, phi_m(m, theta));
  return f;
}

SectorFunction power_exp(double a, double theta, double t) {
  if (!(a > 0.0)) throw InvalidArgument("power_exp exponent must be positive");
  if (!(theta > 0.0 && theta <= kPi / 2)) throw InvalidArgument("power_exp needs theta <= pi/2");
  auto body = combine(Op::mul, {leaf(Op::pow, 0, 0.0, a), leaf(Op::exp, 0)});
  std::optional<DecayCertificate> cert;
  if (theta < kPi / 2) {
    // sup_r (1 + r)^{2a} e^{-r cos(theta)}
    const double c = std::cos(theta);
    const double r = 2 * a / c - 1.0;
    const double C = r > 0.0 ? std::pow(2 * a / c, 2 * a) * std::exp(-(2 * a - c)) : 1.0;
    cert = DecayCertificate{1, {a}, C};
  }
  SectorFunction f(body, SectorDomain({theta}), cert);
  return t == 1.0 ? f : f.dilate(0, t);
}

SectorFunction sigma_k(int k, double rho, double gamma, double mu) {
  if (!(rho > 1.0)) throw InvalidArgument("sigma_k needs rho > 1");
  if (!(gamma > 0.0 && gamma < kPi)) throw InvalidArgument("sigma_k needs gamma in (0, pi)");
  if (!(mu > 0.0 && mu < gamma)) throw InvalidArgument("sigma_k needs 0 < mu < gamma");
  const Complex c = std::polar(std::pow(rho, k / 2.0), gamma / 2);
  auto denom = combine(Op::add, {leaf(Op::constant, 0, c),
                                 combine(Op::mul, {leaf(Op::constant, 0, -1.0),
                                                   leaf(Op::pow, 0, 0.0, 0.5)})});
  Node recip;
  recip.op = Op::recip;
  recip.args = {denom};
  auto root = combine(Op::mul, {leaf(Op::constant, 0, std::pow(rho, k / 4.0)),
                                leaf(Op::pow, 0, 0.0, 0.25),
                                std::make_shared<const Node>(std::move(recip))});
  SectorFunction f(root, SectorDomain({mu}));
  return f.with_certificate(certify_by_sampling(f, 1, {0.25}));
}

namespace {

/// Boundary points r e^{+-i theta} for one coordinate.
std::vector<Complex> boundary_points(double theta, double r_min, double r_max, int per_decade) {
  const double a = boundary_angle(theta);
  const double u0 = std::log10(r_min), u1 = std::log10(r_max);
  const int steps = std::max(1, static_cast<int>(std::ceil((u1 - u0) * per_decade)));
  std::vector<Complex> pts;
  pts.reserve(2 * (steps + 1));
  for (double sign : {1.0, -1.0})
    for (int i = 0; i <= steps; ++i)
      pts.push_back(std::polar(std::pow(10.0, u0 + (u1 - u0) * i / steps), sign * a));
  return pts;
}

template <class F>
void for_each_product(const std::vector<std::vector<Complex>>& axes, F&& f) {
  const int d = static_cast<int>(axes.size());
  std::vector<std::size_t> idx(d, 0);
  std::vector<Complex> z(d);
  for (int k = 0; k < d; ++k) z[k] = axes[k][0];
  while (true) {
    f(std::span<const Complex>(z));
    int k = d - 1;
    while (k >= 0) {
      if (++idx[k] < axes[k].size()) {
        z[k] = axes[k][idx[k]];
        break;
      }
      idx[k] = 0;
      z[k] = axes[k][0];
      --k;
    }
    if (k < 0) break;
  }
}

}  // namespace

SupNormEstimate sup_sampled(const std::function<double(std::span<const Complex>)>& g,
                            const SectorDomain& domain, const SupNormGrid& grid) {
  const int d = domain.d();
  const int per_decade = d == 1   ? grid.per_decade
                         : d == 2 ? grid.per_decade_multi
                                  : std::max(2, grid.per_decade_multi / 3);

  std::vector<std::vector<Complex>> axes;
  for (int k = 0; k < d; ++k)
    axes.push_back(boundary_points(domain.angles[k], grid.r_min, grid.r_max, per_decade));

  SupNormEstimate best;
  best.argmax.assign(d, Complex(1.0));
  best.value = -1.0;
  for_each_product(axes, [&](std::span<const Complex> z) {
    const double v = g(z);
    ++best.points;
    if (v > best.value) {
      best.value = v;
      best.argmax.assign(z.begin(), z.end());
    }
  });

  // Coordinatewise zoom around the running maximum, staying on its ray.
  const double decades = std::log10(grid.r_max / grid.r_min);
  const double step = decades / std::max(1.0, std::ceil(decades * per_decade));
  const double u_lo = std::log10(grid.r_min), u_hi = std::log10(grid.r_max);
  for (int round = 0; round < grid.refine_rounds; ++round) {
    const double half = step / std::pow(4.0, round);
    for (int k = 0; k < d; ++k) {
      const std::vector<Complex> z = best.argmax;
      const double u0 = std::log10(std::abs(z[k]));
      const double ang = std::arg(z[k]);
      std::vector<Complex> w = z;
      for (int i = 0; i <= 8; ++i) {
        const double u = std::clamp(u0 - half + 2 * half * i / 8.0, u_lo, u_hi);
        w[k] = std::polar(std::pow(10.0, u), ang);
        const double v = g(w);
        ++best.points;
        if (v > best.value) {
          best.value = v;
          best.argmax = w;
        }
      }
    }
  }
  if (best.value < 0.0) best.value = 0.0;
  return best;
}

SupNormEstimate sup_norm_estimate(const SectorFunction& f, const SectorDomain& domain,
                                  const SupNormGrid& grid) {
  if (domain.d() != f.arity()) throw InvalidArgument("domain arity does not match the function");
  return sup_sampled([&](std::span<const Complex> z) { return std::abs(f.eval_unchecked(z)); },
                     domain, grid);
}

DecayReport decay_check(const SectorFunction& f, const DecayCertificate& cert,
                        const DecaySamples& samples) {
  const int d = f.arity();
  int per_decade = samples.per_decade;
  if (d >= 3) per_decade = std::min(per_decade, 2);
  std::vector<std::vector<Complex>> axes(d);
  const double u0 = std::log10(samples.r_min), u1 = std::log10(samples.r_max);
  const int steps = std::max(1, static_cast<int>(std::ceil((u1 - u0) * per_decade)));
  for (int k = 0; k < d; ++k) {
    std::vector<double> rays;
    for (double frac : samples.ray_fractions) {
      const double a = std::clamp(frac, -1.0, 1.0) * boundary_angle(f.domain().angles[k]);
      if (std::find(rays.begin(), rays.end(), a) == rays.end()) rays.push_back(a);
    }
    for (double a : rays)
      for (int i = 0; i <= steps; ++i)
        axes[k].push_back(std::polar(std::pow(10.0, u0 + (u1 - u0) * i / steps), a));
  }
  const DecayCertificate c = padded(cert, d);
  DecayReport report;
  for_each_product(axes, [&](std::span<const Complex> z) {
    const double v = std::abs(f.eval_unchecked(z));
    const double b = c.bound(z);
    ++report.points;
    const double ratio = b > 0.0 ? v / b : (v > 0.0 ? INFINITY : 0.0);
    if (ratio > report.worst_ratio || report.worst_point.empty()) {
      report.worst_ratio = std::max(report.worst_ratio, ratio);
      report.worst_point.assign(z.begin(), z.end());
    }
  });
  report.pass = report.worst_ratio <= 1.0 + samples.slack;
  return report;
}

DecayCertificate certify_by_sampling(const SectorFunction& f, Mask active, std::vector<double> s,
                                     double safety) {
  const int d = f.arity();
  s.resize(d, 0.0);
  SupNormGrid grid;
  grid.r_min = 1e-12;
  grid.r_max = 1e12;
  grid.per_decade = 32;
  grid.per_decade_multi = 4;
  // g = f * prod ((1+z)^2 / z)^{s} is holomorphic and bounded, so its sup
  // sits on the distinguished boundary.
  SupNormEstimate est;
  {
    std::vector<std::vector<Complex>> axes;
    for (int k = 0; k < d; ++k)
      axes.push_back(boundary_points(f.domain().angles[k], grid.r_min, grid.r_max,
                                     d == 1 ? grid.per_decade : grid.per_decade_multi));
    est.value = 0.0;
    for_each_product(axes, [&](std::span<const Complex> z) {
      double v = std::abs(f.eval_unchecked(z));
      for (int k = 0; k < d; ++k) {
        if (!(active & (Mask{1} << k))) continue;
        const double r = std::abs(z[k]);
        v *= std::pow(std::abs(1.0 + z[k]) * std::abs(1.0 + z[k]) / r, s[k]);
      }
      est.value = std::max(est.value, v);
    });
  }
  double C = est.value * safety;
  for (int k = 0; k < d; ++k) {
    if (!(active & (Mask{1} << k))) continue;
    const double c = std::cos(std::min(f.domain().angles[k], kPi - 1e-9) / 2);
    C /= std::pow(c * c, s[k]);
  }
  return DecayCertificate{active, s, C};
}

H01Form::H01Form(int d, Complex constant) : d_(d), constant_(constant) {
  if (d < 1) throw InvalidArgument("H01Form needs d >= 1");
}

void H01Form::add_component(Mask active, const SectorFunction& f) {
  if (active == 0 || active >= (Mask{1} << d_))
    throw InvalidArgument("component mask must be a nonempty subset of {1..d}");
  if (f.arity() > d_) throw InvalidArgument("component arity exceeds d");
  if (!f.certificate() || f.certificate()->active != active)
    throw InvalidArgument("component needs a decay certificate on exactly its active set");
  if ((ast::coordinates(*f.root()) & ~active) != 0)
    throw InvalidArgument("component depends on variables outside its active set");
  SectorFunction g = f;
  if (f.arity() < d_) {
    std::vector<double> angles = f.domain().angles;
    angles.resize(d_, kPi);
    g = SectorFunction(f.root(), SectorDomain(angles), f.certificate());
  }
  auto it = components_.find(active);
  if (it == components_.end()) {
    components_.emplace(active, g);
  } else {
    it->second = it->second + g;
  }
}

SectorDomain H01Form::domain() const {
  SectorDomain dom = SectorDomain::uniform(d_, kPi);
  for (const auto& [mask, f] : components_) dom = SectorDomain::intersect(dom, f.domain());
  return dom;
}

Complex H01Form::eval(std::span<const Complex> z) const {
  Complex acc = constant_;
  for (const auto& [mask, f] : components_) {
    bool vanishes = false;
    for (int k = 0; k < d_; ++k)
      if ((mask & (Mask{1} << k)) && z[k] == Complex(0.0)) vanishes = true;
    if (!vanishes) acc += f(z);
  }
  return acc;
}

SectorFunction H01Form::total() const {
  SectorFunction acc = SectorFunction::constant(d_, constant_);
  for (const auto& [mask, f] : components_) acc = acc + f;
  return acc;
}

H01Form H01Form::product(const H01Form& other) const {
  if (other.d_ != d_) throw InvalidArgument("H01Form arity mismatch");
  H01Form out(d_, constant_ * other.constant_);
  for (const auto& [mask, f] : components_)
    if (other.constant_ != Complex(0.0)) out.add_component(mask, f.scaled(other.constant_));
  for (const auto& [mask, g] : other.components_)
    if (constant_ != Complex(0.0)) out.add_component(mask, g.scaled(constant_));
  for (const auto& [ma, f] : components_)
    for (const auto& [mb, g] : other.components_) out.add_component(ma | mb, f * g);
  return out;
}

H01Form H01Form::conjugate_reflect() const {
  H01Form out(d_, std::conj(constant_));
  for (const auto& [mask, f] : components_) out.add_component(mask, hfc::conjugate_reflect(f));
  return out;
}

}  // namespace hfc
