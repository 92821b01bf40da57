#include "hfc/detail/separable.hpp"

namespace hfc::detail {

namespace {

using ast::Node;
using ast::NodePtr;
using ast::Op;

NodePtr wrap(Op op, std::vector<NodePtr> args, int coord = 0, double t = 1.0) {
  Node n;
  n.op = op;
  n.args = std::move(args);
  n.coord = coord;
  n.t = t;
  return std::make_shared<const Node>(std::move(n));
}

NodePtr to_coordinate_zero(const NodePtr& node, int k) { return ast::shift_coordinates(node, -k); }

using Terms = std::vector<SeparableTerm>;

std::optional<Terms> expand(const NodePtr& node, std::size_t cap) {
  switch (node->op) {
    case Op::constant: return Terms{{node->value, {}}};
    case Op::pow:
    case Op::shift_recip:
    case Op::exp: {
      SeparableTerm t;
      t.factors[node->coord] = to_coordinate_zero(node, node->coord);
      return Terms{t};
    }
    case Op::dilate: {
      auto inner = expand(node->args[0], cap);
      if (!inner) return std::nullopt;
      for (auto& t : *inner) {
        auto it = t.factors.find(node->coord);
        if (it != t.factors.end()) it->second = wrap(Op::dilate, {it->second}, 0, node->t);
      }
      return inner;
    }
    case Op::add: {
      Terms out;
      for (const auto& a : node->args) {
        auto part = expand(a, cap);
        if (!part) return std::nullopt;
        out.insert(out.end(), part->begin(), part->end());
        if (out.size() > cap) return std::nullopt;
      }
      return out;
    }
    case Op::mul: {
      Terms acc{{1.0, {}}};
      for (const auto& a : node->args) {
        auto part = expand(a, cap);
        if (!part) return std::nullopt;
        if (acc.size() * part->size() > cap) return std::nullopt;
        Terms next;
        next.reserve(acc.size() * part->size());
        for (const auto& x : acc) {
          for (const auto& y : *part) {
            SeparableTerm t = x;
            t.coef *= y.coef;
            for (const auto& [k, g] : y.factors) {
              auto it = t.factors.find(k);
              if (it == t.factors.end())
                t.factors.emplace(k, g);
              else
                it->second = wrap(Op::mul, {it->second, g});
            }
            next.push_back(std::move(t));
          }
        }
        acc = std::move(next);
      }
      return acc;
    }
    case Op::recip: {
      const Mask m = ast::coordinates(*node->args[0]);
      if (m == 0) return Terms{{1.0 / ast::eval(*node->args[0], {}), {}}};
      if ((m & (m - 1)) != 0) return std::nullopt;
      int k = 0;
      while (!(m & (Mask{1} << k))) ++k;
      SeparableTerm t;
      t.factors[k] = to_coordinate_zero(node, k);
      return Terms{t};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<SeparableTerm>> separate(const ast::Node& node, std::size_t max_terms) {
  return expand(std::make_shared<const ast::Node>(node), max_terms);
}

}  // namespace hfc::detail
