#pragma once

#include <map>
#include <optional>
#include <vector>

#include "hfc/sector_function.hpp"

namespace hfc::detail {

/// coef * prod_k g_k(z_k); every factor is a one-variable tree in coordinate 0.
struct SeparableTerm {
  Complex coef{1.0};
  std::map<int, ast::NodePtr> factors;
};

/// Rewrites a tree as a finite sum of products of one-variable factors.
/// Returns nullopt when a reciprocal couples several variables or the
/// expansion exceeds `max_terms`.
std::optional<std::vector<SeparableTerm>> separate(const ast::Node& node,
                                                   std::size_t max_terms = 4096);

inline Complex eval_factor(const ast::Node& factor, Complex z) {
  return ast::eval(factor, std::span<const Complex>(&z, 1));
}

}  // namespace hfc::detail
