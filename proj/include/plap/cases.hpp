#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plap/problem.hpp"

namespace plap {

/// sin(2 pi x1) - sin(2 pi x2)
double hat_h(const Point& x);

/// A named closed-form data set together with its mesh family.
struct Case {
  std::string name;
  std::string summary;
  int dim = 2;
  unsigned free_sides = side_none;
  int d_prime = 1;
  /// Data for exponent p; `scale` multiplies f and h.
  std::function<ContinuousData(double p, double scale)> data;
  /// Known exact solution (full field), if any.
  std::optional<VectorFn> exact;

  /// unit_square(k, free_sides) or unit_interval(k).
  std::shared_ptr<const Mesh> mesh(int k) const;
};

/// scalar-hat, hat-normal, hat-ones, manufactured, viscosity, oned-const,
/// oned-sign.
const std::vector<Case>& known_cases();
std::string known_case_names();
/// Throws Error naming the known cases when `name` is unknown.
const Case& find_case(std::string_view name);

/// Elements per side for a node count: n = (k+1)^2 in 2D, k+1 in 1D.
/// Throws Error when n does not fit the family.
int k_for_nodes(long n, int dim);

}  // namespace plap
