#include "plap/cases.hpp"

#include <cmath>
#include <numbers>

namespace plap {

namespace {

using Pair = std::array<double, 2>;
constexpr double kPi = std::numbers::pi;

ContinuousData base(double p, int d_prime) {
  ContinuousData d;
  d.p = p;
  d.d_prime = d_prime;
  return d;
}

std::vector<Case> make_cases() {
  std::vector<Case> cases;

  Case c;
  c.name = "scalar-hat";
  c.summary = "scalar, h = sin(2 pi x1) - sin(2 pi x2) on left and top";
  c.free_sides = side_left | side_top;
  c.d_prime = 1;
  c.data = [](double p, double scale) {
    auto d = base(p, 1);
    d.h = [scale](const Point& x, const Point&) {
      return Pair{scale * hat_h(x), 0.0};
    };
    return d;
  };
  cases.push_back(c);

  c = {};
  c.name = "hat-normal";
  c.summary = "vector, h = hat * outward normal on left and top";
  c.free_sides = side_left | side_top;
  c.d_prime = 2;
  c.data = [](double p, double scale) {
    auto d = base(p, 2);
    d.h = [scale](const Point& x, const Point& n) {
      const double h = scale * hat_h(x);
      return Pair{h * n[0], h * n[1]};
    };
    return d;
  };
  cases.push_back(c);

  c = {};
  c.name = "hat-ones";
  c.summary = "vector, h = hat * [1,1] on left and top";
  c.free_sides = side_left | side_top;
  c.d_prime = 2;
  c.data = [](double p, double scale) {
    auto d = base(p, 2);
    d.h = [scale](const Point& x, const Point&) {
      const double h = scale * hat_h(x);
      return Pair{h, h};
    };
    return d;
  };
  cases.push_back(c);

  c = {};
  c.name = "manufactured";
  c.summary = "vector, exact v = |x|^2/2 [1,1], Dirichlet on all sides";
  c.free_sides = side_none;
  c.d_prime = 2;
  c.data = [](double p, double scale) {
    auto d = base(p, 2);
    d.g = [](const Point& x) {
      const double v = 0.5 * (x[0] * x[0] + x[1] * x[1]);
      return Pair{v, v};
    };
    d.f = [p, scale](const Point& x) {
      const double r = std::hypot(x[0], x[1]);
      const double v =
          -scale * p * std::pow(2.0, (p - 2.0) / 2.0) * std::pow(r, p - 2.0);
      return Pair{v, v};
    };
    return d;
  };
  c.exact = [](const Point& x) {
    const double v = 0.5 * (x[0] * x[0] + x[1] * x[1]);
    return Pair{v, v};
  };
  cases.push_back(c);

  c = {};
  c.name = "viscosity";
  c.summary = "scalar, g = x1^(4/3) - x2^(4/3) on all sides, f = 0";
  c.free_sides = side_none;
  c.d_prime = 1;
  auto visc = [](const Point& x) {
    return Pair{std::cbrt(x[0] * x[0] * x[0] * x[0]) -
                    std::cbrt(x[1] * x[1] * x[1] * x[1]),
                0.0};
  };
  c.data = [visc](double p, double) {
    auto d = base(p, 1);
    d.g = visc;
    return d;
  };
  c.exact = visc;
  cases.push_back(c);

  c = {};
  c.name = "oned-const";
  c.summary = "1D, f = 1 on [0,1], zero Dirichlet ends";
  c.dim = 1;
  c.d_prime = 1;
  c.data = [](double p, double scale) {
    auto d = base(p, 1);
    d.f = [scale](const Point&) { return Pair{scale, 0.0}; };
    return d;
  };
  cases.push_back(c);

  c = {};
  c.name = "oned-sign";
  c.summary = "1D, f = sin(2 pi x) on [0,1], zero Dirichlet ends";
  c.dim = 1;
  c.d_prime = 1;
  c.data = [](double p, double scale) {
    auto d = base(p, 1);
    d.f = [scale](const Point& x) {
      return Pair{scale * std::sin(2.0 * kPi * x[0]), 0.0};
    };
    return d;
  };
  cases.push_back(c);

  return cases;
}

}  // namespace

double hat_h(const Point& x) {
  return std::sin(2.0 * kPi * x[0]) - std::sin(2.0 * kPi * x[1]);
}

std::shared_ptr<const Mesh> Case::mesh(int k) const {
  if (dim == 1) return std::make_shared<const Mesh>(unit_interval(k));
  return std::make_shared<const Mesh>(unit_square(k, free_sides));
}

const std::vector<Case>& known_cases() {
  static const std::vector<Case> cases = make_cases();
  return cases;
}

std::string known_case_names() {
  std::string out;
  for (const auto& c : known_cases()) {
    if (!out.empty()) out += ", ";
    out += c.name;
  }
  return out;
}

const Case& find_case(std::string_view name) {
  for (const auto& c : known_cases())
    if (c.name == name) return c;
  throw Error("unknown case '" + std::string(name) +
              "' (known: " + known_case_names() + ")");
}

int k_for_nodes(long n, int dim) {
  if (dim == 1) {
    if (n < 2) throw Error("node count must be at least 2 in 1D");
    return static_cast<int>(n - 1);
  }
  const long side = std::lround(std::sqrt(static_cast<double>(n)));
  if (side < 2 || side * side != n)
    throw Error("node count " + std::to_string(n) +
                " is not (k+1)^2 for a unit-square mesh");
  return static_cast<int>(side - 1);
}

}  // namespace plap
