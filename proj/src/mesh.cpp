#include "plap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace plap {

namespace {

double distance(const Point& a, const Point& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  out += buf;
}

}  // namespace

double Mesh::signed_measure(Index i) const {
  const auto e = element(i);
  if (dim == 1) return nodes[e[1]][0] - nodes[e[0]][0];
  const Point& a = nodes[e[0]];
  const Point& b = nodes[e[1]];
  const Point& c = nodes[e[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

std::vector<char> Mesh::nodes_with_marker(BoundaryMarker marker) const {
  std::vector<char> flags(nodes.size(), 0);
  for (const auto& f : boundary) {
    if (f.marker != marker) continue;
    flags[f.nodes[0]] = 1;
    flags[f.nodes[1]] = 1;
  }
  return flags;
}

void Mesh::validate() const {
  if (dim != 1 && dim != 2) throw Error("mesh: dimension must be 1 or 2");
  if (connectivity.size() % nodes_per_element() != 0)
    throw Error("mesh: connectivity length is not a multiple of element size");
  const Index n = num_nodes();
  for (Index v : connectivity)
    if (v < 0 || v >= n) throw Error("mesh: element node index out of range");
  for (Index i = 0; i < num_elements(); ++i)
    if (!(signed_measure(i) > 0.0))
      throw Error("mesh: element " + std::to_string(i) +
                  " has non-positive measure");

  // Count facet ownership: a facet belongs to an element if all its nodes do.
  std::map<std::pair<Index, Index>, int> owners;
  for (const auto& f : boundary) {
    if (f.nodes[0] < 0 || f.nodes[0] >= n || f.nodes[1] < 0 || f.nodes[1] >= n)
      throw Error("mesh: boundary node index out of range");
    owners[std::minmax(f.nodes[0], f.nodes[1])] = 0;
  }
  for (Index i = 0; i < num_elements(); ++i) {
    const auto e = element(i);
    if (dim == 1) {
      for (Index v : e)
        if (auto it = owners.find({v, v}); it != owners.end()) ++it->second;
    } else {
      for (int a = 0; a < 3; ++a) {
        auto key = std::minmax(e[a], e[(a + 1) % 3]);
        if (auto it = owners.find(key); it != owners.end()) ++it->second;
      }
    }
  }
  for (const auto& [key, count] : owners)
    if (count != 1)
      throw Error("mesh: boundary facet (" + std::to_string(key.first) + "," +
                  std::to_string(key.second) + ") owned by " +
                  std::to_string(count) + " elements");
}

Mesh unit_square(int k, unsigned free_sides) {
  if (k < 1) throw Error("unit_square: k must be >= 1");
  Mesh mesh;
  mesh.dim = 2;
  const Index np = k + 1;
  mesh.nodes.reserve(np * np);
  for (Index j = 0; j < np; ++j)
    for (Index i = 0; i < np; ++i)
      mesh.nodes.push_back({static_cast<double>(i) / k,
                            static_cast<double>(j) / k});

  auto id = [np](Index i, Index j) { return j * np + i; };
  mesh.connectivity.reserve(6 * static_cast<std::size_t>(k) * k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < k; ++i) {
      const Index v00 = id(i, j), v10 = id(i + 1, j);
      const Index v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      mesh.connectivity.insert(mesh.connectivity.end(), {v00, v10, v11});
      mesh.connectivity.insert(mesh.connectivity.end(), {v00, v11, v01});
    }
  }

  auto marker = [free_sides](Side s) {
    return (free_sides & s) ? BoundaryMarker::neumann
                            : BoundaryMarker::dirichlet;
  };
  // Counter-clockwise traversal of the boundary.
  for (Index i = 0; i < k; ++i)
    mesh.boundary.push_back({{id(i, 0), id(i + 1, 0)}, marker(side_bottom)});
  for (Index j = 0; j < k; ++j)
    mesh.boundary.push_back({{id(k, j), id(k, j + 1)}, marker(side_right)});
  for (Index i = k; i > 0; --i)
    mesh.boundary.push_back({{id(i, k), id(i - 1, k)}, marker(side_top)});
  for (Index j = k; j > 0; --j)
    mesh.boundary.push_back({{id(0, j), id(0, j - 1)}, marker(side_left)});
  return mesh;
}

Mesh unit_interval(int k) {
  if (k < 1) throw Error("unit_interval: k must be >= 1");
  Mesh mesh;
  mesh.dim = 1;
  for (Index i = 0; i <= k; ++i)
    mesh.nodes.push_back({static_cast<double>(i) / k, 0.0});
  for (Index i = 0; i < k; ++i)
    mesh.connectivity.insert(mesh.connectivity.end(), {i, i + 1});
  mesh.boundary.push_back({{0, 0}, BoundaryMarker::dirichlet});
  mesh.boundary.push_back({{k, k}, BoundaryMarker::dirichlet});
  return mesh;
}

Mesh displaced(const Mesh& mesh, std::span<const Point> displacement) {
  if (displacement.size() != mesh.nodes.size())
    throw Error("displaced: displacement length does not match node count");
  Mesh out = mesh;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    out.nodes[i][0] += displacement[i][0];
    out.nodes[i][1] += displacement[i][1];
  }
  return out;
}

QualityReport quality(const Mesh& mesh, std::span<const Index> elements) {
  QualityReport q;
  if (elements.empty()) return q;
  double min_angle = 180.0, max_aspect = 0.0;
  double min_area = std::numeric_limits<double>::infinity();
  double min_diam = std::numeric_limits<double>::infinity(), max_diam = 0.0;

  for (Index i : elements) {
    const auto e = mesh.element(i);
    const double area = mesh.signed_measure(i);
    min_area = std::min(min_area, area);
    if (mesh.dim == 1) {
      const double len = std::abs(area);
      min_diam = std::min(min_diam, len);
      max_diam = std::max(max_diam, len);
      max_aspect = 1.0;
      continue;
    }
    const Point& a = mesh.nodes[e[0]];
    const Point& b = mesh.nodes[e[1]];
    const Point& c = mesh.nodes[e[2]];
    const double la = distance(b, c), lb = distance(c, a), lc = distance(a, b);
    const double diam = std::max({la, lb, lc});
    min_diam = std::min(min_diam, diam);
    max_diam = std::max(max_diam, diam);

    // Law of cosines, clamped against rounding.
    auto angle = [](double opp, double s1, double s2) {
      const double cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
      return std::acos(std::clamp(cosv, -1.0, 1.0)) * 180.0 / std::numbers::pi;
    };
    min_angle = std::min({min_angle, angle(la, lb, lc), angle(lb, lc, la),
                          angle(lc, la, lb)});

    // Longest edge over 2*sqrt(3)*inradius; equilateral gives 1.
    const double perimeter = la + lb + lc;
    const double inradius = 2.0 * std::abs(area) / perimeter;
    const double aspect =
        inradius > 0.0 ? diam / (2.0 * std::sqrt(3.0) * inradius)
                       : std::numeric_limits<double>::infinity();
    max_aspect = std::max(max_aspect, aspect);
  }
  q.min_angle = min_angle;
  q.max_aspect_ratio = max_aspect;
  q.min_element_area = min_area;
  q.quasi_uniformity = min_diam > 0.0 ? max_diam / min_diam
                                      : std::numeric_limits<double>::infinity();
  return q;
}

QualityReport quality(const Mesh& mesh) {
  std::vector<Index> all(mesh.num_elements());
  for (Index i = 0; i < mesh.num_elements(); ++i) all[i] = i;
  return quality(mesh, all);
}

std::vector<Index> elements_near(const Mesh& mesh, const Point& center,
                                 double radius) {
  std::vector<Index> out;
  for (Index i = 0; i < mesh.num_elements(); ++i) {
    for (Index v : mesh.element(i)) {
      if (distance(mesh.nodes[v], center) <= radius) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

std::string to_vtk(const Mesh& mesh, std::span<const VtkField> fields,
                   const std::string& title) {
  const Index n = mesh.num_nodes();
  const Index m = mesh.num_elements();
  const int npe = mesh.nodes_per_element();
  for (const auto& f : fields) {
    const Index count = f.location == FieldLocation::point ? n : m;
    if (f.components < 1 || f.components > 3)
      throw Error("export_vtk: field '" + f.name + "' has invalid components");
    if (static_cast<Index>(f.values.size()) != count * f.components)
      throw Error("export_vtk: field '" + f.name + "' has length " +
                  std::to_string(f.values.size()) + ", expected " +
                  std::to_string(count * f.components));
  }

  std::string out;
  out += "# vtk DataFile Version 3.0\n";
  out += title + "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(n) + " double\n";
  for (const auto& p : mesh.nodes) {
    append_number(out, p[0]);
    out += ' ';
    append_number(out, p[1]);
    out += " 0\n";
  }
  out += "CELLS " + std::to_string(m) + " " + std::to_string(m * (npe + 1)) +
         "\n";
  for (Index i = 0; i < m; ++i) {
    out += std::to_string(npe);
    for (Index v : mesh.element(i)) out += " " + std::to_string(v);
    out += '\n';
  }
  out += "CELL_TYPES " + std::to_string(m) + "\n";
  const char* cell_type = mesh.dim == 2 ? "5\n" : "3\n";
  for (Index i = 0; i < m; ++i) out += cell_type;

  auto write_section = [&](FieldLocation loc, Index count, const char* head) {
    bool started = false;
    for (const auto& f : fields) {
      if (f.location != loc) continue;
      if (!started) {
        out += std::string(head) + " " + std::to_string(count) + "\n";
        started = true;
      }
      if (f.components == 1) {
        out += "SCALARS " + f.name + " double 1\nLOOKUP_TABLE default\n";
        for (double v : f.values) {
          append_number(out, v);
          out += '\n';
        }
      } else {
        out += "VECTORS " + f.name + " double\n";
        for (Index e = 0; e < count; ++e) {
          for (int c = 0; c < 3; ++c) {
            if (c) out += ' ';
            append_number(out, c < f.components ? f.values[e * f.components + c]
                                                : 0.0);
          }
          out += '\n';
        }
      }
    }
  };
  write_section(FieldLocation::point, n, "POINT_DATA");
  write_section(FieldLocation::cell, m, "CELL_DATA");
  return out;
}

void export_vtk(const Mesh& mesh, std::span<const VtkField> fields,
                const std::filesystem::path& path, const std::string& title) {
  const std::string text = to_vtk(mesh, fields, title);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("export_vtk: cannot open " + path.string());
  os << text;
  if (!os) throw Error("export_vtk: write failed for " + path.string());
}

}  // namespace plap
