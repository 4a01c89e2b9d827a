#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "plap/types.hpp"

namespace plap {

enum class BoundaryMarker : std::uint8_t { dirichlet, neumann };

/// Sides of the unit square, combinable as a bit mask.
enum Side : unsigned {
  side_none = 0,
  side_bottom = 1u << 0,
  side_right = 1u << 1,
  side_top = 1u << 2,
  side_left = 1u << 3,
};

/// A boundary facet: an edge in 2D, a single node in 1D (both indices equal).
struct BoundaryFacet {
  std::array<Index, 2> nodes;
  BoundaryMarker marker;
};

/// Simplicial mesh of a 1D interval or a 2D polygon.
///
/// Elements are stored flat with `dim + 1` node indices each, counter-clockwise
/// in 2D. 1D meshes keep the second coordinate at zero so that assembly runs
/// through one code path.
struct Mesh {
  int dim = 2;
  std::vector<Point> nodes;
  std::vector<Index> connectivity;
  std::vector<BoundaryFacet> boundary;

  Index num_nodes() const { return static_cast<Index>(nodes.size()); }
  int nodes_per_element() const { return dim + 1; }
  Index num_elements() const {
    return static_cast<Index>(connectivity.size()) / nodes_per_element();
  }
  std::span<const Index> element(Index i) const {
    return {connectivity.data() + i * nodes_per_element(),
            static_cast<std::size_t>(nodes_per_element())};
  }

  /// Signed area (2D) or signed length (1D) of element i.
  double signed_measure(Index i) const;

  /// Per-node flags: node touches a facet with the given marker.
  std::vector<char> nodes_with_marker(BoundaryMarker marker) const;

  /// Nodes treated as Dirichlet: every node on a Dirichlet facet. Junctions
  /// between Dirichlet and Neumann facets are therefore Dirichlet.
  std::vector<char> dirichlet_nodes() const {
    return nodes_with_marker(BoundaryMarker::dirichlet);
  }

  /// Throws Error when an invariant is violated (positive measures, index
  /// ranges, each boundary facet owned by exactly one element).
  void validate() const;
};

/// Regular triangulation of [0,1]^2 with (k+1)^2 nodes and 2k^2 triangles.
/// Each cell is split along its lower-left to upper-right diagonal. Edges on
/// the sides in `free_sides` are Neumann, the rest Dirichlet.
Mesh unit_square(int k, unsigned free_sides = side_none);

/// Uniform mesh of [0,1] with k segments and Dirichlet endpoints.
Mesh unit_interval(int k);

/// Copy of `mesh` with node i moved by displacement[i] (perturbation of
/// identity x -> x + t v(x) with t folded into the displacement).
Mesh displaced(const Mesh& mesh, std::span<const Point> displacement);

struct QualityReport {
  double min_angle = 0.0;         // degrees
  double max_aspect_ratio = 0.0;  // 1 for an equilateral triangle
  double min_element_area = 0.0;  // signed; <= 0 flags inversion
  double quasi_uniformity = 0.0;  // largest / smallest element diameter
};

QualityReport quality(const Mesh& mesh);

/// Quality restricted to a subset of elements.
QualityReport quality(const Mesh& mesh, std::span<const Index> elements);

/// Elements with at least one node within `radius` of `center`.
std::vector<Index> elements_near(const Mesh& mesh, const Point& center,
                                 double radius);

enum class FieldLocation { point, cell };

/// Named field for VTK export. `components` is 1 (scalar) or 2/3 (vector).
struct VtkField {
  std::string name;
  FieldLocation location = FieldLocation::point;
  int components = 1;
  std::vector<double> values;  // entity-major: values[e * components + c]
};

/// Serialize as legacy ASCII VTK unstructured grid. Output is byte-stable
/// for a fixed input.
std::string to_vtk(const Mesh& mesh, std::span<const VtkField> fields,
                   const std::string& title = "plap");

void export_vtk(const Mesh& mesh, std::span<const VtkField> fields,
                const std::filesystem::path& path,
                const std::string& title = "plap");

}  // namespace plap
