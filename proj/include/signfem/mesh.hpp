#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "signfem/geometry.hpp"

namespace signfem {

struct Vertex {
  Index id = kNoIndex;
  Point coords;
  bool on_boundary = false;
  bool on_interface = false;
};

/// Counter-clockwise triangle. vertex_ids[0] is the newest vertex (peak) and
/// the edge vertex_ids[1]--vertex_ids[2] is its refinement edge, so the vertex
/// order doubles as the bisection state.
struct Triangle {
  Index id = kNoIndex;
  std::array<Index, 3> vertex_ids{};
  Subdomain subdomain = Subdomain::Plus;
  double diameter = 0.0;           // h_T
  double inradius_diameter = 0.0;  // rho_T, diameter of the inscribed circle
  double area = 0.0;
};

enum class EdgeKind : std::uint8_t { Interior, Boundary };

struct Edge {
  Index id = kNoIndex;
  std::array<Index, 2> vertex_ids{};          // ascending
  std::array<Index, 2> triangles{kNoIndex, kNoIndex};  // second is kNoIndex on Gamma
  double length = 0.0;
  Point normal;  // fixed unit normal n_e
  EdgeKind kind = EdgeKind::Interior;
  bool on_interface = false;  // separates a Plus and a Minus triangle

  int num_triangles() const { return triangles[1] == kNoIndex ? 1 : 2; }
};

/// Conforming triangulation with subdomain tags. Immutable once built; all
/// refinement operations return a new mesh.
class Mesh {
 public:
  Mesh() = default;

  /// Builds topology (edges, adjacency, vertex flags) from raw connectivity.
  /// Triangles with clockwise order are reoriented. When assign_refinement_edges
  /// is set, each triangle is rotated so that its longest edge becomes the
  /// refinement edge; otherwise the given order is kept (after reorientation).
  static Mesh from_triangles(std::vector<Point> points, std::vector<std::array<Index, 3>> triangles,
                             std::vector<Subdomain> tags, bool assign_refinement_edges = true,
                             int generation = 0, std::vector<Index> parents = {},
                             std::optional<double> initial_shape_constant = std::nullopt);

  std::span<const Vertex> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const Edge> edges() const { return edges_; }

  const Vertex& vertex(Index v) const;
  const Triangle& triangle(Index t) const;
  const Edge& edge(Index e) const;

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  Index num_interior_vertices() const;

  Point coords(Index v) const { return vertices_[v].coords; }
  std::array<Point, 3> triangle_coords(Index t) const;

  /// Edge opposite local vertex i of triangle t.
  Index triangle_edge(Index t, int local) const { return triangle_edges_[3 * t + local]; }
  std::array<Index, 3> triangle_edges(Index t) const;
  Index refinement_edge(Index t) const { return triangle_edge(t, 0); }
  std::optional<Index> find_edge(Index a, Index b) const;

  /// omega_x: triangles containing vertex x.
  std::span<const Index> vertex_patch(Index v) const;
  /// omega_e: triangles containing edge e.
  std::span<const Index> edge_patch(Index e) const;
  /// omega_T: triangles sharing at least one vertex with T (T included), sorted.
  std::vector<Index> triangle_patch(Index t) const;
  /// Triangles sharing an edge with t.
  std::vector<Index> edge_neighbors(Index t) const;

  /// Vertex at the given location, if any (exact dyadic lookup with tolerance).
  std::optional<Index> locate_vertex(Point p, double tol = kGeometryTolerance) const;

  int generation() const { return generation_; }
  /// Parent triangle in the previous generation, empty for a root mesh.
  std::span<const Index> parents() const { return parents_; }

  /// max_T h_T / rho_T.
  double shape_constant() const;
  /// sigma recorded for the root mesh of this refinement history.
  double initial_shape_constant() const { return initial_shape_constant_; }
  double max_diameter() const;
  /// Smallest interior angle over all triangles, radians.
  double min_angle() const;
  double total_area() const;

  /// Same triangulation with the Plus/Minus tags exchanged.
  Mesh with_swapped_subdomains() const;
  /// Same triangulation with the stored normal of the given edges reversed.
  Mesh with_flipped_normals(std::span<const Index> edge_ids) const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<Index> triangle_edges_;  // 3 per triangle
  std::vector<Index> vertex_patch_offsets_;
  std::vector<Index> vertex_patch_data_;
  std::unordered_map<std::uint64_t, Index> location_index_;
  std::vector<Index> parents_;
  int generation_ = 0;
  double initial_shape_constant_ = 0.0;
};

enum class Diagonal {
  Uniform,   // every cell cut bottom-left to top-right
  Mirrored,  // cut through the cell corner closest to the origin; symmetric about both axes
};

/// Structured mesh of (-1,1)^2 with n cells per unit length, (2n+1)^2 vertices.
Mesh build_structured_mesh(Geometry geometry, int n, Diagonal diagonal = Diagonal::Uniform);

/// Red refinement: every triangle split into four similar children.
Mesh refine_uniform(const Mesh& mesh);

/// Newest-vertex bisection of the marked triangles with conforming closure.
Mesh refine_marked(const Mesh& mesh, std::span<const Index> marked);

/// Human-readable list of violated mesh invariants; empty when the mesh is valid.
std::vector<std::string> mesh_defects(const Mesh& mesh, Geometry geometry);

/// Plain-text mesh format:
///   vertices N triangles M edges K
///   v <id> <x> <y> <flags>          (flags: bit 0 boundary, bit 1 interface)
///   t <id> <v0> <v1> <v2> <plus|minus>
/// Edges are derived on import.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace signfem
