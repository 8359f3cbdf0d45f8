#include "signfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

namespace signfem {

namespace {

constexpr double kLocationScale = 1073741824.0;  // 2^30

std::uint64_t location_key(Point p) {
  const auto qx = static_cast<std::uint64_t>(std::llround((p.x + 2.0) * kLocationScale));
  const auto qy = static_cast<std::uint64_t>(std::llround((p.y + 2.0) * kLocationScale));
  return (qx << 32) | (qy & 0xffffffffULL);
}

double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

void fill_triangle_metrics(Triangle& tri, const std::vector<Vertex>& vertices) {
  const Point a = vertices[tri.vertex_ids[0]].coords;
  const Point b = vertices[tri.vertex_ids[1]].coords;
  const Point c = vertices[tri.vertex_ids[2]].coords;
  const double lab = norm(b - a);
  const double lbc = norm(c - b);
  const double lca = norm(a - c);
  tri.area = signed_area(a, b, c);
  tri.diameter = std::max({lab, lbc, lca});
  tri.inradius_diameter = 4.0 * tri.area / (lab + lbc + lca);
}

// Rotates a CCW triple so that the longest edge is opposite position 0.
std::array<Index, 3> rotate_to_longest_edge(const std::array<Index, 3>& v,
                                            const std::vector<Point>& pts) {
  std::array<double, 3> opposite{};
  for (int i = 0; i < 3; ++i) {
    opposite[i] = norm(pts[v[(i + 2) % 3]] - pts[v[(i + 1) % 3]]);
  }
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (opposite[i] > opposite[best] * (1.0 + 1e-12)) best = i;
  }
  return {v[best], v[(best + 1) % 3], v[(best + 2) % 3]};
}

}  // namespace

Mesh Mesh::from_triangles(std::vector<Point> points, std::vector<std::array<Index, 3>> triangles,
                          std::vector<Subdomain> tags, bool assign_refinement_edges, int generation,
                          std::vector<Index> parents, std::optional<double> initial_shape_constant) {
  if (tags.size() != triangles.size()) {
    throw InvalidArgument("subdomain tag count does not match triangle count");
  }
  if (!parents.empty() && parents.size() != triangles.size()) {
    throw InvalidArgument("parent count does not match triangle count");
  }
  Mesh mesh;
  mesh.generation_ = generation;
  mesh.parents_ = std::move(parents);

  const auto nv = static_cast<Index>(points.size());
  mesh.vertices_.resize(points.size());
  for (Index v = 0; v < nv; ++v) {
    mesh.vertices_[v].id = v;
    mesh.vertices_[v].coords = points[v];
  }

  const auto nt = static_cast<Index>(triangles.size());
  mesh.triangles_.resize(triangles.size());
  for (Index t = 0; t < nt; ++t) {
    auto ids = triangles[t];
    for (Index id : ids) {
      if (id < 0 || id >= nv) throw InvalidArgument(fmt::format("triangle {} references unknown vertex {}", t, id));
    }
    if (signed_area(points[ids[0]], points[ids[1]], points[ids[2]]) < 0.0) std::swap(ids[1], ids[2]);
    if (assign_refinement_edges) ids = rotate_to_longest_edge(ids, points);
    Triangle& tri = mesh.triangles_[t];
    tri.id = t;
    tri.vertex_ids = ids;
    tri.subdomain = tags[t];
    fill_triangle_metrics(tri, mesh.vertices_);
  }

  // Edges: collect (min, max, triangle, local) and sort for a deterministic numbering.
  std::vector<std::tuple<Index, Index, Index, int>> half_edges;
  half_edges.reserve(3 * triangles.size());
  for (Index t = 0; t < nt; ++t) {
    const auto& v = mesh.triangles_[t].vertex_ids;
    for (int i = 0; i < 3; ++i) {
      const Index a = v[(i + 1) % 3];
      const Index b = v[(i + 2) % 3];
      half_edges.emplace_back(std::min(a, b), std::max(a, b), t, i);
    }
  }
  std::sort(half_edges.begin(), half_edges.end());

  mesh.triangle_edges_.assign(3 * triangles.size(), kNoIndex);
  for (std::size_t k = 0; k < half_edges.size();) {
    const auto [a, b, t0, i0] = half_edges[k];
    Edge e;
    e.id = static_cast<Index>(mesh.edges_.size());
    e.vertex_ids = {a, b};
    e.triangles[0] = t0;
    mesh.triangle_edges_[3 * t0 + i0] = e.id;
    std::size_t next = k + 1;
    while (next < half_edges.size() && std::get<0>(half_edges[next]) == a &&
           std::get<1>(half_edges[next]) == b) {
      const auto [a1, b1, t1, i1] = half_edges[next];
      if (e.triangles[1] != kNoIndex) {
        throw InvalidArgument(fmt::format("edge ({}, {}) shared by more than two triangles", a, b));
      }
      e.triangles[1] = t1;
      mesh.triangle_edges_[3 * t1 + i1] = e.id;
      ++next;
    }
    const Point d = points[b] - points[a];
    e.length = norm(d);
    e.normal = {d.y / e.length, -d.x / e.length};
    e.kind = e.triangles[1] == kNoIndex ? EdgeKind::Boundary : EdgeKind::Interior;
    e.on_interface = e.kind == EdgeKind::Interior &&
                     mesh.triangles_[e.triangles[0]].subdomain != mesh.triangles_[e.triangles[1]].subdomain;
    mesh.edges_.push_back(e);
    k = next;
  }

  for (const Edge& e : mesh.edges_) {
    for (Index v : e.vertex_ids) {
      if (e.kind == EdgeKind::Boundary) mesh.vertices_[v].on_boundary = true;
      if (e.on_interface) mesh.vertices_[v].on_interface = true;
    }
  }

  // Vertex -> triangle adjacency in CSR form.
  mesh.vertex_patch_offsets_.assign(points.size() + 1, 0);
  for (const Triangle& tri : mesh.triangles_) {
    for (Index v : tri.vertex_ids) ++mesh.vertex_patch_offsets_[v + 1];
  }
  std::partial_sum(mesh.vertex_patch_offsets_.begin(), mesh.vertex_patch_offsets_.end(),
                   mesh.vertex_patch_offsets_.begin());
  mesh.vertex_patch_data_.resize(mesh.vertex_patch_offsets_.back());
  std::vector<Index> fill(mesh.vertex_patch_offsets_.begin(), mesh.vertex_patch_offsets_.end() - 1);
  for (const Triangle& tri : mesh.triangles_) {
    for (Index v : tri.vertex_ids) mesh.vertex_patch_data_[fill[v]++] = tri.id;
  }

  mesh.location_index_.reserve(points.size());
  for (const Vertex& v : mesh.vertices_) mesh.location_index_.emplace(location_key(v.coords), v.id);

  mesh.initial_shape_constant_ = initial_shape_constant.value_or(mesh.shape_constant());
  return mesh;
}

const Vertex& Mesh::vertex(Index v) const {
  if (v < 0 || v >= num_vertices()) throw InvalidArgument(fmt::format("unknown vertex id {}", v));
  return vertices_[v];
}

const Triangle& Mesh::triangle(Index t) const {
  if (t < 0 || t >= num_triangles()) throw InvalidArgument(fmt::format("unknown triangle id {}", t));
  return triangles_[t];
}

const Edge& Mesh::edge(Index e) const {
  if (e < 0 || e >= num_edges()) throw InvalidArgument(fmt::format("unknown edge id {}", e));
  return edges_[e];
}

Index Mesh::num_interior_vertices() const {
  return static_cast<Index>(std::count_if(vertices_.begin(), vertices_.end(),
                                          [](const Vertex& v) { return !v.on_boundary; }));
}

std::array<Point, 3> Mesh::triangle_coords(Index t) const {
  const auto& v = triangles_[t].vertex_ids;
  return {vertices_[v[0]].coords, vertices_[v[1]].coords, vertices_[v[2]].coords};
}

std::array<Index, 3> Mesh::triangle_edges(Index t) const {
  triangle(t);
  return {triangle_edges_[3 * t], triangle_edges_[3 * t + 1], triangle_edges_[3 * t + 2]};
}

std::optional<Index> Mesh::find_edge(Index a, Index b) const {
  for (Index t : vertex_patch(a)) {
    for (int i = 0; i < 3; ++i) {
      const Edge& e = edges_[triangle_edges_[3 * t + i]];
      if ((e.vertex_ids[0] == a && e.vertex_ids[1] == b) || (e.vertex_ids[0] == b && e.vertex_ids[1] == a)) {
        return e.id;
      }
    }
  }
  return std::nullopt;
}

std::span<const Index> Mesh::vertex_patch(Index v) const {
  vertex(v);
  return {vertex_patch_data_.data() + vertex_patch_offsets_[v],
          static_cast<std::size_t>(vertex_patch_offsets_[v + 1] - vertex_patch_offsets_[v])};
}

std::span<const Index> Mesh::edge_patch(Index e) const {
  const Edge& ed = edge(e);
  return {ed.triangles.data(), static_cast<std::size_t>(ed.num_triangles())};
}

std::vector<Index> Mesh::triangle_patch(Index t) const {
  std::vector<Index> out;
  for (Index v : triangle(t).vertex_ids) {
    const auto patch = vertex_patch(v);
    out.insert(out.end(), patch.begin(), patch.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Index> Mesh::edge_neighbors(Index t) const {
  std::vector<Index> out;
  for (Index e : triangle_edges(t)) {
    for (Index s : edges_[e].triangles) {
      if (s != kNoIndex && s != t) out.push_back(s);
    }
  }
  return out;
}

std::optional<Index> Mesh::locate_vertex(Point p, double tol) const {
  const auto it = location_index_.find(location_key(p));
  if (it == location_index_.end()) return std::nullopt;
  if (norm(vertices_[it->second].coords - p) > tol) return std::nullopt;
  return it->second;
}

double Mesh::shape_constant() const {
  double sigma = 0.0;
  for (const Triangle& t : triangles_) sigma = std::max(sigma, t.diameter / t.inradius_diameter);
  return sigma;
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (const Triangle& t : triangles_) h = std::max(h, t.diameter);
  return h;
}

double Mesh::min_angle() const {
  double best = std::numbers::pi;
  for (Index t = 0; t < num_triangles(); ++t) {
    const auto p = triangle_coords(t);
    for (int i = 0; i < 3; ++i) {
      const Point u = p[(i + 1) % 3] - p[i];
      const Point w = p[(i + 2) % 3] - p[i];
      best = std::min(best, std::atan2(std::abs(cross(u, w)), dot(u, w)));
    }
  }
  return best;
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (const Triangle& t : triangles_) sum += t.area;
  return sum;
}

Mesh Mesh::with_swapped_subdomains() const {
  Mesh copy = *this;
  for (Triangle& t : copy.triangles_) t.subdomain = opposite(t.subdomain);
  return copy;
}

Mesh Mesh::with_flipped_normals(std::span<const Index> edge_ids) const {
  Mesh copy = *this;
  for (Index e : edge_ids) {
    edge(e);
    copy.edges_[e].normal = -1.0 * copy.edges_[e].normal;
  }
  return copy;
}

Mesh build_structured_mesh(Geometry geometry, int n, Diagonal diagonal) {
  if (n < 1) throw InvalidArgument(fmt::format("cells per unit side must be >= 1, got {}", n));
  const int side = 2 * n + 1;
  std::vector<Point> points;
  points.reserve(static_cast<std::size_t>(side) * side);
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      points.push_back({static_cast<double>(i - n) / n, static_cast<double>(j - n) / n});
    }
  }
  const auto id = [side](int i, int j) { return static_cast<Index>(i + j * side); };

  std::vector<std::array<Index, 3>> triangles;
  std::vector<Subdomain> tags;
  triangles.reserve(2 * static_cast<std::size_t>(side - 1) * (side - 1));
  for (int j = 0; j + 1 < side; ++j) {
    for (int i = 0; i + 1 < side; ++i) {
      const Index bl = id(i, j), br = id(i + 1, j), tr = id(i + 1, j + 1), tl = id(i, j + 1);
      const double cx = (i - n) + 0.5;
      const double cy = (j - n) + 0.5;
      if (diagonal == Diagonal::Uniform || cx * cy > 0.0) {
        triangles.push_back({bl, br, tr});
        triangles.push_back({bl, tr, tl});
      } else {
        triangles.push_back({bl, br, tl});
        triangles.push_back({br, tr, tl});
      }
      const Point centre{cx / n, cy / n};
      const Subdomain tag = geometry::classify(geometry, centre);
      tags.push_back(tag);
      tags.push_back(tag);
    }
  }
  return Mesh::from_triangles(std::move(points), std::move(triangles), std::move(tags));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Point> points;
  points.reserve(mesh.num_vertices() + mesh.num_edges());
  for (const Vertex& v : mesh.vertices()) points.push_back(v.coords);
  std::vector<Index> edge_midpoint(mesh.num_edges());
  for (const Edge& e : mesh.edges()) {
    edge_midpoint[e.id] = static_cast<Index>(points.size());
    points.push_back(midpoint(mesh.coords(e.vertex_ids[0]), mesh.coords(e.vertex_ids[1])));
  }

  std::vector<std::array<Index, 3>> triangles;
  std::vector<Subdomain> tags;
  std::vector<Index> parents;
  triangles.reserve(4 * static_cast<std::size_t>(mesh.num_triangles()));
  for (const Triangle& t : mesh.triangles()) {
    const auto& v = t.vertex_ids;
    // m[i] is the midpoint of the edge opposite v[i].
    const std::array<Index, 3> m{edge_midpoint[mesh.triangle_edge(t.id, 0)],
                                 edge_midpoint[mesh.triangle_edge(t.id, 1)],
                                 edge_midpoint[mesh.triangle_edge(t.id, 2)]};
    triangles.push_back({v[0], m[2], m[1]});
    triangles.push_back({m[2], v[1], m[0]});
    triangles.push_back({m[1], m[0], v[2]});
    triangles.push_back({m[0], m[1], m[2]});
    for (int c = 0; c < 4; ++c) {
      tags.push_back(t.subdomain);
      parents.push_back(t.id);
    }
  }
  return Mesh::from_triangles(std::move(points), std::move(triangles), std::move(tags), true,
                              mesh.generation() + 1, std::move(parents), mesh.initial_shape_constant());
}

Mesh refine_marked(const Mesh& mesh, std::span<const Index> marked) {
  std::vector<char> edge_marked(mesh.num_edges(), 0);
  std::deque<Index> queue;
  for (Index t : marked) {
    if (t < 0 || t >= mesh.num_triangles()) {
      throw InvalidArgument(fmt::format("marked triangle id {} does not exist", t));
    }
    const Index e = mesh.refinement_edge(t);
    if (!edge_marked[e]) {
      edge_marked[e] = 1;
      for (Index s : mesh.edge_patch(e)) queue.push_back(s);
    }
  }
  // Closure: a triangle with any marked edge must have its refinement edge marked.
  while (!queue.empty()) {
    const Index t = queue.front();
    queue.pop_front();
    const Index e = mesh.refinement_edge(t);
    if (edge_marked[e]) continue;
    const auto edges = mesh.triangle_edges(t);
    if (edge_marked[edges[1]] || edge_marked[edges[2]]) {
      edge_marked[e] = 1;
      for (Index s : mesh.edge_patch(e)) queue.push_back(s);
    }
  }

  std::vector<Point> points;
  for (const Vertex& v : mesh.vertices()) points.push_back(v.coords);
  std::vector<Index> edge_midpoint(mesh.num_edges(), kNoIndex);
  for (const Edge& e : mesh.edges()) {
    if (!edge_marked[e.id]) continue;
    edge_midpoint[e.id] = static_cast<Index>(points.size());
    points.push_back(midpoint(mesh.coords(e.vertex_ids[0]), mesh.coords(e.vertex_ids[1])));
  }

  const auto marked_midpoint = [&](Index a, Index b) -> Index {
    if (a >= mesh.num_vertices() || b >= mesh.num_vertices()) return kNoIndex;
    const auto e = mesh.find_edge(a, b);
    return e ? edge_midpoint[*e] : kNoIndex;
  };

  std::vector<std::array<Index, 3>> triangles;
  std::vector<Subdomain> tags;
  std::vector<Index> parents;
  triangles.reserve(mesh.num_triangles() + 4 * marked.size());

  // Bisects (peak, a, b) on a--b while that edge is marked; children inherit
  // the parent's remaining edges as their refinement edges.
  const auto bisect = [&](auto&& self, const std::array<Index, 3>& tri, const Triangle& root) -> void {
    const Index m = marked_midpoint(tri[1], tri[2]);
    if (m == kNoIndex) {
      triangles.push_back(tri);
      tags.push_back(root.subdomain);
      parents.push_back(root.id);
      return;
    }
    self(self, {m, tri[2], tri[0]}, root);
    self(self, {m, tri[0], tri[1]}, root);
  };
  for (const Triangle& t : mesh.triangles()) bisect(bisect, t.vertex_ids, t);

  return Mesh::from_triangles(std::move(points), std::move(triangles), std::move(tags), false,
                              mesh.generation() + 1, std::move(parents), mesh.initial_shape_constant());
}

std::vector<std::string> mesh_defects(const Mesh& mesh, Geometry geometry) {
  std::vector<std::string> defects;
  for (const Triangle& t : mesh.triangles()) {
    if (!(t.area > 0.0)) defects.push_back(fmt::format("triangle {} has non-positive area {}", t.id, t.area));
    for (Index v : t.vertex_ids) {
      if (!geometry::in_closure(geometry, t.subdomain, mesh.coords(v))) {
        defects.push_back(fmt::format("triangle {} vertex {} outside closure of its subdomain", t.id, v));
      }
    }
  }
  for (const Edge& e : mesh.edges()) {
    const Point a = mesh.coords(e.vertex_ids[0]);
    const Point b = mesh.coords(e.vertex_ids[1]);
    const Point mid = midpoint(a, b);
    if (e.kind == EdgeKind::Boundary && !geometry::on_boundary(mid)) {
      defects.push_back(fmt::format("edge {} has one triangle but is not on the outer boundary", e.id));
    }
    if (e.kind == EdgeKind::Interior && geometry::on_boundary(mid) && geometry::on_boundary(a) &&
        geometry::on_boundary(b)) {
      defects.push_back(fmt::format("boundary edge {} has two triangles", e.id));
    }
    if (e.on_interface != (geometry::on_interface(geometry, a) && geometry::on_interface(geometry, b) &&
                           geometry::on_interface(geometry, mid) && e.kind == EdgeKind::Interior)) {
      defects.push_back(fmt::format("edge {} interface classification disagrees with geometry", e.id));
    }
    if (e.kind == EdgeKind::Interior) {
      int outward = 0;
      for (Index t : e.triangles) {
        const auto& v = mesh.triangle(t).vertex_ids;
        Point centroid = (1.0 / 3.0) * (mesh.coords(v[0]) + mesh.coords(v[1]) + mesh.coords(v[2]));
        if (dot(e.normal, mid - centroid) > 0.0) ++outward;
      }
      if (outward != 1) defects.push_back(fmt::format("edge {} normal is not outward for exactly one side", e.id));
    }
  }
  for (const Vertex& v : mesh.vertices()) {
    if (v.on_boundary != geometry::on_boundary(v.coords)) {
      defects.push_back(fmt::format("vertex {} boundary flag disagrees with geometry", v.id));
    }
    if (v.on_interface && !geometry::on_interface(geometry, v.coords)) {
      defects.push_back(fmt::format("vertex {} flagged on interface but off Sigma", v.id));
    }
  }
  const double area = mesh.total_area();
  if (std::abs(area - 4.0) > 4.0 * 1e-12) {
    defects.push_back(fmt::format("triangle areas sum to {:.17g}, expected 4", area));
  }
  return defects;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << fmt::format("vertices {} triangles {} edges {}\n", mesh.num_vertices(), mesh.num_triangles(),
                     mesh.num_edges());
  for (const Vertex& v : mesh.vertices()) {
    const int flags = (v.on_boundary ? 1 : 0) | (v.on_interface ? 2 : 0);
    out << fmt::format("v {} {:.17g} {:.17g} {}\n", v.id, v.coords.x, v.coords.y, flags);
  }
  for (const Triangle& t : mesh.triangles()) {
    out << fmt::format("t {} {} {} {} {}\n", t.id, t.vertex_ids[0], t.vertex_ids[1], t.vertex_ids[2],
                       to_string(t.subdomain));
  }
  if (!out) throw IoError("failed writing mesh");
}

Mesh read_mesh(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty mesh stream");
  std::istringstream header(line);
  std::string w0, w1, w2;
  long long nv = -1, nt = -1, ne = -1;
  header >> w0 >> nv >> w1 >> nt >> w2 >> ne;
  if (!header || w0 != "vertices" || w1 != "triangles" || w2 != "edges" || nv < 0 || nt < 0) {
    throw IoError("malformed mesh header: '" + line + "'");
  }
  std::vector<Point> points(static_cast<std::size_t>(nv));
  std::vector<std::array<Index, 3>> triangles(static_cast<std::size_t>(nt));
  std::vector<Subdomain> tags(static_cast<std::size_t>(nt));
  for (long long k = 0; k < nv; ++k) {
    if (!std::getline(in, line)) throw IoError("truncated vertex block");
    std::istringstream row(line);
    std::string tag;
    long long id = -1;
    int flags = 0;
    Point p;
    row >> tag >> id >> p.x >> p.y >> flags;
    if (!row || tag != "v" || id != k) throw IoError("malformed vertex line: '" + line + "'");
    points[k] = p;
  }
  for (long long k = 0; k < nt; ++k) {
    if (!std::getline(in, line)) throw IoError("truncated triangle block");
    std::istringstream row(line);
    std::string tag, sub;
    long long id = -1;
    std::array<Index, 3> v{};
    row >> tag >> id >> v[0] >> v[1] >> v[2] >> sub;
    if (!row || tag != "t" || id != k || (sub != "plus" && sub != "minus")) {
      throw IoError("malformed triangle line: '" + line + "'");
    }
    triangles[k] = v;
    tags[k] = sub == "plus" ? Subdomain::Plus : Subdomain::Minus;
  }
  Mesh mesh = Mesh::from_triangles(std::move(points), std::move(triangles), std::move(tags), false);
  if (ne >= 0 && mesh.num_edges() != ne) {
    throw IoError(fmt::format("edge count mismatch: header says {}, derived {}", ne, mesh.num_edges()));
  }
  return mesh;
}

}  // namespace signfem
