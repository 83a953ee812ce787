#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace dpg {

using Point = Eigen::Vector2d;

enum class Domain { unit_square, l_shape };

Domain parse_domain(std::string_view name);

/// Quadrilateral with counterclockwise vertices; side k runs from vertex k to
/// vertex (k+1) % 4 and lies on edge `edges[k]`.
struct MeshElement {
  std::array<int, 4> vertices{};
  std::array<int, 4> edges{};
  int parent = -1;
  std::array<int, 4> children{-1, -1, -1, -1};
  int level = 0;
  bool refined() const { return children[0] >= 0; }
};

struct MeshEdge {
  std::array<int, 2> vertices{};
  int parent = -1;
  std::array<int, 2> children{-1, -1};
  int midpoint = -1;
  bool split() const { return children[0] >= 0; }
};

/// A leaf edge as seen from one side of an element. The edge parameter
/// t in [-1,1] (from edge vertex 0 to vertex 1) maps to the side parameter
/// s = s_minus + (s_plus - s_minus) (t + 1) / 2.
struct SideSegment {
  int edge = -1;
  double s_minus = -1.0;
  double s_plus = 1.0;
};

struct EdgeNeighbor {
  int element = -1;
  int side = -1;
};

/// 1-irregular quadrilateral mesh. Immutable once built: refinement returns a
/// new mesh in which existing element, edge and vertex ids are preserved.
class Mesh {
 public:
  static Mesh build(Domain domain, int n_per_side);
  /// Conforming mesh from counterclockwise quadrilaterals given by vertex ids.
  static Mesh from_quads(std::vector<Point> vertices, std::span<const std::array<int, 4>> quads);

  std::span<const Point> vertices() const { return vertices_; }
  std::span<const MeshElement> elements() const { return elements_; }
  std::span<const MeshEdge> edges() const { return edges_; }
  const MeshElement& element(int id) const { return elements_.at(id); }
  const MeshEdge& edge(int id) const { return edges_.at(id); }
  const Point& vertex(int id) const { return vertices_.at(id); }

  /// Leaf elements, ascending id.
  std::span<const int> active_elements() const { return active_elements_; }
  /// Leaf edges that bound at least one active element, ascending id.
  std::span<const int> active_edges() const { return active_edges_; }
  std::size_t num_vertices() const { return vertices_.size(); }

  bool is_active(int element) const;

  /// Active elements touching a leaf edge (1 on the boundary, 2 inside).
  std::span<const EdgeNeighbor> edge_neighbors(int edge) const;
  bool is_boundary_edge(int edge) const { return edge_neighbors(edge).size() == 1; }
  /// True for a split edge that is still a whole side of an active element.
  bool is_hanging_edge(int edge) const { return hanging_edge_.at(edge) != 0; }
  bool is_hanging_vertex(int vertex) const { return hanging_vertex_.at(vertex) != 0; }
  bool is_boundary_vertex(int vertex) const { return boundary_vertex_.at(vertex) != 0; }

  /// +1 if `element` owns the global normal of the leaf edge, -1 otherwise.
  /// The owner is the adjacent active element with the smaller id; on the
  /// boundary the global normal is the outward one.
  double normal_sign(int element, int edge) const;

  /// Leaf segments that make up side `side` of an active element.
  std::vector<SideSegment> side_segments(int element, int side) const;

  /// Bilinear map from [-1,1]^2; returns the physical point and the Jacobian
  /// d(x,y)/d(xi,eta).
  std::pair<Point, Eigen::Matrix2d> reference_map(int element, const Point& xi_eta) const;

  /// Outward unit normal and length of a side of an element.
  std::pair<Point, double> side_normal(int element, int side) const;

  double area(int element) const;
  /// sqrt(area), the element size h.
  double size(int element) const;
  double domain_area() const;

  /// Throws std::logic_error if any structural invariant is violated.
  void validate() const;

  /// Plain text dump: `v x y` and `e v0 v1 v2 v3 pK` lines.
  void dump(std::ostream& out, std::span<const int> element_degrees = {}) const;

  Mesh refined(std::span<const int> marked) const;

 private:
  void split_edge(int edge);
  void split_element(int element);
  void finalize();

  std::vector<Point> vertices_;
  std::vector<MeshElement> elements_;
  std::vector<MeshEdge> edges_;

  std::vector<int> active_elements_;
  std::vector<int> active_edges_;
  std::vector<std::vector<EdgeNeighbor>> neighbors_;
  std::vector<char> hanging_edge_;
  std::vector<char> hanging_vertex_;
  std::vector<char> boundary_vertex_;
};

Mesh build_initial_mesh(Domain domain, int n_per_side);
Mesh refine_uniform(const Mesh& mesh);
/// Splits the marked elements plus whatever closure keeps the mesh 1-irregular.
Mesh refine_marked(const Mesh& mesh, std::span<const int> marked);

/// Polynomial degrees on the active mesh. Edge degrees follow the maximum
/// rule and are stored for every active leaf edge and every hanging edge.
struct DegreeMap {
  std::vector<int> element;  // indexed by element id
  std::vector<int> edge;     // indexed by edge id
  int delta_p = 2;

  static DegreeMap uniform(const Mesh& mesh, int p, int delta_p = 2);

  /// Recomputes edge degrees from element degrees.
  void apply_maximum_rule(const Mesh& mesh);

  /// Copies degrees from `coarse` onto `fine`, children inheriting from
  /// their parent, then applies the maximum rule.
  static DegreeMap inherit(const Mesh& fine, const DegreeMap& coarse);

  int test_degree(int element_id) const { return element.at(element_id) + delta_p; }
  int flux_degree(int edge_id) const { return edge.at(edge_id); }
  /// Trace degree on a leaf edge. Children of a hanging edge carry the
  /// degree of the parent polynomial.
  int trace_degree(const Mesh& mesh, int leaf_edge) const;
  int max_element_degree(const Mesh& mesh) const;
};

}  // namespace dpg
