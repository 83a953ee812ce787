#include "dpg/mesh.hpp"

#include "dpg/basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace dpg {

Domain parse_domain(std::string_view name) {
  if (name == "unit_square" || name == "smooth") return Domain::unit_square;
  if (name == "l_shape" || name == "lshape") return Domain::l_shape;
  throw std::invalid_argument("unknown domain: " + std::string(name));
}

namespace {

int child_containing(const std::vector<MeshEdge>& edges, int edge, int vertex) {
  const MeshEdge& e = edges[edge];
  const MeshEdge& c0 = edges[e.children[0]];
  if (c0.vertices[0] == vertex || c0.vertices[1] == vertex) return e.children[0];
  return e.children[1];
}

}  // namespace

Mesh Mesh::from_quads(std::vector<Point> vertices, std::span<const std::array<int, 4>> quads) {
  Mesh mesh;
  mesh.vertices_ = std::move(vertices);
  const int nv = static_cast<int>(mesh.vertices_.size());
  std::map<std::pair<int, int>, int> edge_ids;
  auto edge_between = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto [it, inserted] = edge_ids.try_emplace(key, static_cast<int>(mesh.edges_.size()));
    if (inserted) {
      MeshEdge e;
      e.vertices = {a, b};
      mesh.edges_.push_back(e);
    }
    return it->second;
  };
  for (const auto& q : quads) {
    MeshElement el;
    el.vertices = q;
    for (int v : q)
      if (v < 0 || v >= nv) throw std::invalid_argument("from_quads: vertex index out of range");
    for (int s = 0; s < 4; ++s) el.edges[s] = edge_between(el.vertices[s], el.vertices[(s + 1) % 4]);
    mesh.elements_.push_back(el);
  }
  mesh.finalize();
  for (int k : mesh.active_elements_)
    for (double xi : {-1.0, 1.0})
      for (double eta : {-1.0, 1.0})
        if (mesh.reference_map(k, Point(xi, eta)).second.determinant() <= 0.0)
          throw std::invalid_argument("from_quads: element " + std::to_string(k) + " is not convex and counterclockwise");
  return mesh;
}

Mesh Mesh::build(Domain domain, int n_per_side) {
  if (n_per_side < 1) throw std::invalid_argument("build_initial_mesh: n_per_side must be >= 1");
  // Grid over [x0, x0 + cells*h]^2 with cells skipped by `keep`.
  const int cells = domain == Domain::unit_square ? n_per_side : 2 * n_per_side;
  const double origin = domain == Domain::unit_square ? 0.0 : -1.0;
  const double h = 1.0 / n_per_side;
  auto keep = [&](int i, int j) {
    if (domain == Domain::unit_square) return true;
    return !(i >= n_per_side && j < n_per_side);  // drop {x > 0, y < 0}
  };

  std::vector<Point> vertices;
  std::map<std::pair<int, int>, int> vertex_ids;
  auto vertex_at = [&](int i, int j) {
    auto [it, inserted] = vertex_ids.try_emplace({i, j}, static_cast<int>(vertices.size()));
    if (inserted) vertices.emplace_back(origin + i * h, origin + j * h);
    return it->second;
  };
  std::vector<std::array<int, 4>> quads;
  for (int j = 0; j < cells; ++j)
    for (int i = 0; i < cells; ++i)
      if (keep(i, j)) quads.push_back({vertex_at(i, j), vertex_at(i + 1, j), vertex_at(i + 1, j + 1), vertex_at(i, j + 1)});
  return from_quads(std::move(vertices), quads);
}

bool Mesh::is_active(int element) const {
  return element >= 0 && element < static_cast<int>(elements_.size()) && !elements_[element].refined();
}

std::span<const EdgeNeighbor> Mesh::edge_neighbors(int edge) const { return neighbors_.at(edge); }

double Mesh::normal_sign(int element, int edge) const {
  const auto& nb = neighbors_.at(edge);
  if (nb.empty()) throw std::logic_error("normal_sign: edge is not active");
  int owner = nb[0].element;
  for (const auto& n : nb) owner = std::min(owner, n.element);
  return element == owner ? 1.0 : -1.0;
}

std::vector<SideSegment> Mesh::side_segments(int element, int side) const {
  const MeshElement& el = elements_.at(element);
  const int start = el.vertices[side];
  const int end = el.vertices[(side + 1) % 4];
  const MeshEdge& e = edges_[el.edges[side]];
  auto s_of = [&](int v, int mid) {
    if (v == start) return -1.0;
    if (v == end) return 1.0;
    if (v == mid) return 0.0;
    throw std::logic_error("side_segments: vertex not on side");
  };
  std::vector<SideSegment> out;
  if (!e.split()) {
    out.push_back({el.edges[side], s_of(e.vertices[0], -1), s_of(e.vertices[1], -1)});
  } else {
    for (int c : e.children) {
      const MeshEdge& ce = edges_[c];
      out.push_back({c, s_of(ce.vertices[0], e.midpoint), s_of(ce.vertices[1], e.midpoint)});
    }
  }
  return out;
}

std::pair<Point, Eigen::Matrix2d> Mesh::reference_map(int element, const Point& xi_eta) const {
  if (!is_active(element)) throw std::invalid_argument("reference_map: element is not active");
  const MeshElement& el = elements_[element];
  const double xi = xi_eta[0], eta = xi_eta[1];
  const double N[4] = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                       0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
  const double dNxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
  const double dNeta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
  Point x = Point::Zero();
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  for (int k = 0; k < 4; ++k) {
    const Point& X = vertices_[el.vertices[k]];
    x += N[k] * X;
    J.col(0) += dNxi[k] * X;
    J.col(1) += dNeta[k] * X;
  }
  return {x, J};
}

std::pair<Point, double> Mesh::side_normal(int element, int side) const {
  const MeshElement& el = elements_.at(element);
  const Point d = vertices_[el.vertices[(side + 1) % 4]] - vertices_[el.vertices[side]];
  const double len = d.norm();
  return {Point(d.y(), -d.x()) / len, len};
}

double Mesh::area(int element) const {
  // det J is bilinear, so the 2x2 rule is exact.
  static const QuadratureRule2D rule = tensor_gauss_rule(2);
  double a = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
    a += rule.weights[q] * reference_map(element, Point(rule.points[q][0], rule.points[q][1])).second.determinant();
  return a;
}

double Mesh::size(int element) const { return std::sqrt(area(element)); }

double Mesh::domain_area() const {
  double a = 0.0;
  for (int k : active_elements_) a += area(k);
  return a;
}

void Mesh::validate() const {
  static const QuadratureRule2D rule = tensor_gauss_rule(3);
  for (int k : active_elements_) {
    const MeshElement& el = elements_[k];
    for (int s = 0; s < 4; ++s) {
      const MeshEdge& e = edges_[el.edges[s]];
      if (e.split())
        for (int c : e.children)
          if (edges_[c].split())
            throw std::logic_error("mesh is not 1-irregular at element " + std::to_string(k));
    }
    for (std::size_t q = 0; q < rule.size(); ++q)
      if (reference_map(k, Point(rule.points[q][0], rule.points[q][1])).second.determinant() <= 0.0)
        throw std::logic_error("nonpositive Jacobian in element " + std::to_string(k));
  }
  for (int e : active_edges_) {
    const auto& nb = neighbors_[e];
    if (nb.empty() || nb.size() > 2) throw std::logic_error("edge " + std::to_string(e) + " has bad multiplicity");
    if (nb.size() == 2) {
      const Point n0 = side_normal(nb[0].element, nb[0].side).first;
      const Point n1 = side_normal(nb[1].element, nb[1].side).first;
      if (n0.dot(n1) > -1.0 + 1e-12) throw std::logic_error("edge " + std::to_string(e) + " normals disagree");
    }
  }
}

void Mesh::dump(std::ostream& out, std::span<const int> element_degrees) const {
  for (const Point& v : vertices_) out << "v " << v.x() << ' ' << v.y() << '\n';
  for (int k : active_elements_) {
    const MeshElement& el = elements_[k];
    out << "e " << el.vertices[0] << ' ' << el.vertices[1] << ' ' << el.vertices[2] << ' ' << el.vertices[3]
        << ' ' << (element_degrees.empty() ? 0 : element_degrees[k]) << '\n';
  }
}

void Mesh::split_edge(int edge) {
  if (edges_[edge].split()) return;
  const auto [a, b] = edges_[edge].vertices;
  const int mid = static_cast<int>(vertices_.size());
  vertices_.push_back(0.5 * (vertices_[a] + vertices_[b]));
  const int c0 = static_cast<int>(edges_.size());
  MeshEdge e0, e1;
  e0.vertices = {a, mid};
  e1.vertices = {mid, b};
  e0.parent = e1.parent = edge;
  edges_.push_back(e0);
  edges_.push_back(e1);
  edges_[edge].children = {c0, c0 + 1};
  edges_[edge].midpoint = mid;
}

void Mesh::split_element(int element) {
  if (elements_[element].refined()) return;
  for (int s = 0; s < 4; ++s) split_edge(elements_[element].edges[s]);
  const MeshElement el = elements_[element];
  const auto& v = el.vertices;
  std::array<int, 4> m{};
  for (int s = 0; s < 4; ++s) m[s] = edges_[el.edges[s]].midpoint;
  const int c = static_cast<int>(vertices_.size());
  vertices_.push_back(0.25 * (vertices_[v[0]] + vertices_[v[1]] + vertices_[v[2]] + vertices_[v[3]]));

  // Interior edges run from each side midpoint to the center.
  std::array<int, 4> inner{};
  for (int s = 0; s < 4; ++s) {
    inner[s] = static_cast<int>(edges_.size());
    MeshEdge e;
    e.vertices = {m[s], c};
    edges_.push_back(e);
  }
  auto half = [&](int side, int vertex) { return child_containing(edges_, el.edges[side], vertex); };

  std::array<MeshElement, 4> kids;
  kids[0].vertices = {v[0], m[0], c, m[3]};
  kids[0].edges = {half(0, v[0]), inner[0], inner[3], half(3, v[0])};
  kids[1].vertices = {m[0], v[1], m[1], c};
  kids[1].edges = {half(0, v[1]), half(1, v[1]), inner[1], inner[0]};
  kids[2].vertices = {c, m[1], v[2], m[2]};
  kids[2].edges = {inner[1], half(1, v[2]), half(2, v[2]), inner[2]};
  kids[3].vertices = {m[3], c, m[2], v[3]};
  kids[3].edges = {inner[3], inner[2], half(2, v[3]), half(3, v[3])};

  const int first = static_cast<int>(elements_.size());
  for (int i = 0; i < 4; ++i) {
    kids[i].parent = element;
    kids[i].level = el.level + 1;
    elements_.push_back(kids[i]);
    elements_[element].children[i] = first + i;
  }
}

void Mesh::finalize() {
  active_elements_.clear();
  for (int k = 0; k < static_cast<int>(elements_.size()); ++k)
    if (!elements_[k].refined()) active_elements_.push_back(k);

  neighbors_.assign(edges_.size(), {});
  hanging_edge_.assign(edges_.size(), 0);
  hanging_vertex_.assign(vertices_.size(), 0);
  boundary_vertex_.assign(vertices_.size(), 0);
  for (int k : active_elements_) {
    const MeshElement& el = elements_[k];
    for (int s = 0; s < 4; ++s) {
      const MeshEdge& e = edges_[el.edges[s]];
      if (e.split()) {
        hanging_edge_[el.edges[s]] = 1;
        hanging_vertex_[e.midpoint] = 1;
        for (int c : e.children) neighbors_[c].push_back({k, s});
      } else {
        neighbors_[el.edges[s]].push_back({k, s});
      }
    }
  }
  active_edges_.clear();
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    if (neighbors_[e].empty()) continue;
    active_edges_.push_back(e);
    if (neighbors_[e].size() == 1) {
      boundary_vertex_[edges_[e].vertices[0]] = 1;
      boundary_vertex_[edges_[e].vertices[1]] = 1;
    }
  }
}

Mesh Mesh::refined(std::span<const int> marked) const {
  // Elements that use an edge directly as one of their sides.
  std::vector<std::vector<int>> direct_users(edges_.size());
  for (int k : active_elements_)
    for (int e : elements_[k].edges) direct_users[e].push_back(k);

  std::vector<char> flagged(elements_.size(), 0);
  std::vector<int> stack;
  for (int k : marked) {
    if (!is_active(k)) throw std::invalid_argument("refine_marked: element " + std::to_string(k) + " is not active");
    stack.push_back(k);
  }
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    if (flagged[k]) continue;
    flagged[k] = 1;
    // A coarser neighbor across a half-edge would become 2-irregular.
    for (int e : elements_[k].edges) {
      const int parent = edges_[e].parent;
      if (parent < 0) continue;
      for (int n : direct_users[parent])
        if (!flagged[n]) stack.push_back(n);
    }
  }

  Mesh out = *this;
  for (int k = 0; k < static_cast<int>(flagged.size()); ++k)
    if (flagged[k]) out.split_element(k);
  out.finalize();
  return out;
}

Mesh build_initial_mesh(Domain domain, int n_per_side) { return Mesh::build(domain, n_per_side); }

Mesh refine_uniform(const Mesh& mesh) { return mesh.refined(mesh.active_elements()); }

Mesh refine_marked(const Mesh& mesh, std::span<const int> marked) { return mesh.refined(marked); }

DegreeMap DegreeMap::uniform(const Mesh& mesh, int p, int delta_p) {
  if (p < 1) throw std::invalid_argument("element degree must be >= 1");
  if (delta_p < 1) throw std::invalid_argument("delta_p must be >= 1");
  DegreeMap d;
  d.element.assign(mesh.elements().size(), p);
  d.delta_p = delta_p;
  d.apply_maximum_rule(mesh);
  return d;
}

void DegreeMap::apply_maximum_rule(const Mesh& mesh) {
  edge.assign(mesh.edges().size(), 0);
  for (int e : mesh.active_edges())
    for (const EdgeNeighbor& n : mesh.edge_neighbors(e)) edge[e] = std::max(edge[e], element.at(n.element));
  for (int e = 0; e < static_cast<int>(mesh.edges().size()); ++e)
    if (mesh.is_hanging_edge(e)) {
      const auto& ch = mesh.edge(e).children;
      edge[e] = std::max(edge[ch[0]], edge[ch[1]]);
    }
}

DegreeMap DegreeMap::inherit(const Mesh& fine, const DegreeMap& coarse) {
  DegreeMap d;
  d.delta_p = coarse.delta_p;
  d.element.resize(fine.elements().size());
  for (int k = 0; k < static_cast<int>(fine.elements().size()); ++k) {
    if (k < static_cast<int>(coarse.element.size()))
      d.element[k] = coarse.element[k];
    else
      d.element[k] = d.element.at(fine.element(k).parent);
  }
  d.apply_maximum_rule(fine);
  return d;
}

int DegreeMap::trace_degree(const Mesh& mesh, int leaf_edge) const {
  const int parent = mesh.edge(leaf_edge).parent;
  if (parent >= 0 && mesh.is_hanging_edge(parent)) return edge.at(parent) + 1;
  return edge.at(leaf_edge) + 1;
}

int DegreeMap::max_element_degree(const Mesh& mesh) const {
  int p = 0;
  for (int k : mesh.active_elements()) p = std::max(p, element.at(k));
  return p;
}

}  // namespace dpg
