#include "dpg/assembly.hpp"

#include "dpg/basis.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace dpg {

namespace {

// Terms are collected with a signed index: i >= 0 is free dof i, i < 0 is
// pinned dof -1 - i.
using Expansion = std::vector<DofTerm>;

void add_scaled(Expansion& out, const Expansion& in, double scale) {
  for (const DofTerm& t : in) out.push_back({t.index, scale * t.coef});
}

Expansion compress(Expansion terms) {
  std::sort(terms.begin(), terms.end(), [](const DofTerm& a, const DofTerm& b) { return a.index < b.index; });
  Expansion out;
  for (const DofTerm& t : terms) {
    if (!out.empty() && out.back().index == t.index)
      out.back().coef += t.coef;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const DofTerm& t) { return t.coef == 0.0; });
  return out;
}

// Numbering of trace dofs on the conforming skeleton together with the
// constraint expansion of hanging vertices and hanging-edge children.
class TraceNumbering {
 public:
  TraceNumbering(const Mesh& mesh, const DegreeMap& degrees) : mesh_(mesh), degrees_(degrees) {
    const auto n_edges = mesh.edges().size();
    trace_edge_.assign(n_edges, 0);
    for (int e : mesh.active_edges()) {
      const int parent = mesh.edge(e).parent;
      if (parent >= 0 && mesh.is_hanging_edge(parent))
        trace_edge_[parent] = 1;
      else
        trace_edge_[e] = 1;
    }
    for (int e = 0; e < static_cast<int>(n_edges); ++e)
      if (mesh.is_hanging_edge(e)) hanging_parent_[mesh.edge(e).midpoint] = e;
    bubble_.assign(n_edges, kNone);
    vertex_.assign(mesh.num_vertices(), kNone);
  }

  bool is_trace_edge(int e) const { return trace_edge_[e] != 0; }
  int trace_degree(int e) const { return degrees_.edge.at(e) + 1; }

  // Signed dof index of component 0; component c adds c (vertices) or
  // c (q - 1) (bubbles).
  std::vector<int> vertex_;
  std::vector<int> bubble_;
  static constexpr int kNone = std::numeric_limits<int>::min();

  Expansion vertex_terms(int v, int comp) const {
    if (!mesh_.is_hanging_vertex(v)) return {{shift(vertex_.at(v), comp), 1.0}};
    const int parent = hanging_parent_.at(v);
    const int q = trace_degree(parent);
    const Eigen::VectorXd at_mid = edge_basis_eval(q, 0.0);
    Expansion out;
    for (int k = 0; k <= q; ++k)
      if (at_mid[k] != 0.0) add_scaled(out, master_terms(parent, k, comp), at_mid[k]);
    return out;
  }

  Expansion master_terms(int e, int k, int comp) const {
    const MeshEdge& edge = mesh_.edge(e);
    if (k == 0) return vertex_terms(edge.vertices[0], comp);
    if (k == 1) return vertex_terms(edge.vertices[1], comp);
    const int q = trace_degree(e);
    return {{shift(bubble_.at(e), comp * (q - 1) + k - 2), 1.0}};
  }

  // Expansion of trace basis function i of component `comp` on leaf edge e.
  Expansion leaf_terms(int e, int i, int comp) const {
    const int parent = mesh_.edge(e).parent;
    if (parent < 0 || !mesh_.is_hanging_edge(parent)) return master_terms(e, i, comp);
    const int q = trace_degree(parent);
    const auto& ch = mesh_.edge(parent).children;
    const bool first = ch[0] == e;
    const Eigen::MatrixXd T = restriction(q, first);
    Expansion out;
    for (int k = 0; k <= q; ++k)
      if (T(i, k) != 0.0) add_scaled(out, master_terms(parent, k, comp), T(i, k));
    return out;
  }

 private:
  static int shift(int base, int by) {
    if (base == kNone) throw std::logic_error("trace numbering: dof not numbered");
    return base >= 0 ? base + by : base - by;
  }

  const Eigen::MatrixXd& restriction(int q, bool first) const {
    auto key = std::make_pair(q, first);
    auto it = restriction_cache_.find(key);
    if (it == restriction_cache_.end())
      it = restriction_cache_.emplace(key, first ? restriction_matrix(q, -1.0, 0.0) : restriction_matrix(q, 0.0, 1.0))
               .first;
    return it->second;
  }

  const Mesh& mesh_;
  const DegreeMap& degrees_;
  std::vector<char> trace_edge_;
  std::unordered_map<int, int> hanging_parent_;
  mutable std::map<std::pair<int, bool>, Eigen::MatrixXd> restriction_cache_;
};

// Triplets are flushed into the matrix in batches to bound peak memory.
class TripletAccumulator {
 public:
  TripletAccumulator(int rows, int cols) : matrix_(rows, cols) {}

  void add(int i, int j, double v) {
    triplets_.emplace_back(i, j, v);
    if (triplets_.size() >= kBatch) flush();
  }

  Eigen::SparseMatrix<double> finish() {
    flush();
    matrix_.makeCompressed();
    return std::move(matrix_);
  }

 private:
  static constexpr std::size_t kBatch = std::size_t{1} << 22;

  void flush() {
    if (triplets_.empty()) return;
    Eigen::SparseMatrix<double> batch(matrix_.rows(), matrix_.cols());
    batch.setFromTriplets(triplets_.begin(), triplets_.end());
    if (matrix_.nonZeros() == 0)
      matrix_ = std::move(batch);
    else
      matrix_ += batch;
    triplets_.clear();
  }

  Eigen::SparseMatrix<double> matrix_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

// Dense local-to-global maps for the skeleton block of one element.
struct SkeletonMaps {
  std::vector<int> free_index;    // global free indices (columns of C)
  std::vector<int> pinned_index;  // global pinned indices (columns of Cp)
  Eigen::MatrixXd C;              // n_skeleton_local x free_index.size()
  Eigen::MatrixXd Cp;             // n_skeleton_local x pinned_index.size()
};

SkeletonMaps skeleton_maps(const ElementDofMap& map) {
  SkeletonMaps s;
  for (const auto& terms : map.skeleton_free)
    for (const DofTerm& t : terms) s.free_index.push_back(t.index);
  for (const auto& terms : map.skeleton_pinned)
    for (const DofTerm& t : terms) s.pinned_index.push_back(t.index);
  for (auto* v : {&s.free_index, &s.pinned_index}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  const auto n_local = static_cast<int>(map.skeleton_free.size());
  s.C = Eigen::MatrixXd::Zero(n_local, static_cast<int>(s.free_index.size()));
  s.Cp = Eigen::MatrixXd::Zero(n_local, static_cast<int>(s.pinned_index.size()));
  auto column = [](const std::vector<int>& v, int index) {
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), index) - v.begin());
  };
  for (int r = 0; r < n_local; ++r) {
    for (const DofTerm& t : map.skeleton_free[r]) s.C(r, column(s.free_index, t.index)) += t.coef;
    for (const DofTerm& t : map.skeleton_pinned[r]) s.Cp(r, column(s.pinned_index, t.index)) += t.coef;
  }
  return s;
}

}  // namespace

int DofLayout::count(DofKind kind) const {
  return static_cast<int>(std::count(kinds.begin(), kinds.end(), kind));
}

Eigen::VectorXd DofLayout::local_coefficients(std::size_t i, const Eigen::VectorXd& x_free,
                                              const Eigen::VectorXd& pinned_values) const {
  const ElementDofMap& map = elements.at(i);
  const int n_int = map.trial.n_interior();
  Eigen::VectorXd x(map.trial.size);
  x.head(n_int) = x_free.segment(map.interior_offset, n_int);
  for (std::size_t r = 0; r < map.skeleton_free.size(); ++r) {
    double v = 0.0;
    for (const DofTerm& t : map.skeleton_free[r]) v += t.coef * x_free[t.index];
    for (const DofTerm& t : map.skeleton_pinned[r]) v += t.coef * pinned_values[t.index];
    x[n_int + static_cast<int>(r)] = v;
  }
  return x;
}

DofLayout build_dof_layout(const Mesh& mesh, const DegreeMap& degrees) {
  DofLayout layout;
  TraceNumbering numbering(mesh, degrees);

  int next_free = 0;
  auto push_free = [&](DofKind kind, int n) {
    const int start = next_free;
    next_free += n;
    layout.kinds.insert(layout.kinds.end(), n, kind);
    return start;
  };

  for (int k : mesh.active_elements()) {
    ElementDofMap map;
    map.element = k;
    map.trial = make_trial_layout(mesh, degrees, k);
    map.interior_offset = push_free(DofKind::stress, 3 * map.trial.n_scalar);
    push_free(DofKind::displacement, 2 * map.trial.n_scalar);
    layout.elements.push_back(std::move(map));
  }
  layout.num_interior = next_free;

  const auto n_edges = static_cast<int>(mesh.edges().size());
  std::vector<char> vertex_used(mesh.num_vertices(), 0);
  for (int e = 0; e < n_edges; ++e)
    if (numbering.is_trace_edge(e))
      for (int v : mesh.edge(e).vertices) vertex_used[v] = 1;

  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) {
    if (!vertex_used[v] || mesh.is_hanging_vertex(v)) continue;
    if (mesh.is_boundary_vertex(v)) {
      numbering.vertex_[v] = -1 - layout.num_pinned;
      layout.pinned_vertices.push_back(mesh.vertex(v));
      layout.pinned_vertex_dof.push_back(layout.num_pinned);
      layout.num_pinned += 2;
    } else {
      numbering.vertex_[v] = push_free(DofKind::trace, 2);
    }
  }

  for (int e = 0; e < n_edges; ++e) {
    if (numbering.is_trace_edge(e)) {
      const int q = numbering.trace_degree(e);
      const int nb = 2 * (q - 1);
      const bool on_boundary = !mesh.is_hanging_edge(e) && mesh.is_boundary_edge(e);
      if (on_boundary) {
        PinnedEdge pe;
        pe.edge = e;
        pe.degree = q;
        pe.a = mesh.vertex(mesh.edge(e).vertices[0]);
        pe.b = mesh.vertex(mesh.edge(e).vertices[1]);
        for (int s = 0; s < 2; ++s) pe.vertex_dofs[s] = -1 - numbering.vertex_[mesh.edge(e).vertices[s]];
        pe.bubble_offset = layout.num_pinned;
        numbering.bubble_[e] = -1 - layout.num_pinned;
        layout.num_pinned += nb;
        layout.pinned_edges.push_back(pe);
      } else {
        numbering.bubble_[e] = push_free(DofKind::trace, nb);
      }
    }
  }

  // Flux unknowns per active leaf edge, both components.
  std::vector<int> flux_offset(n_edges, -1);
  for (int e : mesh.active_edges()) flux_offset[e] = push_free(DofKind::flux, 2 * (degrees.flux_degree(e) + 1));
  layout.num_free = next_free;

  for (ElementDofMap& map : layout.elements) {
    const int n_int = map.trial.n_interior();
    const int n_skel = map.trial.size - n_int;
    map.skeleton_free.assign(n_skel, {});
    map.skeleton_pinned.assign(n_skel, {});
    auto place = [&](int local, const Expansion& terms) {
      for (const DofTerm& t : compress(terms)) {
        if (t.index >= 0)
          map.skeleton_free[local - n_int].push_back(t);
        else
          map.skeleton_pinned[local - n_int].push_back({-1 - t.index, t.coef});
      }
    };
    for (const TrialSegment& seg : map.trial.segments) {
      const int e = seg.segment.edge;
      const int nt = seg.trace_degree + 1;
      for (int c = 0; c < 2; ++c)
        for (int i = 0; i < nt; ++i) place(seg.trace_offset + c * nt + i, numbering.leaf_terms(e, i, c));
      const int nf = seg.flux_degree + 1;
      for (int i = 0; i < 2 * nf; ++i) place(seg.flux_offset + i, {{flux_offset[e] + i, 1.0}});
    }
  }
  return layout;
}

GlobalSystem assemble(const Mesh& mesh, const DegreeMap& degrees, const Material& material, const LoadFunction& load,
                      const DofLayout& layout, const AssemblyOptions& options) {
  GlobalSystem sys;
  sys.size = layout.num_free;
  sys.num_interior = layout.num_interior;
  sys.condensed = options.condense;
  sys.load = Eigen::VectorXd::Zero(sys.size);
  const int n_skel_global = sys.size - sys.num_interior;
  const int dim = sys.condensed ? n_skel_global : sys.size;
  const int shift = sys.condensed ? sys.num_interior : 0;
  TripletAccumulator E(dim, dim);
  TripletAccumulator Ep(sys.size, layout.num_pinned);

  for (const ElementDofMap& map : layout.elements) {
    const LocalSystem local = build_local_system(mesh, degrees, map.element, material, load);
    const LocalStiffness st = local_stiffness(local.gram, local.bmat, local.load);
    const SkeletonMaps s = skeleton_maps(map);
    const int n_int = map.trial.n_interior();
    const int n_sk = map.trial.size - n_int;
    const int off = map.interior_offset;

    const Eigen::MatrixXd K_II = st.matrix.topLeftCorner(n_int, n_int);
    const Eigen::MatrixXd K_IS = st.matrix.topRightCorner(n_int, n_sk);
    const Eigen::MatrixXd K_SS = st.matrix.bottomRightCorner(n_sk, n_sk);
    const Eigen::MatrixXd IS = K_IS * s.C;
    Eigen::MatrixXd SS = s.C.transpose() * K_SS * s.C;
    SS = 0.5 * (SS + SS.transpose()).eval();

    sys.load.segment(off, n_int) += st.rhs.head(n_int);
    const Eigen::VectorXd rhs_s = s.C.transpose() * st.rhs.tail(n_sk);
    for (std::size_t a = 0; a < s.free_index.size(); ++a) sys.load[s.free_index[a]] += rhs_s[static_cast<int>(a)];

    if (!s.pinned_index.empty()) {
      const Eigen::MatrixXd IP = K_IS * s.Cp;
      const Eigen::MatrixXd SP = s.C.transpose() * K_SS * s.Cp;
      for (std::size_t b = 0; b < s.pinned_index.size(); ++b) {
        const int jb = static_cast<int>(b);
        for (int i = 0; i < n_int; ++i) Ep.add(off + i, s.pinned_index[b], IP(i, jb));
        for (std::size_t a = 0; a < s.free_index.size(); ++a)
          Ep.add(s.free_index[a], s.pinned_index[b], SP(static_cast<int>(a), jb));
      }
    }

    const auto n_f = static_cast<int>(s.free_index.size());
    if (!sys.condensed) {
      for (int j = 0; j < n_int; ++j)
        for (int i = 0; i < n_int; ++i) E.add(off + i, off + j, K_II(i, j));
      for (int a = 0; a < n_f; ++a)
        for (int i = 0; i < n_int; ++i) {
          E.add(off + i, s.free_index[a], IS(i, a));
          E.add(s.free_index[a], off + i, IS(i, a));
        }
      for (int b = 0; b < n_f; ++b)
        for (int a = 0; a < n_f; ++a) E.add(s.free_index[a], s.free_index[b], SS(a, b));
    } else {
      InteriorBlock block;
      block.offset = off;
      block.size = n_int;
      block.factor.compute(K_II);
      if (block.factor.info() != Eigen::Success)
        throw FactorizationError("assemble: interior block is not positive definite");
      const Eigen::MatrixXd X = block.factor.solve(IS);
      Eigen::MatrixXd S = SS - IS.transpose() * X;
      S = 0.5 * (S + S.transpose()).eval();
      for (int b = 0; b < n_f; ++b)
        for (int a = 0; a < n_f; ++a) E.add(s.free_index[a] - shift, s.free_index[b] - shift, S(a, b));
      block.coupling = IS;
      block.skeleton = s.free_index;
      sys.blocks.push_back(std::move(block));
    }
  }
  sys.matrix = E.finish();
  sys.coupling = Ep.finish();
  sys.pinned_values = Eigen::VectorXd::Zero(layout.num_pinned);
  sys.rhs = sys.load;
  return sys;
}

Eigen::VectorXd dirichlet_values(const DofLayout& layout, const BoundaryData& data) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(layout.num_pinned);
  for (std::size_t k = 0; k < layout.pinned_vertices.size(); ++k)
    g.segment(layout.pinned_vertex_dof[k], 2) = data(layout.pinned_vertices[k]);

  for (const PinnedEdge& pe : layout.pinned_edges) {
    const int q = pe.degree;
    if (q < 2) continue;
    const Eigen::Vector2d ga = data(pe.a);
    const Eigen::Vector2d gb = data(pe.b);
    const QuadratureRule rule = gauss_rule(q + 6);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(q - 1, 2);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double t = rule.points[k];
      const Eigen::VectorXd phi = edge_basis_eval(q, t);
      const Point x = 0.5 * (1.0 - t) * pe.a + 0.5 * (1.0 + t) * pe.b;
      const Eigen::Vector2d r = data(x) - phi[0] * ga - phi[1] * gb;
      for (int i = 2; i <= q; ++i) rhs.row(i - 2) += rule.weights[k] * phi[i] * r.transpose();
    }
    const Eigen::MatrixXd M = line_mass_matrix(q).bottomRightCorner(q - 1, q - 1);
    const Eigen::MatrixXd coef = M.llt().solve(rhs);
    for (int c = 0; c < 2; ++c) g.segment(pe.bubble_offset + c * (q - 1), q - 1) = coef.col(c);
  }
  return g;
}

void apply_dirichlet(GlobalSystem& system, const DofLayout& layout, const BoundaryData& data) {
  system.pinned_values = dirichlet_values(layout, data);
  system.rhs = system.load - system.coupling * system.pinned_values;
}

struct SpdSolver::Impl {
  const GlobalSystem* system = nullptr;
  SolverKind kind = SolverKind::cholesky;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;

  Eigen::VectorXd solve_matrix(const Eigen::VectorXd& v) const {
    Eigen::VectorXd x;
    if (kind == SolverKind::cholesky) {
      x = llt.solve(v);
    } else {
      x = cg.solve(v);
      if (cg.info() != Eigen::Success) throw FactorizationError("conjugate gradient did not converge");
    }
    if (!x.allFinite()) throw FactorizationError("global solve produced non-finite values");
    return x;
  }
};

SpdSolver::SpdSolver(const GlobalSystem& system, SolverKind kind) : impl_(std::make_unique<Impl>()) {
  impl_->system = &system;
  impl_->kind = kind;
  if (system.matrix.rows() == 0) return;
  if (kind == SolverKind::cholesky) {
    impl_->llt.compute(system.matrix);
    if (impl_->llt.info() != Eigen::Success) throw FactorizationError("global matrix is not positive definite");
  } else {
    impl_->cg.setTolerance(1e-12);
    impl_->cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * system.matrix.rows()));
    impl_->cg.compute(system.matrix);
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& v) const {
  const GlobalSystem& sys = *impl_->system;
  if (v.size() != sys.size) throw std::invalid_argument("SpdSolver::solve: size mismatch");
  if (!sys.condensed) return sys.matrix.rows() == 0 ? Eigen::VectorXd(v) : impl_->solve_matrix(v);

  // Reduce the right-hand side onto the skeleton, solve, then recover the
  // interior unknowns element by element.
  const int n_int = sys.num_interior;
  Eigen::VectorXd reduced = v.tail(sys.size - n_int);
  for (const InteriorBlock& b : sys.blocks) {
    const Eigen::VectorXd y = b.factor.solve(v.segment(b.offset, b.size));
    const Eigen::VectorXd contrib = b.coupling.transpose() * y;
    for (std::size_t a = 0; a < b.skeleton.size(); ++a) reduced[b.skeleton[a] - n_int] -= contrib[static_cast<int>(a)];
  }
  Eigen::VectorXd x(sys.size);
  x.tail(sys.size - n_int) = sys.matrix.rows() == 0 ? reduced : impl_->solve_matrix(reduced);
  for (const InteriorBlock& b : sys.blocks) {
    Eigen::VectorXd r = v.segment(b.offset, b.size);
    for (std::size_t a = 0; a < b.skeleton.size(); ++a) r -= b.coupling.col(static_cast<int>(a)) * x[b.skeleton[a]];
    x.segment(b.offset, b.size) = b.factor.solve(r);
  }
  return x;
}

Eigen::VectorXd solve_spd(const GlobalSystem& system, SolverKind kind) {
  return SpdSolver(system, kind).solve(system.rhs);
}

std::vector<double> error_indicators(const Mesh& mesh, const DegreeMap& degrees, const Material& material,
                                     const LoadFunction& load, const DofLayout& layout, const Eigen::VectorXd& x_free,
                                     const Eigen::VectorXd& pinned_values) {
  std::vector<double> eta(mesh.elements().size(), 0.0);
  for (std::size_t i = 0; i < layout.elements.size(); ++i) {
    const int k = layout.elements[i].element;
    const LocalSystem local = build_local_system(mesh, degrees, k, material, load);
    const Eigen::VectorXd x = layout.local_coefficients(i, x_free, pinned_values);
    eta[k] = error_representation(local.gram, local.bmat, local.load, x).eta;
  }
  return eta;
}

}  // namespace dpg
