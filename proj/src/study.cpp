#include "dpg/study.hpp"

#include "dpg/basis.hpp"
#include "dpg/dpg_core.hpp"
#include "dpg/method2.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace dpg {

namespace {

struct QuadPoint {
  Point ref;
  Point x;
  double weight;  // includes |J|
};

// Index of the element vertex that coincides with p, or -1.
int vertex_at(const Mesh& mesh, int element, const Point& p) {
  const auto& v = mesh.element(element).vertices;
  for (int k = 0; k < 4; ++k)
    if ((mesh.vertex(v[k]) - p).norm() <= 1e-12) return k;
  return -1;
}

void add_box(const Mesh& mesh, int element, const QuadratureRule2D& rule, double x0, double x1, double y0, double y1,
             std::vector<QuadPoint>& out) {
  const double hx = 0.5 * (x1 - x0);
  const double hy = 0.5 * (y1 - y0);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point ref(x0 + hx * (rule.points[q][0] + 1.0), y0 + hy * (rule.points[q][1] + 1.0));
    const auto [x, J] = mesh.reference_map(element, ref);
    out.push_back({ref, x, rule.weights[q] * hx * hy * J.determinant()});
  }
}

// Tensor Gauss points on an element; if a corner is the singular point the
// square is split geometrically towards that corner.
std::vector<QuadPoint> error_points(const Mesh& mesh, int element, int n, const std::optional<Point>& singular,
                                    int levels) {
  const QuadratureRule2D rule = tensor_gauss_rule(n);
  std::vector<QuadPoint> out;
  const int corner = singular ? vertex_at(mesh, element, *singular) : -1;
  if (corner < 0) {
    add_box(mesh, element, rule, -1.0, 1.0, -1.0, 1.0, out);
    return out;
  }
  const double cx = (corner == 1 || corner == 2) ? 1.0 : -1.0;
  const double cy = corner >= 2 ? 1.0 : -1.0;
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  for (int level = 0; level < levels; ++level) {
    const double mx = 0.5 * (x0 + x1);
    const double my = 0.5 * (y0 + y1);
    const double xs[3] = {x0, mx, x1};
    const double ys[3] = {y0, my, y1};
    const int ci = cx > 0 ? 1 : 0;
    const int cj = cy > 0 ? 1 : 0;
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i)
        if (i != ci || j != cj) add_box(mesh, element, rule, xs[i], xs[i + 1], ys[j], ys[j + 1], out);
    x0 = xs[ci];
    x1 = xs[ci + 1];
    y0 = ys[cj];
    y1 = ys[cj + 1];
  }
  add_box(mesh, element, rule, x0, x1, y0, y1, out);
  return out;
}

int points_for(const DegreeMap& degrees, int element, const ErrorQuadrature& quadrature) {
  return quadrature.points > 0 ? quadrature.points : degrees.test_degree(element) + 2;
}

// sigma as (11, 12, 22) and u as (1, 2).
using Fields = Eigen::Matrix<double, 5, 1>;

Fields pack(const FieldValues& f) {
  Fields v;
  v << f.sigma(0, 0), 0.5 * (f.sigma(0, 1) + f.sigma(1, 0)), f.sigma(1, 1), f.u[0], f.u[1];
  return v;
}

ErrorPair split_norms(const Fields& diff_squared) {
  return {std::sqrt(diff_squared[0] + 2.0 * diff_squared[1] + diff_squared[2]),
          std::sqrt(diff_squared[3] + diff_squared[4])};
}

double combined(const ErrorPair& e) { return std::hypot(e.sigma, e.u); }

}  // namespace

void validate(const StudyConfig& config) {
  if (config.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (config.p < 1) throw std::invalid_argument("p must be >= 1");
  if (config.delta_p < 1) throw std::invalid_argument("delta_p must be >= 1");
  if (config.method != 1 && config.method != 2) throw std::invalid_argument("method must be 1 or 2");
  if (!(config.fraction > 0.0 && config.fraction <= 1.0)) throw std::invalid_argument("fraction must be in (0, 1]");
  if (config.n0 < 0) throw std::invalid_argument("n0 must be >= 0");
  if (config.lambda && !(*config.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (config.mu && !(*config.mu > 0.0)) throw std::invalid_argument("mu must be > 0");
}

Material study_material(const StudyConfig& config) {
  // Steel (lambda = 123, mu = 79.3 GPa) in units of its shear modulus: the
  // Poisson ratio and the corner exponent are those of steel, while the
  // unweighted test norm sees stress and displacement on the same scale.
  if (config.benchmark == Benchmark::lshape)
    return make_isotropic(config.lambda.value_or(123.0 / 79.3), config.mu.value_or(1.0), PlaneModel::plane_stress);
  return make_isotropic(config.lambda.value_or(1.0), config.mu.value_or(1.0), PlaneModel::plane_strain);
}

ExactSolution study_benchmark(const StudyConfig& config, const Material& material) {
  return config.benchmark == Benchmark::lshape ? lshape_benchmark(material) : smooth_benchmark(material);
}

Mesh study_initial_mesh(const StudyConfig& config) {
  if (config.benchmark == Benchmark::lshape) return build_initial_mesh(Domain::l_shape, config.n0 > 0 ? config.n0 : 1);
  return build_initial_mesh(Domain::unit_square, config.n0 > 0 ? config.n0 : 2);
}

ErrorPair l2_errors(const Mesh& mesh, const DegreeMap& degrees, const Solution& solution, const ExactSolution& exact,
                    const ErrorQuadrature& quadrature) {
  if (solution.layout == nullptr) throw std::invalid_argument("l2_errors: solution has no layout");
  const DofLayout& layout = *solution.layout;
  Fields sum = Fields::Zero();
  for (std::size_t i = 0; i < layout.elements.size(); ++i) {
    const ElementDofMap& map = layout.elements[i];
    const Eigen::VectorXd x = layout.local_coefficients(i, solution.x_free, solution.pinned);
    const int n = map.trial.n_scalar;
    Eigen::Matrix<double, 5, Eigen::Dynamic> coef(5, n);
    for (int c = 0; c < 3; ++c) coef.row(c) = x.segment(map.trial.sigma_offset(c), n).transpose();
    for (int c = 0; c < 2; ++c) coef.row(3 + c) = x.segment(map.trial.u_offset(c), n).transpose();
    const auto points = error_points(mesh, map.element, points_for(degrees, map.element, quadrature),
                                     exact.singular_point, quadrature.corner_levels);
    for (const QuadPoint& qp : points) {
      const QuadBasisValues phi = q_basis_eval(map.trial.degree, qp.ref.x(), qp.ref.y());
      const Fields diff = coef * phi.values - pack(exact.fields(qp.x));
      sum += qp.weight * diff.cwiseAbs2();
    }
  }
  return split_norms(sum);
}

ErrorPair best_approximation_errors(const Mesh& mesh, const DegreeMap& degrees, const ExactSolution& exact,
                                    const ErrorQuadrature& quadrature) {
  Fields sum = Fields::Zero();
  for (int k : mesh.active_elements()) {
    const int p = degrees.element.at(k);
    const int n = quad_dim(p);
    const auto points = error_points(mesh, k, points_for(degrees, k, quadrature), exact.singular_point,
                                     quadrature.corner_levels);
    std::vector<Eigen::VectorXd> phi;
    std::vector<Fields> values;
    phi.reserve(points.size());
    values.reserve(points.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 5);
    for (const QuadPoint& qp : points) {
      phi.push_back(q_basis_eval(p, qp.ref.x(), qp.ref.y()).values);
      values.push_back(pack(exact.fields(qp.x)));
      M.noalias() += qp.weight * phi.back() * phi.back().transpose();
      rhs.noalias() += qp.weight * phi.back() * values.back().transpose();
    }
    const Eigen::MatrixXd coef = M.llt().solve(rhs);  // n x 5
    for (std::size_t q = 0; q < points.size(); ++q) {
      const Fields diff = coef.transpose() * phi[q] - values[q];
      sum += points[q].weight * diff.cwiseAbs2();
    }
  }
  return split_norms(sum);
}

ErrorPair exact_norms(const Mesh& mesh, const DegreeMap& degrees, const ExactSolution& exact,
                      const ErrorQuadrature& quadrature) {
  Fields sum = Fields::Zero();
  for (int k : mesh.active_elements())
    for (const QuadPoint& qp :
         error_points(mesh, k, points_for(degrees, k, quadrature), exact.singular_point, quadrature.corner_levels))
      sum += qp.weight * pack(exact.fields(qp.x)).cwiseAbs2();
  return split_norms(sum);
}

std::vector<int> greedy_mark(const Mesh& mesh, const std::vector<double>& indicators, double fraction) {
  double max_eta = 0.0;
  for (int k : mesh.active_elements()) max_eta = std::max(max_eta, indicators.at(k));
  std::vector<int> marked;
  if (max_eta <= 0.0) return marked;
  for (int k : mesh.active_elements())
    if (indicators.at(k) >= fraction * max_eta) marked.push_back(k);
  return marked;
}

HpSplit hp_decide(const std::vector<int>& marked, const Mesh& mesh, const std::optional<Point>& singular_point) {
  HpSplit split;
  for (int k : marked) {
    if (singular_point && vertex_at(mesh, k, *singular_point) >= 0)
      split.h_set.push_back(k);
    else
      split.p_set.push_back(k);
  }
  return split;
}

double observed_rate(const std::vector<double>& x, const std::vector<double>& y, int last) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("observed_rate: need two or more points");
  const int n = std::min<int>(last, static_cast<int>(x.size()));
  const std::size_t start = x.size() - static_cast<std::size_t>(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = start; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = start; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

StepResult solve_step(const Mesh& mesh, const DegreeMap& degrees, const StudyConfig& config,
                      const Material& material, const ExactSolution& exact) {
  const auto start = std::chrono::steady_clock::now();
  const DofLayout layout = build_dof_layout(mesh, degrees);
  LoadFunction load;
  if (config.benchmark == Benchmark::smooth) load = [&exact](const Point& x) { return exact.fields(x).f; };

  AssemblyOptions options;
  options.condense = config.condense;
  GlobalSystem system = assemble(mesh, degrees, material, load, layout, options);
  apply_dirichlet(system, layout, exact.displacement);

  Solution solution;
  solution.layout = &layout;
  solution.pinned = system.pinned_values;
  if (config.method == 1) {
    solution.x_free = solve_spd(system, config.solver);
  } else {
    const BorderedSystem bordered = make_bordered_system(mesh, degrees, material, layout, system);
    solution.x_free = solve_second_method(bordered, config.solver).x;
  }

  StepResult result;
  result.indicators = error_indicators(mesh, degrees, material, load, layout, solution.x_free, solution.pinned);
  double eta2 = 0.0;
  for (double e : result.indicators) eta2 += e * e;

  const ErrorPair err = l2_errors(mesh, degrees, solution, exact);
  const ErrorPair norm = exact_norms(mesh, degrees, exact);
  ReportRow& row = result.row;
  row.dofs = layout.num_free;
  row.h_min = std::numeric_limits<double>::infinity();
  for (int k : mesh.active_elements()) row.h_min = std::min(row.h_min, mesh.size(k));
  row.p_max = degrees.max_element_degree(mesh);
  row.err_sigma = err.sigma;
  row.err_u = err.u;
  row.err_combined = combined(err) / combined(norm);
  row.eta = std::sqrt(eta2);
  if (config.best_approximation) row.best_combined = combined(best_approximation_errors(mesh, degrees, exact)) / combined(norm);
  if (config.timing) row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

StudyResult run_convergence_study(const StudyConfig& config, const StepObserver& observer) {
  validate(config);
  const Material material = study_material(config);
  const ExactSolution exact = study_benchmark(config, material);
  Mesh mesh = study_initial_mesh(config);
  DegreeMap degrees = DegreeMap::uniform(mesh, config.p, config.delta_p);

  StudyResult result;
  for (int step = 0; step < config.steps; ++step) {
    StepResult s;
    try {
      s = solve_step(mesh, degrees, config, material, exact);
    } catch (const FactorizationError& e) {
      result.failure = "step " + std::to_string(step) + ": " + e.what();
      return result;
    } catch (const BorderedSolveError& e) {
      result.failure = "step " + std::to_string(step) + ": " + e.what();
      return result;
    }
    s.row.step = step;
    result.rows.push_back(s.row);
    if (observer) observer(mesh, degrees, s);
    if (step + 1 == config.steps) break;

    switch (config.mode) {
      case StudyMode::uniform_h: {
        Mesh fine = refine_uniform(mesh);
        degrees = DegreeMap::inherit(fine, degrees);
        mesh = std::move(fine);
        break;
      }
      case StudyMode::uniform_p:
        for (int k : mesh.active_elements()) ++degrees.element[k];
        degrees.apply_maximum_rule(mesh);
        break;
      case StudyMode::adaptive_h: {
        const std::vector<int> marked = greedy_mark(mesh, s.indicators, config.fraction);
        Mesh fine = refine_marked(mesh, marked);
        degrees = DegreeMap::inherit(fine, degrees);
        mesh = std::move(fine);
        break;
      }
      case StudyMode::adaptive_hp: {
        const HpSplit split = hp_decide(greedy_mark(mesh, s.indicators, config.fraction), mesh, exact.singular_point);
        for (int k : split.p_set) ++degrees.element[k];
        Mesh fine = refine_marked(mesh, split.h_set);
        degrees = DegreeMap::inherit(fine, degrees);
        mesh = std::move(fine);
        break;
      }
    }
  }
  return result;
}

void write_csv(std::ostream& out, const StudyResult& result) {
  out << "step,dofs,h_min,p_max,err_sigma,err_u,err_combined_rel,eta,best_combined_rel,wall_time\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(12);
  for (const ReportRow& r : result.rows)
    out << r.step << ',' << r.dofs << ',' << r.h_min << ',' << r.p_max << ',' << r.err_sigma << ',' << r.err_u << ','
        << r.err_combined << ',' << r.eta << ',' << r.best_combined << ',' << r.wall_time << '\n';
  if (result.failure) out << "# solver failure at " << *result.failure << '\n';
  out.flags(flags);
  out.precision(precision);
}

}  // namespace dpg
