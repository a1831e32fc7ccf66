#include "hardy/spherical.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace hardy {

namespace {

struct LocalCoordinates {
  double left;
  double right;
  double inverse_width;
};

// Barycentric coordinates of `at` in [lo, hi].  Differences are taken in theta
// near the pole and in the co-angle near pi/2, where each is exact.
LocalCoordinates local_coordinates(const AngularPoint& lo, const AngularPoint& hi, const AngularPoint& at) {
  const bool use_theta = lo.coangle > 0.75;
  const double width = use_theta ? hi.theta - lo.theta : lo.coangle - hi.coangle;
  const double right = use_theta ? (at.theta - lo.theta) / width : (lo.coangle - at.coangle) / width;
  return {1.0 - right, right, 1.0 / width};
}

double end_exponent(const HardyParams& params) {
  return (params.p() - params.cylindrical_order()) / (params.p() - 1.0);
}

void normalize_p(Eigen::VectorXd& x, const FiniteElementSpace& space, double h, double p) {
  const double den = space.quotient(space.to_nodal(x), h, p).denominator;
  if (!(den > 0.0) || !std::isfinite(den)) {
    throw HardyError(ErrorKind::NoConvergence, "profile collapsed to zero during minimisation");
  }
  x *= std::pow(den, -1.0 / p);
}

}  // namespace

void AngularDomain::validate() const {
  if (!(theta1 >= 0.0 && theta1 < theta2 && theta2 <= kHalfPi)) {
    throw HardyError(ErrorKind::InvalidArgument, "angular domain needs 0 <= theta1 < theta2 <= pi/2");
  }
}

AngularDomain bc_for_cone(const HardyParams& params, const ConeSpec& cone) {
  require_admissible(params, cone);
  const bool superdegenerate = params.cylindrical_order() >= params.p();
  const auto sigma0_end = superdegenerate ? EndCondition::Natural : EndCondition::Dirichlet;
  struct Visitor {
    EndCondition sigma0_end;
    AngularDomain operator()(const FullSpace&) const { return {}; }
    AngularDomain operator()(const PuncturedSpace&) const { return {}; }
    AngularDomain operator()(const ComplementSigma0&) const {
      return {0.0, kHalfPi, EndCondition::Natural, sigma0_end};
    }
    AngularDomain operator()(const HalfSpace&) const { return {0.0, kHalfPi, EndCondition::Natural, sigma0_end}; }
    AngularDomain operator()(const AxisymmetricBand& band) const {
      return {band.theta1(), band.theta2(), band.touches_pole() ? EndCondition::Natural : EndCondition::Dirichlet,
              band.touches_sigma0() ? EndCondition::Natural : EndCondition::Dirichlet};
    }
  };
  return std::visit(Visitor{sigma0_end}, cone);
}

DiscretizedFunction::Sample DiscretizedFunction::at(const AngularPoint& point) const {
  if (mesh.size() < 2 || values.size() != mesh.size()) {
    throw HardyError(ErrorKind::InvalidArgument, "discretised function needs matching mesh and values");
  }
  // Co-angles decrease along the mesh.
  auto it = std::partition_point(mesh.nodes.begin() + 1, mesh.nodes.end() - 1,
                                 [&](const AngularPoint& node) { return node.coangle >= point.coangle; });
  const std::size_t e = static_cast<std::size_t>(it - mesh.nodes.begin()) - 1;
  const auto c = local_coordinates(mesh.nodes[e], mesh.nodes[e + 1], point);
  return {c.left * values[e] + c.right * values[e + 1], (values[e + 1] - values[e]) * c.inverse_width};
}

AngularMesh graded_mesh(const AngularDomain& domain, int elements, double gamma) {
  domain.validate();
  if (elements < 1) throw HardyError(ErrorKind::InvalidArgument, "mesh needs at least one element");
  if (!(gamma >= 1.0)) throw HardyError(ErrorKind::InvalidArgument, "mesh grading must be >= 1");
  const double length = domain.theta2 - domain.theta1;
  const double s2 = domain.theta2 == kHalfPi ? 0.0 : kHalfPi - domain.theta2;
  AngularMesh mesh;
  mesh.nodes.resize(elements + 1);
  mesh.nodes.front() = {domain.theta1, kHalfPi - domain.theta1};
  mesh.nodes.back() = {domain.theta2, s2};
  for (int j = 1; j < elements; ++j) {
    const double f = std::pow(1.0 - static_cast<double>(j) / elements, gamma);
    mesh.nodes[j] = {domain.theta1 + length * (1.0 - f), s2 + length * f};
  }
  return mesh;
}

double default_grading(const HardyParams& params, const AngularDomain& domain) {
  if (domain.theta2 == kHalfPi && domain.bc2 == EndCondition::Dirichlet) {
    const double mu = end_exponent(params);
    if (mu > 0.0 && mu < 1.0) return std::min(32.0, std::max(2.0, 3.0 / mu));
  }
  return 2.0;
}

// ---------------------------------------------------------------------------

FiniteElementSpace::FiniteElementSpace(const HardyParams& params, const AngularDomain& domain, AngularMesh mesh,
                                       int points_per_element)
    : domain_(domain), mesh_(std::move(mesh)), weight_(angular_weight(params)), points_(points_per_element) {
  if (mesh_.size() < 2) throw HardyError(ErrorKind::InvalidArgument, "mesh needs at least one element");
  if (points_ < 1) throw HardyError(ErrorKind::InvalidArgument, "points per element must be >= 1");
  rule_ = composite_rule(weight_, mesh_, points_);
  samples_.reserve(rule_.size());
  for (std::size_t e = 0; e < mesh_.elements(); ++e) {
    for (std::size_t q = rule_.element_offsets[e]; q < rule_.element_offsets[e + 1]; ++q) {
      const auto c = local_coordinates(mesh_.nodes[e], mesh_.nodes[e + 1], rule_.nodes[q]);
      samples_.push_back({e, c.left, c.right, c.inverse_width});
    }
  }
  const int last = static_cast<int>(mesh_.size()) - 1;
  dof_of_node_.assign(mesh_.size(), -1);
  for (int j = 0; j <= last; ++j) {
    if (j == 0 && domain_.bc1 == EndCondition::Dirichlet) continue;
    if (j == last && domain_.bc2 == EndCondition::Dirichlet) continue;
    dof_of_node_[j] = static_cast<int>(free_nodes_.size());
    free_nodes_.push_back(j);
  }
  if (free_nodes_.empty()) throw HardyError(ErrorKind::InvalidArgument, "mesh has no free nodes");
}

std::vector<double> FiniteElementSpace::to_nodal(const Eigen::VectorXd& dofs) const {
  std::vector<double> nodal(mesh_.size(), 0.0);
  for (std::size_t i = 0; i < free_nodes_.size(); ++i) nodal[free_nodes_[i]] = dofs(static_cast<Eigen::Index>(i));
  return nodal;
}

Eigen::VectorXd FiniteElementSpace::to_dofs(const std::vector<double>& nodal) const {
  Eigen::VectorXd dofs(static_cast<Eigen::Index>(free_nodes_.size()));
  for (std::size_t i = 0; i < free_nodes_.size(); ++i) dofs(static_cast<Eigen::Index>(i)) = nodal[free_nodes_[i]];
  return dofs;
}

FiniteElementSpace::QuotientParts FiniteElementSpace::quotient(const std::vector<double>& nodal, double h,
                                                               double p) const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t q = 0; q < samples_.size(); ++q) {
    const auto& s = samples_[q];
    const double phi = s.left_basis * nodal[s.element] + s.right_basis * nodal[s.element + 1];
    const double slope = (nodal[s.element + 1] - nodal[s.element]) * s.inverse_width;
    const double g = slope * slope + h * h * phi * phi;
    num += rule_.weights[q] * std::pow(g, 0.5 * p);
    den += rule_.weights[q] * std::pow(std::abs(phi), p);
  }
  return {num, den};
}

Eigen::SparseMatrix<double> FiniteElementSpace::assemble(const std::vector<double>& slope_coefficient,
                                                         const std::vector<double>& value_coefficient) const {
  const auto n = static_cast<Eigen::Index>(free_nodes_.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * mesh_.elements());
  for (std::size_t e = 0; e < mesh_.elements(); ++e) {
    double local[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (std::size_t q = rule_.element_offsets[e]; q < rule_.element_offsets[e + 1]; ++q) {
      const auto& s = samples_[q];
      const double w = rule_.weights[q];
      const double ks = w * slope_coefficient[q] * s.inverse_width * s.inverse_width;
      const double ms = w * value_coefficient[q];
      local[0][0] += ks + ms * s.left_basis * s.left_basis;
      local[1][1] += ks + ms * s.right_basis * s.right_basis;
      local[0][1] += -ks + ms * s.left_basis * s.right_basis;
    }
    local[1][0] = local[0][1];
    const int dofs[2] = {dof_of_node_[e], dof_of_node_[e + 1]};
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        if (dofs[r] >= 0 && dofs[c] >= 0) triplets.emplace_back(dofs[r], dofs[c], local[r][c]);
      }
    }
  }
  Eigen::SparseMatrix<double> matrix(n, n);
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  return matrix;
}

// ---------------------------------------------------------------------------

GeneralizedPencil assemble_p2(const HardyParams& params, const AngularDomain& domain, int mesh_size,
                              const SolverOptions& options) {
  if (mesh_size < 16) throw HardyError(ErrorKind::InvalidArgument, "mesh size must be >= 16");
  const double gamma = options.grading > 0.0 ? options.grading : default_grading(params, domain);
  FiniteElementSpace space(params, domain, graded_mesh(domain, mesh_size, gamma), options.points_per_element);
  const std::vector<double> ones(space.rule().size(), 1.0);
  const std::vector<double> zeros(space.rule().size(), 0.0);
  return {space.assemble(ones, zeros), space.assemble(zeros, ones), space.free_nodes(), space.mesh()};
}

EigenPair smallest_eigenpair(const Eigen::SparseMatrix<double>& stiffness, const Eigen::SparseMatrix<double>& mass,
                             double tol, int max_iterations) {
  const Eigen::Index n = stiffness.rows();
  if (n == 0 || stiffness.cols() != n || mass.rows() != n || mass.cols() != n) {
    throw HardyError(ErrorKind::InvalidArgument, "eigenproblem needs square matrices of equal size");
  }
  // The shift only has to make K + tau M definite; keep it far below the spectrum.
  double ratio = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = mass.coeff(i, i);
    if (!(m > 0.0)) throw HardyError(ErrorKind::InvalidArgument, "mass matrix must be positive definite");
    ratio = std::min(ratio, std::abs(stiffness.coeff(i, i)) / m);
  }
  const double tau = 1e-12 * std::max(ratio, 1e-300);
  const Eigen::SparseMatrix<double> shifted = stiffness + tau * mass;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) {
    throw HardyError(ErrorKind::NoConvergence, "factorisation of the shifted stiffness matrix failed");
  }

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  double lambda = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int stagnant = 0;
  for (int it = 1; it <= max_iterations; ++it) {
    v = solver.solve(mass * v);
    v /= std::sqrt(v.dot(mass * v));
    const double previous = lambda;
    lambda = v.dot(stiffness * v);
    // Residual in the dual energy norm of K + tau M, relative to ||v|| in that norm.
    const Eigen::VectorXd r = stiffness * v - lambda * (mass * v);
    residual = std::sqrt(std::max(0.0, r.dot(solver.solve(r))) / v.dot(shifted * v));
    if (!std::isfinite(lambda) || !std::isfinite(residual)) break;
    stagnant = std::abs(lambda - previous) <= 4e-16 * std::abs(lambda) ? stagnant + 1 : 0;
    if (residual <= tol || stagnant >= 3) {
      if (v.sum() < 0.0) v = -v;
      return {lambda, v, it, residual};
    }
  }
  std::ostringstream msg;
  msg.precision(6);
  msg << "inverse iteration did not converge: lambda = " << lambda << ", residual = " << residual;
  throw HardyError(ErrorKind::NoConvergence, msg.str());
}

// ---------------------------------------------------------------------------

DiscretizedFunction default_initial_profile(const HardyParams& params, const AngularDomain& domain,
                                            const AngularMesh& mesh) {
  const double mu = end_exponent(params);
  const bool sigma0_dirichlet = domain.theta2 == kHalfPi && domain.bc2 == EndCondition::Dirichlet;
  const double length = domain.theta2 - domain.theta1;
  const double s2 = kHalfPi - domain.theta2;
  DiscretizedFunction f{mesh, std::vector<double>(mesh.size())};
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const auto& node = mesh.nodes[j];
    double value = 1.0;
    if (sigma0_dirichlet) {
      value = mu > 0.0 ? std::pow(node.cos_theta(), mu) : node.coangle / length;
    } else if (domain.bc2 == EndCondition::Dirichlet) {
      value = (node.coangle - s2) / length;
    }
    if (domain.bc1 == EndCondition::Dirichlet) value *= (node.theta - domain.theta1) / length;
    f.values[j] = value;
  }
  if (domain.bc1 == EndCondition::Dirichlet) f.values.front() = 0.0;
  if (domain.bc2 == EndCondition::Dirichlet) f.values.back() = 0.0;
  return f;
}

SpectralResult minimize_rayleigh_p(const HardyParams& params, const AngularDomain& domain, int mesh_size,
                                   const DiscretizedFunction& init, const SolverOptions& options) {
  domain.validate();
  if (mesh_size < 16) throw HardyError(ErrorKind::InvalidArgument, "mesh size must be >= 16");
  const double p = params.p();
  const double h = hardy_exponent(params).value;
  const double tol = options.descent_tolerance;
  const double gamma = options.grading > 0.0 ? options.grading : default_grading(params, domain);
  FiniteElementSpace space(params, domain, graded_mesh(domain, mesh_size, gamma), options.points_per_element);
  const auto& mesh = space.mesh();

  std::vector<double> nodal(mesh.size());
  const bool same_mesh = init.mesh.size() == mesh.size() && init.values.size() == mesh.size() &&
                         std::equal(mesh.nodes.begin(), mesh.nodes.end(), init.mesh.nodes.begin(),
                                    [](const AngularPoint& x, const AngularPoint& y) {
                                      return x.theta == y.theta && x.coangle == y.coangle;
                                    });
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    nodal[j] = std::abs(same_mesh ? init.values[j] : init.at(mesh.nodes[j]).value);
  }
  Eigen::VectorXd x = space.to_dofs(nodal);
  normalize_p(x, space, h, p);
  double q_value = space.quotient(space.to_nodal(x), h, p).numerator;

  const std::size_t nq = space.rule().size();
  std::vector<double> slope_coef(nq), value_coef(nq), zeros(nq, 0.0), mass_coef(nq);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analysed = false;
  double eta = std::numeric_limits<double>::infinity();
  double decrease = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (int it = 1; it <= options.max_iterations; ++it) {
    const auto current = space.to_nodal(x);
    double g_scale = 0.0;
    double phi_scale = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const auto& s = space.samples()[q];
      const double phi = s.left_basis * current[s.element] + s.right_basis * current[s.element + 1];
      const double slope = (current[s.element + 1] - current[s.element]) * s.inverse_width;
      slope_coef[q] = slope * slope + h * h * phi * phi;
      mass_coef[q] = std::abs(phi);
      g_scale = std::max(g_scale, slope_coef[q]);
      phi_scale = std::max(phi_scale, mass_coef[q]);
    }
    for (std::size_t q = 0; q < nq; ++q) {
      const double c = std::pow(std::max(slope_coef[q], 1e-30 * g_scale), 0.5 * (p - 2.0));
      slope_coef[q] = c;
      value_coef[q] = h * h * c;
      mass_coef[q] = std::pow(std::max(mass_coef[q], 1e-12 * phi_scale), p - 2.0);
    }
    const auto a_matrix = space.assemble(slope_coef, value_coef);
    const auto b_matrix = space.assemble(zeros, mass_coef);
    const double sigma = 1e-3 * q_value + 1e-12;
    const Eigen::SparseMatrix<double> shifted = a_matrix + sigma * b_matrix;
    if (!analysed) {
      solver.analyzePattern(shifted);
      analysed = true;
    }
    solver.factorize(shifted);
    if (solver.info() != Eigen::Success) {
      throw HardyError(ErrorKind::NoConvergence, "factorisation failed in the p-Rayleigh descent");
    }
    // At a critical point A x = Q B x, so (Q + sigma) (A + sigma B)^-1 B x = x.
    const Eigen::VectorXd direction = (q_value + sigma) * solver.solve(b_matrix * x) - x;
    eta = std::sqrt(std::max(0.0, direction.dot(shifted * direction)) / x.dot(shifted * x));

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double q_trial = q_value;
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      trial = (x + step * direction).cwiseAbs();
      normalize_p(trial, space, h, p);
      q_trial = space.quotient(space.to_nodal(trial), h, p).numerator;
      if (q_trial <= q_value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Round-off floor: no representable decrease along the descent direction.
      decrease = 0.0;
      if (eta <= std::sqrt(tol)) return {q_value, std::nullopt, {mesh, space.to_nodal(x)}, it, eta, gamma};
      break;
    }
    decrease = (q_value - q_trial) / std::max(q_trial, 1e-300);
    x = trial;
    q_value = q_trial;
    if (decrease < tol && eta < tol) {
      return {q_value, std::nullopt, {mesh, space.to_nodal(x)}, it, eta, gamma};
    }
    // Q stuck at round-off: eta cannot drop further, and Q is already accurate to ~eta^2.
    stalled = decrease <= 4e-16 ? stalled + 1 : 0;
    if (stalled >= 3 && eta <= std::sqrt(tol)) {
      return {q_value, std::nullopt, {mesh, space.to_nodal(x)}, it, eta, gamma};
    }
  }
  std::ostringstream msg;
  msg.precision(10);
  msg << "p-Rayleigh descent did not converge: Q = " << q_value << ", relative decrease = " << decrease
      << ", gradient = " << eta;
  throw HardyError(ErrorKind::NoConvergence, msg.str());
}

SpectralResult solve_on_domain(const HardyParams& params, const AngularDomain& domain, int mesh_size,
                               const SolverOptions& options) {
  domain.validate();
  if (mesh_size < 16) throw HardyError(ErrorKind::InvalidArgument, "mesh size must be >= 16");
  const auto [h, h_abs_p] = hardy_exponent(params);
  const double p = params.p();
  const double gamma = options.grading > 0.0 ? options.grading : default_grading(params, domain);

  if (domain.constants_admissible()) {
    // (phi'^2 + H^2 phi^2)^(p/2) >= |H|^p |phi|^p with equality for constants.
    FiniteElementSpace space(params, domain, graded_mesh(domain, mesh_size, gamma), options.points_per_element);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(space.dofs()));
    normalize_p(ones, space, h, p);
    SpectralResult result{h_abs_p, std::nullopt, {space.mesh(), space.to_nodal(ones)}, 0, 0.0, gamma};
    if (p == 2.0) result.lambda = 0.0;
    return result;
  }

  SolverOptions eigen_options = options;
  eigen_options.grading = gamma;
  const auto pencil = assemble_p2(params, domain, mesh_size, eigen_options);
  const auto pair = smallest_eigenpair(pencil.stiffness, pencil.mass, options.eigen_tolerance);
  DiscretizedFunction profile{pencil.mesh, std::vector<double>(pencil.mesh.size(), 0.0)};
  for (std::size_t i = 0; i < pencil.free_nodes.size(); ++i) {
    profile.values[pencil.free_nodes[i]] = pair.vector(static_cast<Eigen::Index>(i));
  }
  if (p == 2.0) {
    return {pair.lambda + h * h, pair.lambda, std::move(profile), pair.iterations, pair.residual, gamma};
  }
  return minimize_rayleigh_p(params, domain, mesh_size, profile, eigen_options);
}

SpectralResult solve_M(const HardyParams& params, const ConeSpec& cone, int mesh_size, const SolverOptions& options) {
  return solve_on_domain(params, bc_for_cone(params, cone), mesh_size, options);
}

// ---------------------------------------------------------------------------

DiscretizedFunction ClosedEigenpair::sample(const AngularMesh& mesh) const {
  DiscretizedFunction f{mesh, std::vector<double>(mesh.size())};
  for (std::size_t j = 0; j < mesh.size(); ++j) f.values[j] = phi1(mesh.nodes[j]);
  return f;
}

ClosedEigenpair closed_eigen_sigma0(const HardyParams& params) {
  const double ka = params.cylindrical_order();
  if (params.p() != 2.0 || !(ka > 0.0 && ka < 2.0)) {
    throw HardyError(ErrorKind::InvalidArgument, "closed eigenpair needs p = 2 and 0 < k + a < 2");
  }
  const double exponent = 2.0 - ka;
  return {(params.d() - params.k()) * exponent,
          [exponent](const AngularPoint& at) { return std::pow(at.cos_theta(), exponent); }};
}

}  // namespace hardy
