#pragma once

// The spherical minimisation problem
//
//   M(omega) = inf  Int w (phi'^2 + H^2 phi^2)^(p/2) / Int w |phi|^p
//
// over axisymmetric profiles phi(theta) on the cross-section of the cone.
// Discretised with continuous piecewise-linear elements on a mesh graded
// towards pi/2.  For p = 2 this is a weighted Sturm-Liouville eigenproblem
// solved by shifted inverse iteration; for general p the quotient is
// minimised directly by a preconditioned descent.

#include <Eigen/SparseCore>
#include <functional>
#include <optional>
#include <vector>

#include "hardy/params.hpp"
#include "hardy/quadrature.hpp"

namespace hardy {

enum class EndCondition { Dirichlet, Natural };

struct AngularDomain {
  double theta1 = 0.0;
  double theta2 = kHalfPi;
  EndCondition bc1 = EndCondition::Natural;
  EndCondition bc2 = EndCondition::Natural;

  /// Throws unless 0 <= theta1 < theta2 <= pi/2.
  void validate() const;
  bool constants_admissible() const {
    return bc1 == EndCondition::Natural && bc2 == EndCondition::Natural;
  }
};

AngularDomain bc_for_cone(const HardyParams& params, const ConeSpec& cone);

/// Nodal values of a continuous piecewise-linear profile.  Dirichlet ends carry 0.
struct DiscretizedFunction {
  AngularMesh mesh;
  std::vector<double> values;

  struct Sample {
    double value;
    double slope;  // d/d theta
  };
  /// Linear interpolation; points outside the mesh are clamped to the nearest element.
  Sample at(const AngularPoint& point) const;
};

struct SolverOptions {
  double grading = 0.0;  // mesh exponent; 0 selects it from the endpoint singularity
  int points_per_element = 8;
  double eigen_tolerance = 1e-10;
  double descent_tolerance = 1e-9;
  int max_iterations = 100000;
};

/// theta_j with co-angle s_j = s2 + (s1 - s2)(1 - j/n)^gamma, clustering at theta2.
AngularMesh graded_mesh(const AngularDomain& domain, int elements, double gamma);

/// gamma = 2, raised to 3/mu (at most 32) when the profile behaves like coangle^mu with
/// mu = (p - (k+a))/(p - 1) < 1 at a Dirichlet end on {y = 0}.
double default_grading(const HardyParams& params, const AngularDomain& domain);

/// Piecewise-linear space on a mesh with per-element quadrature, shared by the
/// solvers and the verifier.
class FiniteElementSpace {
 public:
  FiniteElementSpace(const HardyParams& params, const AngularDomain& domain, AngularMesh mesh,
                     int points_per_element = 8);

  const AngularMesh& mesh() const noexcept { return mesh_; }
  const AngularDomain& domain() const noexcept { return domain_; }
  const AngularWeight& weight() const noexcept { return weight_; }
  const QuadratureRule& rule() const noexcept { return rule_; }
  int points_per_element() const noexcept { return points_; }

  /// Free (non-Dirichlet) mesh nodes in order; dof i lives on node free_nodes()[i].
  const std::vector<int>& free_nodes() const noexcept { return free_nodes_; }
  std::size_t dofs() const noexcept { return free_nodes_.size(); }

  std::vector<double> to_nodal(const Eigen::VectorXd& dofs) const;
  Eigen::VectorXd to_dofs(const std::vector<double>& nodal) const;

  struct QuotientParts {
    double numerator;    // Int w (phi'^2 + H^2 phi^2)^(p/2)
    double denominator;  // Int w |phi|^p
  };
  QuotientParts quotient(const std::vector<double>& nodal, double h, double p) const;

  /// Tridiagonal matrices Int w c (phi_i' phi_j') and Int w m (phi_i phi_j)
  /// restricted to the free dofs, with c and m given per quadrature node.
  Eigen::SparseMatrix<double> assemble(const std::vector<double>& slope_coefficient,
                                       const std::vector<double>& value_coefficient) const;

  struct NodeSample {
    std::size_t element;
    double left_basis;  // basis of node `element` at the quadrature node
    double right_basis;
    double inverse_width;  // slope of the right basis in theta
  };
  const std::vector<NodeSample>& samples() const noexcept { return samples_; }

 private:
  AngularDomain domain_;
  AngularMesh mesh_;
  AngularWeight weight_;
  int points_;
  QuadratureRule rule_;
  std::vector<NodeSample> samples_;
  std::vector<int> free_nodes_;
  std::vector<int> dof_of_node_;
};

struct GeneralizedPencil {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> mass;
  std::vector<int> free_nodes;
  AngularMesh mesh;
};

GeneralizedPencil assemble_p2(const HardyParams& params, const AngularDomain& domain, int mesh_size,
                              const SolverOptions& options = {});

struct EigenPair {
  double lambda;
  Eigen::VectorXd vector;  // mass-normalised, nonnegative mean
  int iterations;
  double residual;  // ||(K - lambda M) v|| in the dual energy norm, relative to ||v||_energy
};

/// Smallest eigenvalue of K v = lambda M v (K symmetric PSD, M SPD) by shifted
/// inverse iteration.  Throws HardyError(NoConvergence) with the last residual.
EigenPair smallest_eigenpair(const Eigen::SparseMatrix<double>& stiffness, const Eigen::SparseMatrix<double>& mass,
                             double tol, int max_iterations = 20000);

struct SpectralResult {
  double M = 0.0;
  std::optional<double> lambda;  // p = 2 only, M - H^2
  DiscretizedFunction minimizer;
  int iterations = 0;
  double residual = 0.0;
  double grading = 2.0;
};

SpectralResult solve_M(const HardyParams& params, const ConeSpec& cone, int mesh_size, const SolverOptions& options = {});

/// As solve_M but on an explicit angular domain (e.g. a forced Dirichlet end).
SpectralResult solve_on_domain(const HardyParams& params, const AngularDomain& domain, int mesh_size,
                               const SolverOptions& options = {});

/// Direct minimisation of the discrete quotient for any p > 1, starting from
/// `init` (interpolated onto the solver mesh if needed).
SpectralResult minimize_rayleigh_p(const HardyParams& params, const AngularDomain& domain, int mesh_size,
                                   const DiscretizedFunction& init, const SolverOptions& options = {});

/// cos^max(0, mu)(theta) with mu the endpoint exponent, multiplied by a sine
/// bump that vanishes at any Dirichlet end.
DiscretizedFunction default_initial_profile(const HardyParams& params, const AngularDomain& domain,
                                            const AngularMesh& mesh);

struct ClosedEigenpair {
  double lambda1;
  std::function<double(const AngularPoint&)> phi1;  // cos^(2-(k+a)) theta

  DiscretizedFunction sample(const AngularMesh& mesh) const;
};

/// First eigenpair on the complement of {y = 0} for p = 2 and k + a < 2.
ClosedEigenpair closed_eigen_sigma0(const HardyParams& params);

inline constexpr int kDefaultMeshSize = 512;

}  // namespace hardy
