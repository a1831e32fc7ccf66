#pragma once

// Quadrature against the angular weight
//
//   w(theta) = cos^(k+a-1)(theta) * sin^(d-k-1)(theta),   0 < theta < pi/2,
//
// obtained by writing the sphere measure |Pi sigma|^a d sigma in the polar
// angle theta (|y| = r cos theta).  The cosine factor is singular or
// degenerate at theta = pi/2; all rules here absorb it with Gauss-Jacobi.

#include <functional>
#include <span>
#include <vector>

#include "hardy/params.hpp"

namespace hardy {

/// A polar angle stored together with its co-angle pi/2 - theta.  Meshes graded
/// towards pi/2 place nodes far below double resolution of theta itself, so
/// everything that evaluates cos(theta) goes through the co-angle.
struct AngularPoint {
  double theta;
  double coangle;

  static AngularPoint from_theta(double theta) { return {theta, kHalfPi - theta}; }
  static AngularPoint from_coangle(double coangle) { return {kHalfPi - coangle, coangle}; }
  double cos_theta() const;
  double sin_theta() const;
};

struct AngularWeight {
  double alpha;      // cosine exponent k + a - 1
  double beta_exp;   // sine exponent d - k - 1 (a nonnegative integer)
  double prefactor;  // |S^(k-1)| |S^(d-k-1)|, halved for the half space

  double operator()(const AngularPoint& at) const;
};

/// Weight for the given parameters; the cone only affects the prefactor.
AngularWeight angular_weight(const HardyParams& params, const ConeSpec& cone = PuncturedSpace{});

struct QuadratureRule {
  std::vector<AngularPoint> nodes;  // strictly increasing theta (decreasing co-angle)
  std::vector<double> weights;      // include w(theta); exclude the prefactor
  int order = 0;
  // Nodes of element e are [element_offsets[e], element_offsets[e+1]) (element and composite rules).
  std::vector<std::size_t> element_offsets;

  std::size_t size() const noexcept { return weights.size(); }
};

/// Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta,
/// alpha, beta > -1.  Nodes ascending.
struct ReferenceRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
ReferenceRule gauss_jacobi(int n, double alpha, double beta);
ReferenceRule gauss_legendre(int n);

/// |S^n| = 2 pi^((n+1)/2) / Gamma((n+1)/2); |S^0| = 2.
double sphere_surface_area(int n);

/// Rule for Int_{theta1}^{theta2} f w d theta.  Uses Gauss-Jacobi in
/// t = cos(2 theta); at an end that coincides with 0 or pi/2 the Jacobi
/// exponent absorbs the weight, so the rule is exact for polynomials in t of
/// degree < 2n on the full quarter circle.
QuadratureRule build_rule(const AngularWeight& weight, double theta1, double theta2, int n);

/// Same rule with precise interval endpoints.
QuadratureRule build_rule(const AngularWeight& weight, AngularPoint lo, AngularPoint hi, int n);

/// Rule on a single element [lo, hi] for integrands that are smooth in theta
/// (finite-element products).  The element touching pi/2 uses Gauss-Jacobi in
/// the co-angle so that cos^alpha is integrated exactly up to a smooth factor;
/// elements whose co-angles differ by more than a factor 2 get n points on each
/// of several geometric panels.
QuadratureRule element_rule(const AngularWeight& weight, AngularPoint lo, AngularPoint hi, int n);

/// Piecewise-linear mesh on [theta1, theta2] (see spherical.hpp for grading).
struct AngularMesh {
  std::vector<AngularPoint> nodes;

  std::size_t size() const noexcept { return nodes.size(); }
  std::size_t elements() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
};

/// Concatenation of element_rule over every element of the mesh.
QuadratureRule composite_rule(const AngularWeight& weight, const AngularMesh& mesh, int points_per_element);

/// Sum of weights * f(nodes).  Throws HardyError(InvalidArgument) if f is not
/// finite at some node.
double integrate(const QuadratureRule& rule, const std::function<double(double)>& f);
double integrate(const QuadratureRule& rule, const std::function<double(const AngularPoint&)>& f);

/// Int_{S^(d-1)} |Pi sigma|^a d sigma, by quadrature.  Requires k + a > 0.
double sphere_weight_mass(const HardyParams& params);

inline constexpr int kDefaultQuadratureNodes = 256;

}  // namespace hardy
