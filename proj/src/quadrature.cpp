#include "hardy/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

namespace hardy {

namespace {

struct JacobiValue {
  double value;
  double derivative;
};

// P_n^{(alpha,beta)}(x) and its derivative by the three-term recurrence.
double jacobi_p(int n, double alpha, double beta, double x) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
  for (int m = 2; m <= n; ++m) {
    const double s = 2.0 * m + alpha + beta;
    const double a1 = 2.0 * m * (m + alpha + beta) * (s - 2.0);
    const double a2 = (s - 1.0) * (alpha * alpha - beta * beta);
    const double a3 = (s - 2.0) * (s - 1.0) * s;
    const double a4 = 2.0 * (m + alpha - 1.0) * (m + beta - 1.0) * s;
    const double next = ((a2 + a3 * x) * cur - a4 * prev) / a1;
    prev = cur;
    cur = next;
  }
  return cur;
}

JacobiValue jacobi_with_derivative(int n, double alpha, double beta, double x) {
  const double value = jacobi_p(n, alpha, beta, x);
  const double derivative = n == 0 ? 0.0 : 0.5 * (n + alpha + beta + 1.0) * jacobi_p(n - 1, alpha + 1.0, beta + 1.0, x);
  return {value, derivative};
}

}  // namespace

double AngularPoint::cos_theta() const { return std::sin(coangle); }
double AngularPoint::sin_theta() const { return std::sin(theta); }

double AngularWeight::operator()(const AngularPoint& at) const {
  const double c = at.cos_theta();
  const double s = at.sin_theta();
  return std::pow(c, alpha) * (beta_exp == 0.0 ? 1.0 : std::pow(s, beta_exp));
}

AngularWeight angular_weight(const HardyParams& params, const ConeSpec& cone) {
  const int k = params.k();
  const int d = params.d();
  double prefactor = sphere_surface_area(k - 1) * sphere_surface_area(d - k - 1);
  if (std::holds_alternative<HalfSpace>(cone)) prefactor *= 0.5;
  return {k + params.a() - 1.0, static_cast<double>(d - k - 1), prefactor};
}

ReferenceRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw HardyError(ErrorKind::InvalidArgument, "quadrature order must be >= 1");
  if (!(alpha > -1.0) || !(beta > -1.0)) {
    throw HardyError(ErrorKind::Integrability, "Gauss-Jacobi exponents must exceed -1");
  }
  const double ab = alpha + beta;

  // Golub-Welsch for starting values.
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 1));
  for (int j = 0; j < n; ++j) {
    const double s = 2.0 * j + ab;
    if (j == 0) {
      diag(j) = (beta - alpha) / (ab + 2.0);
    } else {
      diag(j) = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
  }
  for (int j = 1; j < n; ++j) {
    const double s = 2.0 * j + ab;
    double b2 = 0.0;
    if (j == 1) {
      b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      b2 = 4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    sub(j - 1) = std::sqrt(b2);
  }

  ReferenceRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = diag(0);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::EigenvaluesOnly);
    for (int i = 0; i < n; ++i) rule.nodes[i] = solver.eigenvalues()(i);
  }

  const double log_c = (ab + 1.0) * std::numbers::ln2 + std::lgamma(n + alpha + 1.0) +
                       std::lgamma(n + beta + 1.0) - std::lgamma(n + ab + 1.0) - std::lgamma(n + 1.0);
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes[i];
    for (int it = 0; it < 4; ++it) {
      const auto [p, dp] = jacobi_with_derivative(n, alpha, beta, x);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    x = std::clamp(x, -1.0, 1.0);
    rule.nodes[i] = x;
    const double dp = jacobi_with_derivative(n, alpha, beta, x).derivative;
    rule.weights[i] = std::exp(log_c) / ((1.0 - x) * (1.0 + x) * dp * dp);
  }
  return rule;
}

ReferenceRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

namespace {

// Appends the rule for one element [lo, hi].  Theta is interpolated from the
// low end and the co-angle from the high end, each where it is accurate.  The
// element touching pi/2 integrates coangle^alpha exactly with Gauss-Jacobi and
// the smooth rest (sin(s)/s)^alpha sin^beta(theta) by sampling.  Elements whose
// co-angles span more than a factor 2 (strong grading) are split into
// geometric panels so that coangle^alpha stays well resolved.
void append_element(QuadratureRule& rule, const AngularWeight& weight, const AngularPoint& lo,
                    const AngularPoint& hi, const ReferenceRule& legendre, int n) {
  const bool singular_end = hi.coangle == 0.0;
  if (singular_end && !(weight.alpha > -1.0)) {
    throw HardyError(ErrorKind::Integrability, "weight cos^alpha is not integrable at pi/2");
  }
  if (!singular_end && weight.alpha != 0.0 && lo.coangle > 2.0 * hi.coangle) {
    const double ratio = lo.coangle / hi.coangle;
    const int panels = static_cast<int>(std::ceil(std::log2(ratio)));
    for (int j = panels - 1; j >= 0; --j) {  // theta increasing
      const double s_hi = j == 0 ? hi.coangle : hi.coangle * std::pow(ratio, static_cast<double>(j) / panels);
      const double s_lo = j + 1 == panels ? lo.coangle : hi.coangle * std::pow(ratio, static_cast<double>(j + 1) / panels);
      const double width = s_lo - s_hi;
      for (int i = 0; i < n; ++i) {
        const AngularPoint at = AngularPoint::from_coangle(s_hi + 0.5 * width * (1.0 - legendre.nodes[i]));
        rule.nodes.push_back(at);
        rule.weights.push_back(legendre.weights[i] * 0.5 * width * weight(at));
      }
    }
    return;
  }
  const ReferenceRule jacobi = singular_end ? gauss_jacobi(n, weight.alpha, 0.0) : ReferenceRule{};
  const ReferenceRule& ref = singular_end ? jacobi : legendre;
  const double width = lo.coangle - hi.coangle;
  for (int i = 0; i < n; ++i) {
    const double x = ref.nodes[i];
    const AngularPoint at{lo.theta + 0.5 * (hi.theta - lo.theta) * (1.0 + x), hi.coangle + 0.5 * width * (1.0 - x)};
    double w = 0.0;
    if (singular_end) {
      const double s = at.coangle;
      const double sinc = s == 0.0 ? 1.0 : std::sin(s) / s;
      w = ref.weights[i] * std::pow(0.5 * width, 1.0 + weight.alpha) * std::pow(sinc, weight.alpha) *
          (weight.beta_exp == 0.0 ? 1.0 : std::pow(at.sin_theta(), weight.beta_exp));
    } else {
      w = ref.weights[i] * 0.5 * width * weight(at);
    }
    rule.nodes.push_back(at);
    rule.weights.push_back(w);
  }
}

}  // namespace

double sphere_surface_area(int n) {
  if (n < 0) throw HardyError(ErrorKind::InvalidArgument, "sphere dimension must be >= 0");
  if (n == 0) return 2.0;
  const double half = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

QuadratureRule build_rule(const AngularWeight& weight, double theta1, double theta2, int n) {
  const auto lo = theta1 == 0.0 ? AngularPoint{0.0, kHalfPi} : AngularPoint::from_theta(theta1);
  const auto hi = theta2 == kHalfPi ? AngularPoint{kHalfPi, 0.0} : AngularPoint::from_theta(theta2);
  return build_rule(weight, lo, hi, n);
}

QuadratureRule build_rule(const AngularWeight& weight, AngularPoint lo, AngularPoint hi, int n) {
  if (!(lo.theta < hi.theta) && !(lo.coangle > hi.coangle)) {
    throw HardyError(ErrorKind::InvalidArgument, "quadrature interval must be nonempty");
  }
  const bool at_pole = lo.theta == 0.0;
  const bool at_sigma0 = hi.coangle == 0.0;
  if (at_sigma0 && !(weight.alpha > -1.0)) {
    throw HardyError(ErrorKind::Integrability,
                     "weight cos^alpha is not integrable at pi/2 (alpha = " + std::to_string(weight.alpha) + ")");
  }

  // t = cos(2 theta); keep 1+t and 1-t separately.
  const double tp_lo = 2.0 * std::pow(std::sin(hi.coangle), 2);  // 1 + t at theta2
  const double tm_hi = 2.0 * std::pow(std::sin(lo.theta), 2);    // 1 - t at theta1
  const double length = 2.0 - tp_lo - tm_hi;                      // t(theta1) - t(theta2)

  const double jac_a = (weight.alpha - 1.0) / 2.0;    // exponent of (1+t)
  const double jac_b = (weight.beta_exp - 1.0) / 2.0;  // exponent of (1-t)
  const double exp_minus = at_pole ? jac_b : 0.0;      // Jacobi (1-x) exponent
  const double exp_plus = at_sigma0 ? jac_a : 0.0;     // Jacobi (1+x) exponent
  const auto ref = gauss_jacobi(n, exp_minus, exp_plus);

  QuadratureRule rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // w d theta = (1/4) ((1+t)/2)^A ((1-t)/2)^B dt,  dt = (length/2) dx.
  for (int i = 0; i < n; ++i) {
    const double x = ref.nodes[i];
    const double one_plus_x = 1.0 + x;
    const double one_minus_x = 1.0 - x;
    const double tp = tp_lo + 0.5 * length * one_plus_x;
    const double tm = tm_hi + 0.5 * length * one_minus_x;

    double factor = 0.25 * 0.5 * length;
    factor *= at_sigma0 ? std::pow(length / 4.0, jac_a) : std::pow(tp / 2.0, jac_a);
    factor *= at_pole ? std::pow(length / 4.0, jac_b) : std::pow(tm / 2.0, jac_b);

    const double c = std::sqrt(tp / 2.0);
    const double s = std::sqrt(tm / 2.0);
    // Nodes come out in decreasing theta; store ascending.
    const int slot = n - 1 - i;
    rule.nodes[slot] = {std::atan2(s, c), std::atan2(c, s)};
    rule.weights[slot] = ref.weights[i] * factor;
  }
  return rule;
}

QuadratureRule element_rule(const AngularWeight& weight, AngularPoint lo, AngularPoint hi, int n) {
  QuadratureRule rule;
  rule.order = n;
  const auto legendre = gauss_legendre(n);
  append_element(rule, weight, lo, hi, legendre, n);
  rule.element_offsets = {0, rule.size()};
  return rule;
}

QuadratureRule composite_rule(const AngularWeight& weight, const AngularMesh& mesh, int points_per_element) {
  QuadratureRule rule;
  rule.order = points_per_element;
  rule.nodes.reserve(mesh.elements() * points_per_element);
  rule.weights.reserve(mesh.elements() * points_per_element);
  rule.element_offsets.reserve(mesh.elements() + 1);
  rule.element_offsets.push_back(0);
  const auto legendre = gauss_legendre(points_per_element);
  for (std::size_t e = 0; e < mesh.elements(); ++e) {
    append_element(rule, weight, mesh.nodes[e], mesh.nodes[e + 1], legendre, points_per_element);
    rule.element_offsets.push_back(rule.size());
  }
  return rule;
}

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
  return integrate(rule, std::function<double(const AngularPoint&)>(
                             [&f](const AngularPoint& at) { return f(at.theta); }));
}

double integrate(const QuadratureRule& rule, const std::function<double(const AngularPoint&)>& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double value = f(rule.nodes[i]);
    if (!std::isfinite(value)) {
      throw HardyError(ErrorKind::InvalidArgument,
                       "integrand is not finite at theta = " + std::to_string(rule.nodes[i].theta));
    }
    sum += rule.weights[i] * value;
  }
  return sum;
}

double sphere_weight_mass(const HardyParams& params) {
  if (!sphere_weight_integrable(params)) {
    throw HardyError(ErrorKind::Integrability, "|Pi sigma|^a is not integrable on the sphere (k+a <= 0)");
  }
  const auto weight = angular_weight(params);
  const auto rule = build_rule(weight, 0.0, kHalfPi, 32);
  double sum = 0.0;
  for (double w : rule.weights) sum += w;
  return weight.prefactor * sum;
}

}  // namespace hardy
