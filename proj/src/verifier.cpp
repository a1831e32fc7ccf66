#include "hardy/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hardy {

namespace {

constexpr int kStripNodes = 32;

struct AngularSums {
  double numerator;
  double denominator;
};

// Sum over the rule of W (c2 Phi^2 + Phi'^2)^(p/2) and W |Phi|^p.
AngularSums angular_sums(const DiscretizedFunction& phi, const QuadratureRule& rule, double c2, double p) {
  AngularSums sums{0.0, 0.0};
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto s = phi.at(rule.nodes[i]);
    sums.numerator += rule.weights[i] * std::pow(c2 * s.value * s.value + s.slope * s.slope, 0.5 * p);
    sums.denominator += rule.weights[i] * std::pow(std::abs(s.value), p);
  }
  return sums;
}

RayleighEvaluation udelta_with_prefactor(const HardyParams& params, const DiscretizedFunction& phi, double delta,
                                         const QuadratureRule& rule, double prefactor) {
  if (!(delta > 0.0)) throw HardyError(ErrorKind::InvalidArgument, "delta must be positive");
  const double p = params.p();
  const double h = hardy_exponent(params).value;
  const double inner = radial_power_integral(p * delta - 1.0, 0.0, 1.0);
  const double outer = radial_power_integral(-p * delta - 1.0, 1.0, std::numeric_limits<double>::infinity());
  const auto below = angular_sums(phi, rule, (h - delta) * (h - delta), p);
  const auto above = angular_sums(phi, rule, (h + delta) * (h + delta), p);
  RayleighEvaluation eval;
  eval.numerator = prefactor * (inner * below.numerator + outer * above.numerator);
  eval.denominator = prefactor * (inner + outer) * below.denominator;
  if (!(eval.denominator > 0.0)) throw HardyError(ErrorKind::InvalidArgument, "test function vanishes");
  eval.quotient = eval.numerator / eval.denominator;
  return eval;
}

double log_cos(const AngularPoint& at) { return std::log(at.cos_theta()); }

// Angular mesh of phi truncated where eta(-log|y|/h) vanishes at log r = t,
// refined through the strip e^-2h < |y| < e^-h.
AngularMesh cutoff_mesh(const AngularMesh& base, double t, int h) {
  const double front = base.nodes.front().coangle;
  const double back = base.nodes.back().coangle;
  auto strip_coangle = [&](double level) { return std::asin(std::min(1.0, std::exp(-h * level - t))); };
  const double end = strip_coangle(2.0);
  std::vector<AngularPoint> nodes;
  for (const auto& node : base.nodes) {
    if (node.coangle > end) nodes.push_back(node);
  }
  for (int j = 0; j <= kStripNodes; ++j) {
    const double s = strip_coangle(1.0 + static_cast<double>(j) / kStripNodes);
    if (s <= front && s >= back) nodes.push_back(AngularPoint::from_coangle(s));
  }
  std::sort(nodes.begin(), nodes.end(), [](const AngularPoint& x, const AngularPoint& y) { return x.coangle > y.coangle; });
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [](const AngularPoint& x, const AngularPoint& y) { return x.coangle == y.coangle; }),
              nodes.end());
  return {nodes};
}

struct RadialNode {
  double tau;  // log r - log r0
  double weight;
  double zeta;
  double zeta_slope;
};

std::vector<RadialNode> window_nodes(double length, int points, bool plateau) {
  const auto gl = gauss_legendre(points);
  std::vector<RadialNode> nodes;
  auto panel = [&](double lo, double hi, auto profile) {
    for (int i = 0; i < points; ++i) {
      const double tau = lo + 0.5 * (hi - lo) * (1.0 + gl.nodes[i]);
      const auto [z, dz] = profile(tau);
      nodes.push_back({tau, 0.5 * (hi - lo) * gl.weights[i], z, dz});
    }
  };
  panel(-1.0, 0.0, [](double tau) { return std::pair{smooth_step(tau + 1.0), smooth_step_slope(tau + 1.0)}; });
  panel(length, length + 1.0,
        [&](double tau) { return std::pair{1.0 - smooth_step(tau - length), -smooth_step_slope(tau - length)}; });
  if (plateau) {
    const int panels = std::max(1, static_cast<int>(std::ceil(length)));
    for (int j = 0; j < panels; ++j) {
      panel(length * j / panels, length * (j + 1) / panels, [](double) { return std::pair{1.0, 0.0}; });
    }
  }
  return nodes;
}

RayleighEvaluation power_window(const HardyParams& params, const PowerWindow& window, const DiscretizedFunction& phi,
                                const AngularWeight& weight, const VerifyOptions& options) {
  const double p = params.p();
  const double h = hardy_exponent(params).value;
  const double c = p * (h + window.s);
  const double length = std::log(window.r1 / window.r0);
  const auto rule = composite_rule(weight, phi.mesh, options.points_per_element);

  std::vector<double> value(rule.size()), slope(rule.size());
  double den_sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto smp = phi.at(rule.nodes[i]);
    value[i] = smp.value;
    slope[i] = smp.slope;
    den_sum += rule.weights[i] * std::pow(std::abs(smp.value), p);
  }
  auto numerator_sum = [&](double a2, double b2) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      sum += rule.weights[i] * std::pow(a2 * value[i] * value[i] + b2 * slope[i] * slope[i], 0.5 * p);
    }
    return sum;
  };

  // Plateau: the radial factor is the pure power e^(c tau).
  const double plateau = c == 0.0 ? length : std::expm1(c * length) / c;
  double num = plateau * numerator_sum(window.s * window.s, 1.0);
  double den = plateau * den_sum;
  for (const auto& node : window_nodes(length, options.radial_points, false)) {
    const double scale = node.weight * std::exp(c * node.tau);
    const double g = window.s * node.zeta + node.zeta_slope;
    num += scale * numerator_sum(g * g, node.zeta * node.zeta);
    den += scale * std::pow(node.zeta, p) * den_sum;
  }
  const double common = weight.prefactor * std::exp(c * std::log(window.r0));
  return {common * num, common * den, num / den, std::nullopt, std::nullopt};
}

RayleighEvaluation power_window_cutoff(const HardyParams& params, const PowerWindow& window, int cutoff_h,
                                       const DiscretizedFunction& phi, const AngularWeight& weight,
                                       const VerifyOptions& options) {
  const double p = params.p();
  const double h = hardy_exponent(params).value;
  const double s = window.s;
  const double c = p * (h + s);
  const double t0 = std::log(window.r0);
  const double length = std::log(window.r1 / window.r0);
  const auto eta = smooth_cutoff();
  double num = 0.0;
  double den = 0.0;
  for (const auto& node : window_nodes(length, options.radial_points, true)) {
    const double t = t0 + node.tau;
    const auto mesh = cutoff_mesh(phi.mesh, t, cutoff_h);
    if (mesh.size() < 2) continue;
    const auto rule = composite_rule(weight, mesh, options.points_per_element);
    double num_ang = 0.0;
    double den_ang = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const auto& at = rule.nodes[i];
      const auto smp = phi.at(at);
      const double level = -(t + log_cos(at)) / cutoff_h;
      const double e = eta.value(level);
      const double de = eta.slope(level) / cutoff_h;
      const double tan_theta = at.sin_theta() / at.cos_theta();
      const double g_r = (s * node.zeta + node.zeta_slope) * smp.value * e - node.zeta * smp.value * de;
      const double g_t = node.zeta * (smp.slope * e + smp.value * de * tan_theta);
      num_ang += rule.weights[i] * std::pow(g_r * g_r + g_t * g_t, 0.5 * p);
      den_ang += rule.weights[i] * std::pow(std::abs(node.zeta * smp.value * e), p);
    }
    const double scale = node.weight * std::exp(c * node.tau);
    num += scale * num_ang;
    den += scale * den_ang;
  }
  if (!(den > 0.0)) throw HardyError(ErrorKind::InvalidArgument, "test function vanishes");
  const double common = weight.prefactor * std::exp(c * t0);
  return {common * num, common * den, num / den, std::nullopt, std::nullopt};
}

}  // namespace

void SeparatedTestFunction::validate() const {
  if (const auto* split = std::get_if<PowerLawSplit>(&radial)) {
    if (!(split->delta > 0.0)) throw HardyError(ErrorKind::InvalidArgument, "delta must be positive");
  } else {
    const auto& window = std::get<PowerWindow>(radial);
    if (!(window.r0 > 0.0 && window.r0 < window.r1) || !std::isfinite(window.r1) || !std::isfinite(window.s)) {
      throw HardyError(ErrorKind::InvalidArgument, "power window needs 0 < r0 < r1 and finite s");
    }
  }
  if (cutoff && cutoff->h < 1) throw HardyError(ErrorKind::InvalidArgument, "cutoff scale h must be >= 1");
  if (angular.mesh.size() < 2 || angular.values.size() != angular.mesh.size()) {
    throw HardyError(ErrorKind::InvalidArgument, "angular profile needs matching mesh and values");
  }
}

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double f0 = std::exp(-1.0 / x);
  const double f1 = std::exp(-1.0 / (1.0 - x));
  return f0 / (f0 + f1);
}

double smooth_step_slope(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double y = 1.0 - x;
  const double f0 = std::exp(-1.0 / x);
  const double f1 = std::exp(-1.0 / y);
  const double sum = f0 + f1;
  return (f0 / (x * x) * f1 + f0 * f1 / (y * y)) / (sum * sum);
}

CutoffProfile smooth_cutoff() {
  return {[](double t) { return 1.0 - smooth_step(t - 1.0); }, [](double t) { return -smooth_step_slope(t - 1.0); }};
}

double radial_power_integral(double exponent, double lo, double hi) {
  if (!(lo >= 0.0 && hi > lo)) throw HardyError(ErrorKind::InvalidArgument, "radial interval must satisfy 0 <= lo < hi");
  const bool infinite = std::isinf(hi);
  const double e1 = exponent + 1.0;
  if ((lo == 0.0 && !(e1 > 0.0)) || (infinite && !(e1 < 0.0))) {
    throw HardyError(ErrorKind::Integrability, "radial power integral diverges");
  }
  if (e1 == 0.0) return std::log(hi / lo);
  const double upper = infinite ? 0.0 : std::pow(hi, e1);
  const double lower = lo == 0.0 ? 0.0 : std::pow(lo, e1);
  return (upper - lower) / e1;
}

QuadratureRule profile_rule(const HardyParams& params, const DiscretizedFunction& phi, int points_per_element) {
  return composite_rule(angular_weight(params), phi.mesh, points_per_element);
}

RayleighEvaluation evaluate_quotient_udelta(const HardyParams& params, const DiscretizedFunction& phi, double delta,
                                            const QuadratureRule& rule, std::optional<double> closed_form_reference) {
  auto eval = udelta_with_prefactor(params, phi, delta, rule, angular_weight(params).prefactor);
  eval.closed_form_reference = closed_form_reference;
  eval.reference = closed_form_reference;
  return eval;
}

double denominator_blowup(const HardyParams& params, const DiscretizedFunction& phi, double delta,
                          const QuadratureRule& rule) {
  const auto eval = evaluate_quotient_udelta(params, phi, delta, rule);
  const double p = params.p();
  double mass = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    mass += rule.weights[i] * std::pow(std::abs(phi.at(rule.nodes[i]).value), p);
  }
  const double expected = 2.0 / (p * delta) * angular_weight(params).prefactor * mass;
  if (std::abs(eval.denominator - expected) > 1e-12 * expected) {
    throw HardyError(ErrorKind::NoConvergence, "u_delta denominator disagrees with 2/(p delta) times the angular mass");
  }
  return eval.denominator;
}

CutoffDecay cutoff_decay(const HardyParams& params, std::pair<double, double> support, int h,
                         const CutoffProfile& eta) {
  if (h < 1) throw HardyError(ErrorKind::InvalidArgument, "cutoff scale h must be >= 1");
  const double p = params.p();
  const double excess = params.cylindrical_order() - p;
  if (excess < 0.0) throw HardyError(ErrorKind::InvalidArgument, "cutoff decay requires k + a >= p");
  const auto [inner, outer] = support;
  if (!(inner > 0.0 && inner < outer && std::isfinite(outer))) {
    throw HardyError(ErrorKind::InvalidArgument, "support must satisfy 0 < inner < outer");
  }
  const int k = params.k();
  const int d = params.d();
  const double b = params.b();
  const double prefactor = sphere_surface_area(k - 1) * sphere_surface_area(d - k - 1);

  // Radial bump in log r: rises over the first third of the support, falls over the last.
  const double ta = std::log(inner);
  const double third = (std::log(outer) - ta) / 3.0;
  auto bump = [&](double rho) {
    const double t = std::log(rho);
    return smooth_step((t - ta) / third) * smooth_step((ta + 3.0 * third - t) / third);
  };

  const auto gl = gauss_legendre(64);
  auto transverse = [&](double rho_y) {
    // Int rho_x^(d-k-1) |z|^-b B(|z|)^p d rho_x over the support, in four panels.
    if (rho_y >= outer) return 0.0;
    const double lo = std::sqrt(std::max(0.0, inner * inner - rho_y * rho_y));
    const double hi = std::sqrt(outer * outer - rho_y * rho_y);
    double sum = 0.0;
    for (int panel = 0; panel < 4; ++panel) {
      const double a0 = lo + (hi - lo) * panel / 4.0;
      const double a1 = lo + (hi - lo) * (panel + 1) / 4.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double x = a0 + 0.5 * (a1 - a0) * (1.0 + gl.nodes[i]);
        const double z = std::hypot(x, rho_y);
        sum += 0.5 * (a1 - a0) * gl.weights[i] * std::pow(x, d - k - 1) * std::pow(z, -b) * std::pow(bump(z), p);
      }
    }
    return sum;
  };

  // rho_y = e^(-h tau), tau in (1, 2); the cutoff varies only there.
  double sum = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double tau = 1.5 + 0.5 * gl.nodes[i];
    const double slope = std::abs(eta.slope(tau));
    if (slope == 0.0) continue;
    sum += 0.5 * gl.weights[i] * std::exp(-h * tau * excess) * std::pow(slope, p) * transverse(std::exp(-h * tau));
  }
  CutoffDecay result;
  result.i_h = prefactor * std::pow(static_cast<double>(h), 1.0 - p) * sum;
  result.strip_integral = radial_power_integral(excess - 1.0, std::exp(-2.0 * h), std::exp(-1.0 * h));
  return result;
}

double radial_hardy_quotient(double p, double weight_exponent, const LogGridProfile& f) {
  const std::size_t n = f.log_r.size();
  if (n < 3 || f.g.size() != n || (!f.g_slope.empty() && f.g_slope.size() != n)) {
    throw HardyError(ErrorKind::InvalidArgument, "radial profile needs >= 3 samples of matching length");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(f.log_r[i] > f.log_r[i - 1])) throw HardyError(ErrorKind::InvalidArgument, "log r grid must increase");
  }
  auto slope_at = [&](std::size_t i) {
    if (!f.g_slope.empty()) return f.g_slope[i];
    if (i == 0) return (f.g[1] - f.g[0]) / (f.log_r[1] - f.log_r[0]);
    if (i == n - 1) return (f.g[n - 1] - f.g[n - 2]) / (f.log_r[n - 1] - f.log_r[n - 2]);
    return (f.g[i + 1] - f.g[i - 1]) / (f.log_r[i + 1] - f.log_r[i - 1]);
  };
  // f' = r^(c-1) (c g + g_t); both integrands carry r^(e + 1 - p + p c) in log r.
  const double c = f.power;
  const double exponent = weight_exponent + 1.0 - p + p * c;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt_left = i == 0 ? 0.0 : f.log_r[i] - f.log_r[i - 1];
    const double dt_right = i == n - 1 ? 0.0 : f.log_r[i + 1] - f.log_r[i];
    const double weight = 0.5 * (dt_left + dt_right) * std::exp(exponent * f.log_r[i]);
    num += weight * std::pow(std::abs(c * f.g[i] + slope_at(i)), p);
    den += weight * std::pow(std::abs(f.g[i]), p);
  }
  if (!(den > 0.0)) throw HardyError(ErrorKind::InvalidArgument, "radial profile has zero denominator");
  return num / den;
}

RayleighEvaluation verify_inequality(const HardyParams& params, const ConeSpec& cone,
                                     const SeparatedTestFunction& testfn, const VerifyOptions& options) {
  require_admissible(params, cone);
  testfn.validate();
  const auto domain = bc_for_cone(params, cone);
  const auto& phi = testfn.angular;
  const auto& first = phi.mesh.nodes.front();
  const auto& last = phi.mesh.nodes.back();
  const double s2 = kHalfPi - domain.theta2;
  if (std::abs(first.theta - domain.theta1) > 1e-12 || std::abs(last.coangle - s2) > 1e-12) {
    throw HardyError(ErrorKind::InvalidArgument, "angular profile does not span the cone cross-section");
  }
  double scale = 0.0;
  for (double v : phi.values) scale = std::max(scale, std::abs(v));
  const bool cutoff_clears_sigma0 = testfn.cutoff.has_value() && domain.theta2 == kHalfPi;
  if ((domain.bc1 == EndCondition::Dirichlet && std::abs(phi.values.front()) > 1e-12 * scale) ||
      (domain.bc2 == EndCondition::Dirichlet && !cutoff_clears_sigma0 && std::abs(phi.values.back()) > 1e-12 * scale)) {
    throw HardyError(ErrorKind::InvalidArgument, "angular profile violates the Dirichlet data of the cone");
  }

  const auto weight = angular_weight(params, cone);
  RayleighEvaluation eval;
  if (const auto* split = std::get_if<PowerLawSplit>(&testfn.radial)) {
    if (testfn.cutoff) {
      throw HardyError(ErrorKind::InvalidArgument, "log cutoff is only supported with a power window");
    }
    const auto rule = composite_rule(weight, phi.mesh, options.points_per_element);
    eval = udelta_with_prefactor(params, phi, split->delta, rule, weight.prefactor);
  } else if (testfn.cutoff) {
    eval = power_window_cutoff(params, std::get<PowerWindow>(testfn.radial), testfn.cutoff->h, phi, weight, options);
  } else {
    eval = power_window(params, std::get<PowerWindow>(testfn.radial), phi, weight, options);
  }

  if (auto closed = closed_form_constant(params, cone)) {
    eval.closed_form_reference = closed->value;
    eval.reference = closed->value;
  } else {
    eval.reference = solve_M(params, cone, options.mesh_size).M;
  }
  return eval;
}

}  // namespace hardy
