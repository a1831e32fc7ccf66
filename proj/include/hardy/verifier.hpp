#pragma once

// Numerical certification of the Hardy inequality and of the sharpness of its
// constant with separated test functions u(z) = R(|z|) Phi(theta).  Radial
// integrals of pure powers are done in closed form; angular integrals use the
// weighted quadrature rules.

#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "hardy/params.hpp"
#include "hardy/quadrature.hpp"
#include "hardy/spherical.hpp"

namespace hardy {

/// r^(-H+delta) on r < 1 and r^(-H-delta) on r > 1.
struct PowerLawSplit {
  double delta;
};

/// r^s on [r0, r1], decaying smoothly to zero over one unit of log r on each side.
struct PowerWindow {
  double s;
  double r0;
  double r1;
};

/// Multiplier eta(-log|y| / h): 1 for |y| >= e^-h, 0 for |y| <= e^-2h.
struct LogCutoff {
  int h;
};

using RadialProfile = std::variant<PowerLawSplit, PowerWindow>;

struct SeparatedTestFunction {
  RadialProfile radial;
  std::optional<LogCutoff> cutoff;
  DiscretizedFunction angular;

  void validate() const;
};

struct RayleighEvaluation {
  double numerator = 0.0;    // Int |y|^a |z|^-b |grad u|^p
  double denominator = 0.0;  // Int |y|^a |z|^(-b-p) |u|^p
  double quotient = 0.0;
  std::optional<double> closed_form_reference;
  std::optional<double> reference;  // closed form, else the numerical M

  bool satisfies_lower_bound(double tol) const { return !reference || quotient >= *reference - tol; }
};

/// Smooth transition S(x) = f(x) / (f(x) + f(1-x)), f(x) = exp(-1/x), and S'.
double smooth_step(double x);
double smooth_step_slope(double x);

/// eta(t) = 1 - S(t - 1): 1 on t <= 1, 0 on t >= 2.
struct CutoffProfile {
  std::function<double(double)> value;
  std::function<double(double)> slope;
};
CutoffProfile smooth_cutoff();

/// Int_lo^hi r^exponent dr in closed form; hi may be +infinity.  Throws if divergent.
double radial_power_integral(double exponent, double lo, double hi);

/// Composite rule on the mesh of `phi` matching the solver quadrature.
QuadratureRule profile_rule(const HardyParams& params, const DiscretizedFunction& phi, int points_per_element = 8);

/// Quotient of u_delta = r^(-H +- delta) Phi.  For p = 2 and Phi the discrete
/// eigenfunction under its own rule this is M_h + delta^2 to round-off.
RayleighEvaluation evaluate_quotient_udelta(const HardyParams& params, const DiscretizedFunction& phi, double delta,
                                            const QuadratureRule& rule,
                                            std::optional<double> closed_form_reference = std::nullopt);

/// Denominator of u_delta, checked against (2/(p delta)) Int |Pi sigma|^a |Phi|^p.
double denominator_blowup(const HardyParams& params, const DiscretizedFunction& phi, double delta,
                          const QuadratureRule& rule);

struct CutoffDecay {
  double i_h;             // Int_{S_h} |y|^a |z|^-b |u|^p |grad eta_h|^p
  double strip_integral;  // Int_{e^-2h}^{e^-h} rho^(k+a-p-1) d rho
};

/// Strip energy of the cutoff eta(-log|y|/h) against the radial bump
/// u(z) = B(|z|) supported in support.first < |z| < support.second.
/// Requires k + a >= p and h >= 1.
CutoffDecay cutoff_decay(const HardyParams& params, std::pair<double, double> support, int h,
                         const CutoffProfile& eta = smooth_cutoff());

/// f(r) = r^power g(r) sampled on an increasing log r grid.  g_slope holds
/// dg/dlog r; leave it empty to use centred differences.
struct LogGridProfile {
  std::vector<double> log_r;
  std::vector<double> g;
  std::vector<double> g_slope;
  double power = 0.0;
};

/// Int r^e |f'|^p dr / Int r^(e-p) |f|^p dr by the trapezoidal rule in log r,
/// e = weight_exponent (= d + a - b - 1 for the reduced problem).
double radial_hardy_quotient(double p, double weight_exponent, const LogGridProfile& f);

struct VerifyOptions {
  int mesh_size = kDefaultMeshSize;  // for the numerical reference when no closed form exists
  int points_per_element = 8;
  int radial_points = 64;  // Gauss-Legendre points per unit of log r
};

/// Full quotient of a separated test function on the cone, with the sharp
/// constant (closed form or solve_M) attached as the reference.
RayleighEvaluation verify_inequality(const HardyParams& params, const ConeSpec& cone,
                                     const SeparatedTestFunction& testfn, const VerifyOptions& options = {});

}  // namespace hardy
