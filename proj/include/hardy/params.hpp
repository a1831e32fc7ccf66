#pragma once

// Problem parameters for mixed-weight Hardy inequalities
//
//   m * Int_C |y|^a |z|^(-b-p) |u|^p dz  <=  Int_C |y|^a |z|^(-b) |grad u|^p dz
//
// on a cone C in R^d = R^(d-k) x R^k, z = (x, y).  This header holds the
// parameter tuple, the cone catalogue, the local-integrability predicates and
// the dispatch table of every sharp constant that is known in closed form.

#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hardy {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

enum class ErrorKind { InvalidArgument, Inadmissible, Integrability, NoConvergence, Io };

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the library carries a kind so the CLI can
/// emit a machine-readable error object.
class HardyError : public std::runtime_error {
 public:
  HardyError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// The tuple (d, k, p, a, b).  Construction enforces d >= 2, 1 <= k < d and
/// p > 1.  a = 0 is accepted (unweighted Laplace-Beltrami channel).
class HardyParams {
 public:
  HardyParams(int d, int k, double p, double a, double b);

  int d() const noexcept { return d_; }
  int k() const noexcept { return k_; }
  double p() const noexcept { return p_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  /// k + a, the effective dimension of the cylindrical weight |y|^a.
  double cylindrical_order() const noexcept { return k_ + a_; }

  /// Same parameters with b replaced by 2(d+a-p) - b, which flips the sign of H.
  HardyParams with_flipped_b() const;

  friend bool operator==(const HardyParams&, const HardyParams&) = default;

 private:
  int d_;
  int k_;
  double p_;
  double a_;
  double b_;
};

struct HardyExponent {
  double value;      // H = (d + a - p - b) / p, signed
  double abs_pow_p;  // |H|^p
};

HardyExponent hardy_exponent(const HardyParams& params);

// ---------------------------------------------------------------------------
// Cones.  Polar angle theta in [0, pi/2] with |y| = r cos(theta), |x| = r sin(theta).

struct FullSpace {
  friend bool operator==(const FullSpace&, const FullSpace&) = default;
};
struct PuncturedSpace {
  friend bool operator==(const PuncturedSpace&, const PuncturedSpace&) = default;
};
/// R^d minus the singular subspace {y = 0}.
struct ComplementSigma0 {
  friend bool operator==(const ComplementSigma0&, const ComplementSigma0&) = default;
};
/// {y > 0}, only meaningful for k = 1.
struct HalfSpace {
  friend bool operator==(const HalfSpace&, const HalfSpace&) = default;
};

/// {theta1 < theta < theta2}.  If theta2 = pi/2 the band contains the
/// singular set as interior points; removing it gives ComplementSigma0-like cones.
class AxisymmetricBand {
 public:
  AxisymmetricBand(double theta1, double theta2);
  double theta1() const noexcept { return theta1_; }
  double theta2() const noexcept { return theta2_; }
  bool touches_pole() const noexcept { return theta1_ == 0.0; }
  bool touches_sigma0() const noexcept { return theta2_ == kHalfPi; }
  friend bool operator==(const AxisymmetricBand&, const AxisymmetricBand&) = default;

 private:
  double theta1_;
  double theta2_;
};

using ConeSpec = std::variant<FullSpace, PuncturedSpace, ComplementSigma0, HalfSpace, AxisymmetricBand>;

/// CLI spelling: full | punctured | complement-sigma0 | half-space | band:<t1>:<t2>
ConeSpec parse_cone(std::string_view text);
std::string to_string(const ConeSpec& cone);

/// True when the closure of the spherical cross-section meets {y = 0}.
bool closure_meets_sigma0(const ConeSpec& cone);

// ---------------------------------------------------------------------------
// Admissibility

enum class IntegrationDomain { Punctured, WholeSpace };

/// Local integrability of |y|^a |z|^(-beta) away from the origin (Punctured)
/// or on all of R^d (WholeSpace).
bool weight_locally_integrable(const HardyParams& params, double beta, IntegrationDomain domain);

/// |Pi sigma|^a in L^1 of the unit sphere.
bool sphere_weight_integrable(const HardyParams& params);

struct AdmissibilityReport {
  bool weight_integrable_punctured = false;
  bool weight_integrable_origin = false;
  bool sphere_weight_integrable = false;
  bool cone_admissible = false;
  bool muckenhoupt_Ap = false;
  bool superdegenerate = false;
  std::vector<std::string> notes;
};

AdmissibilityReport cone_admissible(const HardyParams& params, const ConeSpec& cone);

/// Throws HardyError(Inadmissible) with the collected notes if the cone is not admissible.
void require_admissible(const HardyParams& params, const ConeSpec& cone);

// ---------------------------------------------------------------------------
// Closed forms

struct ClosedForm {
  double value;
  std::string source;
};

/// Sharp constant m_{p,a,b}(C) when it is known explicitly, empty otherwise.
/// Throws HardyError(Inadmissible) for inadmissible cones.
std::optional<ClosedForm> closed_form_constant(const HardyParams& params, const ConeSpec& cone);

/// Constant ((k+a-p)/p)^p of the purely cylindrical inequality; requires a > p - k.
double cylindrical_constant(const HardyParams& params);

}  // namespace hardy
