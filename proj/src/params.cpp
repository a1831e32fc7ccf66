#include "hardy/params.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace hardy {

namespace {

constexpr double kAngleSnap = 1e-12;

bool near(double x, double y) { return std::abs(x - y) <= 1e-13 * std::max(1.0, std::abs(y)); }

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw HardyError(ErrorKind::InvalidArgument,
                     "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Inadmissible: return "inadmissible";
    case ErrorKind::Integrability: return "integrability";
    case ErrorKind::NoConvergence: return "no_convergence";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

HardyParams::HardyParams(int d, int k, double p, double a, double b)
    : d_(d), k_(k), p_(p), a_(a), b_(b) {
  if (d < 2) throw HardyError(ErrorKind::InvalidArgument, "dimension d must be >= 2");
  if (k < 1 || k >= d) throw HardyError(ErrorKind::InvalidArgument, "k must satisfy 1 <= k < d");
  if (!(p > 1.0) || !std::isfinite(p)) throw HardyError(ErrorKind::InvalidArgument, "p must be > 1");
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw HardyError(ErrorKind::InvalidArgument, "a and b must be finite");
  }
}

HardyParams HardyParams::with_flipped_b() const {
  return HardyParams(d_, k_, p_, a_, 2.0 * (d_ + a_ - p_) - b_);
}

HardyExponent hardy_exponent(const HardyParams& params) {
  const double h = (params.d() + params.a() - params.p() - params.b()) / params.p();
  return {h, std::pow(std::abs(h), params.p())};
}

// ---------------------------------------------------------------------------

AxisymmetricBand::AxisymmetricBand(double theta1, double theta2) : theta1_(theta1), theta2_(theta2) {
  if (!std::isfinite(theta1) || !std::isfinite(theta2)) {
    throw HardyError(ErrorKind::InvalidArgument, "band angles must be finite");
  }
  if (std::abs(theta1_) <= kAngleSnap) theta1_ = 0.0;
  if (std::abs(theta2_ - kHalfPi) <= kAngleSnap) theta2_ = kHalfPi;
  if (theta1_ < 0.0 || theta2_ > kHalfPi) {
    throw HardyError(ErrorKind::InvalidArgument, "band angles must lie in [0, pi/2]");
  }
  if (!(theta1_ < theta2_)) {
    throw HardyError(ErrorKind::InvalidArgument, "band requires theta1 < theta2");
  }
}

ConeSpec parse_cone(std::string_view text) {
  if (text == "full") return FullSpace{};
  if (text == "punctured") return PuncturedSpace{};
  if (text == "complement-sigma0") return ComplementSigma0{};
  if (text == "half-space") return HalfSpace{};
  if (text.starts_with("band:")) {
    auto rest = text.substr(5);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      throw HardyError(ErrorKind::InvalidArgument, "band cone must be band:<theta1>:<theta2>");
    }
    return AxisymmetricBand(parse_double(rest.substr(0, colon), "theta1"),
                            parse_double(rest.substr(colon + 1), "theta2"));
  }
  throw HardyError(ErrorKind::InvalidArgument, "unknown cone '" + std::string(text) + "'");
}

std::string to_string(const ConeSpec& cone) {
  struct Visitor {
    std::string operator()(const FullSpace&) const { return "full"; }
    std::string operator()(const PuncturedSpace&) const { return "punctured"; }
    std::string operator()(const ComplementSigma0&) const { return "complement-sigma0"; }
    std::string operator()(const HalfSpace&) const { return "half-space"; }
    std::string operator()(const AxisymmetricBand& band) const {
      std::ostringstream out;
      out.precision(17);
      out << "band:" << band.theta1() << ':' << band.theta2();
      return out.str();
    }
  };
  return std::visit(Visitor{}, cone);
}

bool closure_meets_sigma0(const ConeSpec& cone) {
  if (const auto* band = std::get_if<AxisymmetricBand>(&cone)) return band->touches_sigma0();
  return true;
}

// ---------------------------------------------------------------------------

bool weight_locally_integrable(const HardyParams& params, double beta, IntegrationDomain domain) {
  const bool punctured = params.cylindrical_order() > 0.0;
  if (domain == IntegrationDomain::Punctured) return punctured;
  return punctured && params.d() + params.a() > beta;
}

bool sphere_weight_integrable(const HardyParams& params) { return params.cylindrical_order() > 0.0; }

AdmissibilityReport cone_admissible(const HardyParams& params, const ConeSpec& cone) {
  AdmissibilityReport report;
  const double ka = params.cylindrical_order();
  const double lhs_beta = params.b() + params.p();
  report.weight_integrable_punctured = weight_locally_integrable(params, lhs_beta, IntegrationDomain::Punctured);
  report.weight_integrable_origin = weight_locally_integrable(params, lhs_beta, IntegrationDomain::WholeSpace);
  report.sphere_weight_integrable = sphere_weight_integrable(params);
  report.muckenhoupt_Ap = ka > 0.0 && ka < params.p();
  report.superdegenerate = ka >= params.p();

  bool admissible = !closure_meets_sigma0(cone) || ka > 0.0;
  if (!admissible) report.notes.emplace_back("k+a <= 0 and the cone closure meets {y = 0}");

  if (std::holds_alternative<FullSpace>(cone)) {
    if (params.d() + params.a() <= lhs_beta) {
      admissible = false;
      report.notes.emplace_back("full space requires d+a > p+b");
    }
  }
  if (std::holds_alternative<HalfSpace>(cone) && params.k() != 1) {
    admissible = false;
    report.notes.emplace_back("half-space cone requires k = 1");
  }
  report.cone_admissible = admissible;
  if (report.superdegenerate) report.notes.emplace_back("superdegenerate: k+a >= p");
  return report;
}

void require_admissible(const HardyParams& params, const ConeSpec& cone) {
  auto report = cone_admissible(params, cone);
  if (report.cone_admissible) return;
  std::string message = "cone " + to_string(cone) + " is not admissible";
  for (const auto& note : report.notes) message += "; " + note;
  throw HardyError(ErrorKind::Inadmissible, message);
}

// ---------------------------------------------------------------------------

std::optional<ClosedForm> closed_form_constant(const HardyParams& params, const ConeSpec& cone) {
  require_admissible(params, cone);
  const auto [h, h_abs_p] = hardy_exponent(params);
  const double p = params.p();
  const double ka = params.cylindrical_order();
  const int d = params.d();
  const int k = params.k();

  struct Visitor {
    double h, h_abs_p, p, ka, a, b;
    int d, k;

    std::optional<ClosedForm> operator()(const FullSpace&) const {
      if (!(h > 0.0)) return std::nullopt;
      if (b == 0.0 && near(a, p - k)) {
        return ClosedForm{std::pow((d - k) / p, p), "mixed-threshold"};
      }
      return ClosedForm{std::pow(h, p), "radial-hardy-full"};
    }
    std::optional<ClosedForm> operator()(const PuncturedSpace&) const {
      return ClosedForm{h_abs_p, "radial-hardy-punctured"};
    }
    std::optional<ClosedForm> operator()(const ComplementSigma0&) const {
      if (ka >= p) return ClosedForm{h_abs_p, "superdegenerate"};
      if (p == 2.0) {
        return ClosedForm{(d - k) * std::max(0.0, 2.0 - ka) + h * h, "sigma0-complement-p2"};
      }
      return std::nullopt;
    }
    std::optional<ClosedForm> operator()(const HalfSpace&) const {
      if (a >= p - 1.0) return ClosedForm{h_abs_p, "half-space-superdegenerate"};
      if (p == 2.0) {
        return ClosedForm{(d - 1) * std::max(0.0, 1.0 - a) + h * h, "half-space-p2"};
      }
      return std::nullopt;
    }
    std::optional<ClosedForm> operator()(const AxisymmetricBand& band) const {
      // The band (0, pi/2) with Sigma0 kept is the punctured space.
      if (band.touches_pole() && band.touches_sigma0()) {
        return ClosedForm{h_abs_p, "radial-hardy-punctured"};
      }
      return std::nullopt;
    }
  };
  return std::visit(Visitor{h, h_abs_p, p, ka, params.a(), params.b(), d, k}, cone);
}

double cylindrical_constant(const HardyParams& params) {
  const double excess = params.cylindrical_order() - params.p();
  if (!(excess > 0.0)) {
    throw HardyError(ErrorKind::InvalidArgument,
                     "cylindrical inequality needs a > p - k (weight not integrable or constant vanishes)");
  }
  return std::pow(excess / params.p(), params.p());
}

}  // namespace hardy
