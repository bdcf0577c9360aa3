#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ccr {

enum class CopulaFamily
{
  Clayton,
  Gumbel,
  Frank,
  Independence
};

std::string_view to_string(CopulaFamily family);
// Accepts "clayton", "gumbel", "frank", "independence" (case-insensitive).
CopulaFamily parse_family(std::string_view name);

bool theta_in_domain(CopulaFamily family, double theta);

//! One-parameter Archimedean copula. The parameter is validated on
//! construction; an instance always holds an in-domain theta.
//!
//! Domains: Clayton [-1, inf) \ {0}, Gumbel (1, inf), Frank finite and
//! nonzero. Independence carries no parameter and stores theta = 0.
class CopulaModel
{
public:
  CopulaModel(CopulaFamily family, double theta);

  static CopulaModel independence() { return CopulaModel(); }

  CopulaFamily family() const noexcept { return family_; }
  double theta() const noexcept { return theta_; }

private:
  CopulaModel() = default;

  CopulaFamily family_{ CopulaFamily::Independence };
  double theta_{ 0.0 };
};

struct GeneratorValue
{
  double phi;
  double dphi;
  double d2phi;
};

//! Ratio of the cross partial of the joint survival surface to the
//! product of its first partials, d2pi/(dpi1*dpi2).
class DerivativeRatio
{
public:
  explicit DerivativeRatio(double r);

  // Throws std::domain_error when a first partial vanishes or the ratio
  // is not finite.
  static DerivativeRatio from_partials(double dpi1, double dpi2, double d2pi);

  double value() const noexcept { return r_; }

private:
  double r_;
};

// Generator phi and its first two derivatives in s, s in (0, 1].
GeneratorValue generator(const CopulaModel& model, double s);

// Returns s with phi(s) = u, or 0 when u >= phi(0).
double inverse_generator(const CopulaModel& model, double u);

// phi^{-1}(phi(s1) + phi(s2)) for s1, s2 in (0, 1].
double joint_survival(const CopulaModel& model, double s1, double s2);

// phi''(pi) / phi'(pi) for pi in (0, 1), from closed forms.
double phi_log_deriv_ratio(const CopulaModel& model, double pi);

enum class ThetaStatus
{
  Admissible,
  // Solved value lies outside the family's parameter domain.
  Inadmissible,
  // Frank root inside the dead zone around 0, or Clayton root at exactly 0.
  NearIndependence
};

struct ThetaSolution
{
  double theta;
  ThetaStatus status;
  // Root-finder iterations; 0 for closed-form families.
  int iterations;
};

class NoRootError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kFrankBracket = 50.0;
inline constexpr double kFrankDeadZone = 1e-6;
inline constexpr double kFrankThetaTolerance = 1e-12;

//! Solves phi''_theta(pi)/phi'_theta(pi) = -R for theta.
//!
//! Clayton and Gumbel have closed forms; Frank is solved by bracketed
//! root finding on [-kFrankBracket, kFrankBracket]. Throws NoRootError if
//! the Frank bracket has no sign change and std::invalid_argument for the
//! independence family, which has nothing to identify.
ThetaSolution theta_from_ratio(CopulaFamily family, double pi, DerivativeRatio ratio);

// First Debye function D1(x) = x^{-1} int_0^x t/(e^t - 1) dt, any real x.
double debye1(double x);

double kendalls_tau(const CopulaModel& model);

// Inverse of kendalls_tau within a family.
double theta_from_tau(CopulaFamily family, double tau);

// True iff phi'_{theta2}(s)/phi'_{theta1}(s) is strictly increasing over
// the grid. Requires theta1 > theta2 and a strictly increasing grid in (0, 1).
bool check_ordering_condition(CopulaFamily family,
                              double theta1,
                              double theta2,
                              std::span<const double> grid);

} // namespace ccr
