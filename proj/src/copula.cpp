#include "ccr/copula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace ccr {

namespace {

// s solving e^{-theta s} = 1 + e^{-u} (e^{-theta} - 1), split by regime so
// neither branch cancels or overflows.
double frank_inverse_generator(double theta, double u)
{
  if (theta > 0.0) {
    const double arg = std::exp(-u) * std::expm1(-theta);
    if (arg > -0.5)
      return -std::log1p(arg) / theta;
    return -std::log(-std::expm1(-u) + std::exp(-u - theta)) / theta;
  }
  const double a = -theta;
  if (u >= a) {
    const double arg = a < 700.0 ? std::exp(-u) * std::expm1(a) : std::exp(a - u) - std::exp(-u);
    return std::log1p(arg) / a;
  }
  return (a - u + std::log1p(std::exp(-a) * std::expm1(u))) / a;
}

// log(1 - exp(-x)) for x > 0 without cancellation at either end.
double log1mexp(double x)
{
  return x > std::log(2.0) ? std::log1p(-std::exp(-x)) : std::log(-std::expm1(-x));
}

void require_unit_open_closed(double s)
{
  if (!(s > 0.0 && s <= 1.0))
    throw std::domain_error("generator argument must lie in (0, 1], got " + std::to_string(s));
}

void require_unit_open(double p, const char* what)
{
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error(std::string(what) + " must lie in (0, 1), got " + std::to_string(p));
}

// -theta / expm1(-theta*pi): the Frank value of -phi''/phi', continuous
// through theta = 0 where it equals 1/pi.
double frank_neg_log_ratio(double theta, double pi)
{
  if (theta == 0.0)
    return 1.0 / pi;
  return -theta / std::expm1(-theta * pi);
}

} // namespace

std::string_view to_string(CopulaFamily family)
{
  switch (family) {
    case CopulaFamily::Clayton:
      return "clayton";
    case CopulaFamily::Gumbel:
      return "gumbel";
    case CopulaFamily::Frank:
      return "frank";
    case CopulaFamily::Independence:
      return "independence";
  }
  return "unknown";
}

CopulaFamily parse_family(std::string_view name)
{
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  if (lower == "clayton")
    return CopulaFamily::Clayton;
  if (lower == "gumbel")
    return CopulaFamily::Gumbel;
  if (lower == "frank")
    return CopulaFamily::Frank;
  if (lower == "independence")
    return CopulaFamily::Independence;
  throw std::invalid_argument("unknown copula family '" + std::string(name) + "'");
}

bool theta_in_domain(CopulaFamily family, double theta)
{
  if (!std::isfinite(theta))
    return false;
  switch (family) {
    case CopulaFamily::Clayton:
      return theta >= -1.0 && theta != 0.0;
    case CopulaFamily::Gumbel:
      return theta > 1.0;
    case CopulaFamily::Frank:
      return theta != 0.0;
    case CopulaFamily::Independence:
      return theta == 0.0;
  }
  return false;
}

CopulaModel::CopulaModel(CopulaFamily family, double theta)
  : family_(family)
  , theta_(theta)
{
  if (!theta_in_domain(family, theta))
    throw std::domain_error("theta = " + std::to_string(theta) + " outside the " +
                            std::string(to_string(family)) + " parameter domain");
}

DerivativeRatio::DerivativeRatio(double r)
  : r_(r)
{
  if (!std::isfinite(r))
    throw std::domain_error("derivative ratio is not finite");
}

DerivativeRatio DerivativeRatio::from_partials(double dpi1, double dpi2, double d2pi)
{
  if (dpi1 == 0.0 || dpi2 == 0.0)
    throw std::domain_error("vanishing first partial derivative");
  return DerivativeRatio(d2pi / (dpi1 * dpi2));
}

GeneratorValue generator(const CopulaModel& model, double s)
{
  require_unit_open_closed(s);
  const double theta = model.theta();
  const double log_s = std::log(s);
  switch (model.family()) {
    case CopulaFamily::Clayton: {
      // (s^-theta - 1)/theta, written to stay accurate for small theta
      const double phi = std::expm1(-theta * log_s) / theta;
      const double dphi = -std::exp((-theta - 1.0) * log_s);
      const double d2phi = (theta + 1.0) * std::exp((-theta - 2.0) * log_s);
      return { phi, dphi, d2phi };
    }
    case CopulaFamily::Gumbel: {
      const double l = -log_s;
      if (l == 0.0)
        return { 0.0, 0.0, theta < 2.0 ? std::numeric_limits<double>::infinity()
                                       : (theta == 2.0 ? 2.0 : 0.0) };
      const double phi = std::pow(l, theta);
      const double dphi = -theta * std::pow(l, theta - 1.0) / s;
      const double d2phi = theta * std::pow(l, theta - 2.0) * (theta - 1.0 + l) / (s * s);
      return { phi, dphi, d2phi };
    }
    case CopulaFamily::Frank: {
      double phi = 0.0;
      if (theta > 0.0) {
        phi = log1mexp(theta) - log1mexp(theta * s);
      } else {
        const double a = -theta;
        phi = a * (1.0 - s) - log1mexp(a * s) + log1mexp(a);
      }
      const double em = std::expm1(theta * s);
      const double dphi = -theta / em;
      const double d2phi = theta * theta / (em * -std::expm1(-theta * s));
      return { phi, dphi, d2phi };
    }
    case CopulaFamily::Independence:
      return { -log_s, -1.0 / s, 1.0 / (s * s) };
  }
  throw std::logic_error("unhandled copula family");
}

double inverse_generator(const CopulaModel& model, double u)
{
  if (!(u >= 0.0))
    throw std::domain_error("inverse generator argument must be >= 0");
  if (u == 0.0)
    return 1.0;
  const double theta = model.theta();
  switch (model.family()) {
    case CopulaFamily::Clayton:
      if (theta < 0.0 && u >= -1.0 / theta)
        return 0.0;
      return std::exp(-std::log1p(theta * u) / theta);
    case CopulaFamily::Gumbel:
      return std::exp(-std::pow(u, 1.0 / theta));
    case CopulaFamily::Frank:
      return frank_inverse_generator(theta, u);
    case CopulaFamily::Independence:
      return std::exp(-u);
  }
  throw std::logic_error("unhandled copula family");
}

double joint_survival(const CopulaModel& model, double s1, double s2)
{
  const double u = generator(model, s1).phi + generator(model, s2).phi;
  // rounding can push the composition a hair past the Frechet upper bound
  return std::min(inverse_generator(model, u), std::min(s1, s2));
}

double phi_log_deriv_ratio(const CopulaModel& model, double pi)
{
  require_unit_open(pi, "pi");
  const double theta = model.theta();
  switch (model.family()) {
    case CopulaFamily::Clayton:
      return -(theta + 1.0) / pi;
    case CopulaFamily::Gumbel:
      return -((theta - 1.0) / -std::log(pi) + 1.0) / pi;
    case CopulaFamily::Frank:
      return -frank_neg_log_ratio(theta, pi);
    case CopulaFamily::Independence:
      return -1.0 / pi;
  }
  throw std::logic_error("unhandled copula family");
}

ThetaSolution theta_from_ratio(CopulaFamily family, double pi, DerivativeRatio ratio)
{
  require_unit_open(pi, "pi");
  const double r = ratio.value();
  switch (family) {
    case CopulaFamily::Clayton: {
      const double theta = pi * r - 1.0;
      ThetaStatus status = ThetaStatus::Admissible;
      if (theta == 0.0)
        status = ThetaStatus::NearIndependence;
      else if (!theta_in_domain(family, theta))
        status = ThetaStatus::Inadmissible;
      return { theta, status, 0 };
    }
    case CopulaFamily::Gumbel: {
      const double theta = 1.0 + (1.0 - pi * r) * std::log(pi);
      return { theta, theta_in_domain(family, theta) ? ThetaStatus::Admissible
                                                     : ThetaStatus::Inadmissible,
               0 };
    }
    case CopulaFamily::Frank: {
      auto f = [pi, r](double theta) { return frank_neg_log_ratio(theta, pi) - r; };
      const double lo = -kFrankBracket;
      const double hi = kFrankBracket;
      const double f_lo = f(lo);
      const double f_hi = f(hi);
      if (f_lo == 0.0)
        return { lo, ThetaStatus::Admissible, 0 };
      if (f_hi == 0.0)
        return { hi, ThetaStatus::Admissible, 0 };
      if ((f_lo < 0.0) == (f_hi < 0.0))
        throw NoRootError("Frank identification equation has no root in [-" +
                          std::to_string(kFrankBracket) + ", " +
                          std::to_string(kFrankBracket) + "] for R = " + std::to_string(r));
      std::uintmax_t iterations = 200;
      auto tol = [](double a, double b) { return std::fabs(b - a) <= kFrankThetaTolerance; };
      const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iterations);
      const double theta = 0.5 * (a + b);
      const auto status = std::fabs(theta) < kFrankDeadZone ? ThetaStatus::NearIndependence
                                                            : ThetaStatus::Admissible;
      return { theta, status, static_cast<int>(iterations) };
    }
    case CopulaFamily::Independence:
      throw std::invalid_argument("independence copula has no parameter to identify");
  }
  throw std::logic_error("unhandled copula family");
}

double debye1(double x)
{
  if (x == 0.0)
    return 1.0;
  const double ax = std::fabs(x);
  auto integrand = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
  const double integral =
    boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, ax, 15, 1e-13);
  const double d = integral / ax;
  // D1(-x) = D1(x) + x/2
  return x > 0.0 ? d : d + ax / 2.0;
}

double kendalls_tau(const CopulaModel& model)
{
  const double theta = model.theta();
  switch (model.family()) {
    case CopulaFamily::Clayton:
      return theta / (theta + 2.0);
    case CopulaFamily::Gumbel:
      return 1.0 - 1.0 / theta;
    case CopulaFamily::Frank:
      return 1.0 - 4.0 / theta * (1.0 - debye1(theta));
    case CopulaFamily::Independence:
      return 0.0;
  }
  throw std::logic_error("unhandled copula family");
}

double theta_from_tau(CopulaFamily family, double tau)
{
  if (!(tau > -1.0 && tau < 1.0))
    throw std::domain_error("Kendall's tau must lie in (-1, 1)");
  switch (family) {
    case CopulaFamily::Clayton: {
      const double theta = 2.0 * tau / (1.0 - tau);
      if (!theta_in_domain(family, theta))
        throw std::domain_error("tau = " + std::to_string(tau) + " not attainable by Clayton");
      return theta;
    }
    case CopulaFamily::Gumbel: {
      if (!(tau > 0.0))
        throw std::domain_error("Gumbel requires tau > 0");
      return 1.0 / (1.0 - tau);
    }
    case CopulaFamily::Frank: {
      if (tau == 0.0)
        throw std::domain_error("Frank requires tau != 0");
      auto f = [tau](double theta) {
        return kendalls_tau(CopulaModel(CopulaFamily::Frank, theta)) - tau;
      };
      double lo = tau > 0.0 ? 1e-4 : -200.0;
      double hi = tau > 0.0 ? 200.0 : -1e-4;
      const double f_lo = f(lo);
      const double f_hi = f(hi);
      if ((f_lo < 0.0) == (f_hi < 0.0))
        throw std::domain_error("tau = " + std::to_string(tau) + " outside the Frank search range");
      std::uintmax_t iterations = 200;
      auto tol = [](double a, double b) { return std::fabs(b - a) <= 1e-12 * std::fabs(a); };
      const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iterations);
      return 0.5 * (a + b);
    }
    case CopulaFamily::Independence:
      if (tau != 0.0)
        throw std::domain_error("independence requires tau = 0");
      return 0.0;
  }
  throw std::logic_error("unhandled copula family");
}

bool check_ordering_condition(CopulaFamily family,
                              double theta1,
                              double theta2,
                              std::span<const double> grid)
{
  if (!(theta1 > theta2))
    throw std::invalid_argument("ordering condition requires theta1 > theta2");
  const CopulaModel m1(family, theta1);
  const CopulaModel m2(family, theta2);
  double previous = -std::numeric_limits<double>::infinity();
  double previous_s = 0.0;
  for (double s : grid) {
    require_unit_open(s, "ordering grid point");
    if (!(s > previous_s))
      throw std::invalid_argument("ordering grid must be strictly increasing");
    previous_s = s;
    const double ratio = generator(m2, s).dphi / generator(m1, s).dphi;
    if (!(ratio > previous))
      return false;
    previous = ratio;
  }
  return true;
}

} // namespace ccr
