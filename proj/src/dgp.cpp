#include "ccr/dgp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ccr/parallel.hpp"
#include "ccr/random.hpp"

namespace ccr {

namespace {

void require_open_unit(double x, const char* what)
{
  if (!(x > 0.0 && x < 1.0))
    throw std::domain_error(std::string(what) + " must lie in (0, 1), got " + std::to_string(x));
}

// dC/ds1 at (s1, s2) for an Archimedean copula: phi'(s1) / phi'(C(s1, s2)).
double conditional_cdf(const CopulaModel& model, double s1, double s2)
{
  const double c = joint_survival(model, s1, s2);
  if (c <= 0.0)
    return 0.0;
  return generator(model, s1).dphi / generator(model, c).dphi;
}

double clayton_conditional_inverse(double theta, double s1, double v2)
{
  if (theta == -1.0)
    return 1.0 - s1; // countermonotonic: all mass on s1 + s2 = 1
  const double log_s1 = std::log(s1);
  // s2 = (1 - s1^-theta + (v2 s1^(theta+1))^(-theta/(theta+1)))^(-1/theta)
  const double a = std::expm1(-theta * log_s1);
  const double b = std::expm1(-theta / (theta + 1.0) * (std::log(v2) + (theta + 1.0) * log_s1));
  return std::exp(-std::log1p(b - a) / theta);
}

} // namespace

void WeibullMarginal::validate() const
{
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("Weibull lambda must be > 0");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("Weibull eta must be > 0");
  if (!std::isfinite(beta))
    throw std::invalid_argument("Weibull beta must be finite");
}

double WeibullMarginal::cumulative_hazard(double t) const
{
  return lambda * std::pow(t, eta);
}

double WeibullMarginal::survival(double t, double z) const
{
  return std::exp(-cumulative_hazard(t) * std::exp(z * beta));
}

double WeibullMarginal::survival_dz(double t, double z) const
{
  const double scaled = cumulative_hazard(t) * std::exp(z * beta);
  return -std::exp(-scaled) * scaled * beta;
}

void DgpConfig::validate() const
{
  marginals[0].validate();
  marginals[1].validate();
  if (!(covariate_scale > 0.0) || !std::isfinite(covariate_scale))
    throw std::invalid_argument("covariate scale must be > 0");
  if (n < 1)
    throw std::invalid_argument("sample size n must be >= 1");
}

double DgpConfig::covariate_sd() const
{
  return scale_kind == CovariateScale::Variance ? std::sqrt(covariate_scale) : covariate_scale;
}

double conditional_copula_inverse(const CopulaModel& model, double s1, double v2)
{
  require_open_unit(s1, "s1");
  require_open_unit(v2, "v2");
  switch (model.family()) {
    case CopulaFamily::Clayton:
      return clayton_conditional_inverse(model.theta(), s1, v2);
    case CopulaFamily::Independence:
      return v2;
    case CopulaFamily::Gumbel:
    case CopulaFamily::Frank:
      break;
  }
  // dC/ds1 increases from 0 to 1 in s2
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (conditional_cdf(model, s1, mid) < v2)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double invert_weibull(const WeibullMarginal& marginal, double s, double z)
{
  require_open_unit(s, "survival probability");
  return std::pow(-std::log(s) / marginal.lambda / std::exp(z * marginal.beta), 1.0 / marginal.eta);
}

std::vector<Observation> simulate(const DgpConfig& config, unsigned threads)
{
  return simulate(config, nullptr, threads);
}

std::vector<Observation> simulate(const DgpConfig& config,
                                  std::vector<LatentDraw>* latents,
                                  unsigned threads)
{
  config.validate();
  const CounterRng rng(config.seed);
  const double sd = config.covariate_sd();
  std::vector<Observation> out(config.n);
  if (latents)
    latents->assign(config.n, LatentDraw{});

  parallel_blocks(config.n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint64_t base = 4 * static_cast<std::uint64_t>(i);
      // Box-Muller pair for (z1, z2)
      const double radius = sd * std::sqrt(-2.0 * std::log(rng.uniform(base)));
      const double angle = 2.0 * std::numbers::pi * rng.uniform(base + 1);
      const double z1 = radius * std::cos(angle);
      const double z2 = radius * std::sin(angle);
      const double s1 = rng.uniform(base + 2);
      const double v2 = rng.uniform(base + 3);
      const double s2 = conditional_copula_inverse(config.copula, s1, v2);
      const double t1 = invert_weibull(config.marginals[0], s1, z1);
      const double t2 = invert_weibull(config.marginals[1], s2, z2);

      Observation& o = out[i];
      o.t = t2 < t1 ? t2 : t1;
      o.delta = t2 < t1 ? 2 : 1;
      o.z = { z1, z2 };
      if (latents)
        (*latents)[i] = LatentDraw{ s1, s2, t1, t2, { z1, z2 } };
    }
  });
  return out;
}

OracleSurface oracle_surface(const DgpConfig& config, double t, std::span<const double> z)
{
  if (config.copula.family() != CopulaFamily::Clayton)
    throw std::domain_error("analytic surface is only available for the Clayton copula");
  if (!(t > 0.0))
    throw std::domain_error("oracle surface requires t > 0");
  if (z.size() < 2)
    throw std::invalid_argument("oracle surface requires two covariates");

  const double theta = config.copula.theta();
  const auto& m1 = config.marginals[0];
  const auto& m2 = config.marginals[1];
  // log S_j = -Lambda_j(t) exp(z_j beta_j)
  const double log_s1 = -m1.cumulative_hazard(t) * std::exp(z[0] * m1.beta);
  const double log_s2 = -m2.cumulative_hazard(t) * std::exp(z[1] * m2.beta);
  const double ds1 = std::exp(log_s1) * log_s1 * m1.beta;
  const double ds2 = std::exp(log_s2) * log_s2 * m2.beta;

  // D = S1^-theta + S2^-theta - 1, carried as log D for small-t accuracy
  const double log_d = std::log1p(std::expm1(-theta * log_s1) + std::expm1(-theta * log_s2));
  if (!std::isfinite(log_d))
    throw std::domain_error("(t, z) outside the support of the joint survival surface");
  const double pi = std::exp(-log_d / theta);
  const double w1 = std::exp(-(theta + 1.0) * log_s1);
  const double w2 = std::exp(-(theta + 1.0) * log_s2);
  const double d_first = std::exp(-(1.0 + 1.0 / theta) * log_d);
  const double d_cross = std::exp(-(2.0 + 1.0 / theta) * log_d);

  return OracleSurface{
    pi,
    w1 * d_first * ds1,
    w2 * d_first * ds2,
    (1.0 + theta) * d_cross * w1 * w2 * ds1 * ds2,
  };
}

} // namespace ccr
