#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ccr/copula.hpp"

namespace ccr {

//! Proportional-hazards Weibull marginal:
//! S(t; z) = exp(-lambda * t^eta * exp(z * beta)).
struct WeibullMarginal
{
  double lambda{ 1.0 };
  double eta{ 1.0 };
  double beta{ 1.0 };

  void validate() const;

  double cumulative_hazard(double t) const;
  double survival(double t, double z) const;
  // dS/dz at (t, z).
  double survival_dz(double t, double z) const;
};

// How the covariate_scale of DgpConfig is read for z_j ~ N(0, scale).
enum class CovariateScale
{
  Variance,
  StandardDeviation
};

struct DgpConfig
{
  CopulaModel copula{ CopulaFamily::Clayton, 0.5 };
  std::array<WeibullMarginal, 2> marginals{ WeibullMarginal{ 0.5, 1.0, 1.0 },
                                            WeibullMarginal{ 1.0, 1.0, 1.0 } };
  double covariate_scale{ 0.5 };
  CovariateScale scale_kind{ CovariateScale::Variance };
  std::size_t n{ 100000 };
  std::uint64_t seed{ 1 };

  void validate() const;
  double covariate_sd() const;
};

struct Observation
{
  double t;
  int delta;
  std::vector<double> z;
};

// Latent quantities of one simulated unit. Validation only; never part of
// an Observation.
struct LatentDraw
{
  double s1;
  double s2;
  double t1;
  double t2;
  std::array<double, 2> z;
};

struct OracleSurface
{
  double pi;
  double dpi_dz1;
  double dpi_dz2;
  double d2pi_dz1dz2;
};

// Draws s2 given s1 from the conditional copula dC/ds1(s1, s2) = v2.
// Clayton uses the closed form; other families invert by bisection.
double conditional_copula_inverse(const CopulaModel& model, double s1, double v2);

// Solves S(t; z) = s for t.
double invert_weibull(const WeibullMarginal& marginal, double s, double z);

//! Simulates config.n competing-risks observations. Unit i consumes the
//! counter-based draws (z1, z2, s1, v2) at positions 4i..4i+3, so the
//! output does not depend on the number of worker threads.
std::vector<Observation> simulate(const DgpConfig& config, unsigned threads = 1);

// As above, additionally filling `latents` (if non-null) with per-unit
// latent draws in unit order.
std::vector<Observation> simulate(const DgpConfig& config,
                                  std::vector<LatentDraw>* latents,
                                  unsigned threads = 1);

// Analytic pi(t; z) and its covariate derivatives. Clayton only.
OracleSurface oracle_surface(const DgpConfig& config, double t, std::span<const double> z);

} // namespace ccr
