#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ccr/dgp.hpp"

namespace ccr {

enum class KernelType
{
  Epanechnikov
};

double kernel_eval(KernelType kernel, double u);
double kernel_deriv(KernelType kernel, double u);

struct KernelSpec
{
  std::vector<double> bandwidths{ 0.3, 0.3 };
  KernelType kernel{ KernelType::Epanechnikov };

  // Throws std::invalid_argument unless there are d positive bandwidths.
  void validate(std::size_t d) const;
};

//! Non-owning view of a sample with covariate dimension d >= 2. The first
//! two covariates are the exclusion coordinates.
class SampleView
{
public:
  explicit SampleView(std::span<const Observation> observations);

  std::span<const Observation> observations() const noexcept { return obs_; }
  std::size_t size() const noexcept { return obs_.size(); }
  std::size_t dim() const noexcept { return d_; }

private:
  std::span<const Observation> obs_;
  std::size_t d_;
};

// Kernel sums at (t, z):
//   a = sum 1{T_i > t} K_h(z - z_i),  b = sum K_h(z - z_i),
// their gradients in z (length d) and their cross partials in (z1, z2).
struct RawSums
{
  double a{ 0.0 };
  double b{ 0.0 };
  std::vector<double> a_k;
  std::vector<double> b_k;
  double a_kl{ 0.0 };
  double b_kl{ 0.0 };
};

struct SurfaceEstimate
{
  double pi_hat;
  std::vector<double> dpi_hat;
  // Cross partial in the two exclusion coordinates.
  double d2pi_hat;
  double b_at_z;
};

class EmptyNeighborhood : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

RawSums raw_sums(const SampleView& sample, const KernelSpec& spec, double t, std::span<const double> z);

// Quotient-rule assembly of pi_hat and its derivatives from kernel sums.
// Throws EmptyNeighborhood when b = 0.
SurfaceEstimate surface_from_sums(const RawSums& sums);

SurfaceEstimate estimate_surface(const SampleView& sample,
                                 const KernelSpec& spec,
                                 double t,
                                 std::span<const double> z);

//! Kernel sums at a fixed covariate point for many durations.
//!
//! Only observations inside the kernel window contribute, and only the
//! indicator 1{T_i > t} depends on t, so the window is sorted once by
//! duration and a(t) and its derivatives become compensated suffix sums.
//! Agrees with raw_sums up to summation order.
class SurfaceProfile
{
public:
  SurfaceProfile(const SampleView& sample, const KernelSpec& spec, std::span<const double> z);

  RawSums sums_at(double t) const;
  SurfaceEstimate at(double t) const { return surface_from_sums(sums_at(t)); }

  // Observations with nonzero kernel support at z.
  std::size_t window_size() const noexcept { return times_.size(); }

private:
  std::size_t d_;
  std::vector<double> times_;
  // (d + 2) values per window entry, suffix-summed from the longest
  // duration down: [K, dK/dz_1 .. dK/dz_d, d2K/dz_1dz_2]. Row m holds the
  // sums over entries m..end; row window_size() is zero.
  std::vector<double> suffix_;
};

} // namespace ccr
