#include "ccr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ccr/numeric.hpp"

namespace ccr {

namespace {

// Per-observation product-kernel weights at z: K_h, its gradient and the
// (z1, z2) cross partial. Returns false when the observation lies outside
// the support in some coordinate.
bool product_weights(const KernelSpec& spec,
                     std::span<const double> z,
                     std::span<const double> zi,
                     std::vector<double>& k,
                     std::vector<double>& dk,
                     double& w,
                     std::vector<double>& w_k,
                     double& w_kl)
{
  const std::size_t d = z.size();
  for (std::size_t j = 0; j < d; ++j) {
    const double h = spec.bandwidths[j];
    const double u = (z[j] - zi[j]) / h;
    if (std::fabs(u) > 1.0)
      return false;
    k[j] = kernel_eval(spec.kernel, u) / h;
    dk[j] = kernel_deriv(spec.kernel, u) / (h * h);
  }
  w = 1.0;
  for (std::size_t j = 0; j < d; ++j)
    w *= k[j];
  for (std::size_t c = 0; c < d; ++c) {
    double p = dk[c];
    for (std::size_t j = 0; j < d; ++j)
      if (j != c)
        p *= k[j];
    w_k[c] = p;
  }
  w_kl = dk[0] * dk[1];
  for (std::size_t j = 2; j < d; ++j)
    w_kl *= k[j];
  return true;
}

} // namespace

double kernel_eval(KernelType kernel, double u)
{
  switch (kernel) {
    case KernelType::Epanechnikov:
      return std::fabs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

double kernel_deriv(KernelType kernel, double u)
{
  switch (kernel) {
    case KernelType::Epanechnikov:
      return std::fabs(u) <= 1.0 ? -1.5 * u : 0.0;
  }
  return 0.0;
}

void KernelSpec::validate(std::size_t d) const
{
  if (bandwidths.size() != d)
    throw std::invalid_argument("expected " + std::to_string(d) + " bandwidths, got " +
                                std::to_string(bandwidths.size()));
  for (double h : bandwidths)
    if (!(h > 0.0) || !std::isfinite(h))
      throw std::invalid_argument("bandwidths must be positive and finite");
}

SampleView::SampleView(std::span<const Observation> observations)
  : obs_(observations)
  , d_(0)
{
  if (obs_.empty())
    throw std::invalid_argument("sample is empty");
  d_ = obs_.front().z.size();
  if (d_ < 2)
    throw std::invalid_argument("sample needs at least two covariates");
  for (const auto& o : obs_)
    if (o.z.size() != d_)
      throw std::invalid_argument("inconsistent covariate dimension in sample");
}

RawSums raw_sums(const SampleView& sample, const KernelSpec& spec, double t, std::span<const double> z)
{
  const std::size_t d = sample.dim();
  spec.validate(d);
  if (z.size() != d)
    throw std::invalid_argument("evaluation point has wrong dimension");

  std::vector<double> k(d), dk(d), w_k(d);
  double w = 0.0;
  double w_kl = 0.0;
  CompensatedSum a, b, a_kl, b_kl;
  std::vector<CompensatedSum> a_k(d), b_k(d);

  for (const auto& o : sample.observations()) {
    if (!product_weights(spec, z, o.z, k, dk, w, w_k, w_kl))
      continue;
    const bool at_risk = o.t > t;
    b += w;
    b_kl += w_kl;
    for (std::size_t c = 0; c < d; ++c)
      b_k[c] += w_k[c];
    if (at_risk) {
      a += w;
      a_kl += w_kl;
      for (std::size_t c = 0; c < d; ++c)
        a_k[c] += w_k[c];
    }
  }

  RawSums out;
  out.a = a.value();
  out.b = b.value();
  out.a_kl = a_kl.value();
  out.b_kl = b_kl.value();
  out.a_k.resize(d);
  out.b_k.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    out.a_k[c] = a_k[c].value();
    out.b_k[c] = b_k[c].value();
  }
  return out;
}

SurfaceEstimate surface_from_sums(const RawSums& s)
{
  if (!(s.b != 0.0))
    throw EmptyNeighborhood("no kernel mass at the evaluation point");
  const double b = s.b;
  const double b2 = b * b;
  const std::size_t d = s.a_k.size();

  SurfaceEstimate e;
  e.pi_hat = s.a / b;
  e.b_at_z = b;
  e.dpi_hat.resize(d);
  for (std::size_t c = 0; c < d; ++c)
    e.dpi_hat[c] = (s.a_k[c] * b - s.a * s.b_k[c]) / b2;
  e.d2pi_hat = s.a_kl / b - (s.b_k[0] * s.a_k[1] + s.a_k[0] * s.b_k[1] + s.b_kl * s.a) / b2 +
               2.0 * s.b_k[0] * s.a * s.b_k[1] / (b2 * b);
  return e;
}

SurfaceEstimate estimate_surface(const SampleView& sample,
                                 const KernelSpec& spec,
                                 double t,
                                 std::span<const double> z)
{
  return surface_from_sums(raw_sums(sample, spec, t, z));
}

SurfaceProfile::SurfaceProfile(const SampleView& sample,
                               const KernelSpec& spec,
                               std::span<const double> z)
  : d_(sample.dim())
{
  spec.validate(d_);
  if (z.size() != d_)
    throw std::invalid_argument("evaluation point has wrong dimension");

  const std::size_t width = d_ + 2;
  std::vector<double> k(d_), dk(d_), w_k(d_);
  double w = 0.0;
  double w_kl = 0.0;

  std::vector<double> times;
  std::vector<double> weights;
  for (const auto& o : sample.observations()) {
    if (!product_weights(spec, z, o.z, k, dk, w, w_k, w_kl))
      continue;
    times.push_back(o.t);
    weights.push_back(w);
    weights.insert(weights.end(), w_k.begin(), w_k.end());
    weights.push_back(w_kl);
  }

  const std::size_t m = times.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return times[x] < times[y];
  });

  times_.resize(m);
  for (std::size_t r = 0; r < m; ++r)
    times_[r] = times[order[r]];

  suffix_.assign((m + 1) * width, 0.0);
  std::vector<CompensatedSum> acc(width);
  for (std::size_t r = m; r-- > 0;) {
    const double* src = &weights[order[r] * width];
    for (std::size_t c = 0; c < width; ++c) {
      acc[c] += src[c];
      suffix_[r * width + c] = acc[c].value();
    }
  }
}

RawSums SurfaceProfile::sums_at(double t) const
{
  const std::size_t width = d_ + 2;
  const auto first_at_risk =
    static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  const double* all = &suffix_[0];
  const double* risk = &suffix_[first_at_risk * width];

  RawSums out;
  out.b = all[0];
  out.a = risk[0];
  out.b_k.assign(all + 1, all + 1 + d_);
  out.a_k.assign(risk + 1, risk + 1 + d_);
  out.b_kl = all[width - 1];
  out.a_kl = risk[width - 1];
  return out;
}

} // namespace ccr
