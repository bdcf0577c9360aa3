#pragma once

// Independent numerical oracles for the test suites. Nothing here calls
// into the library under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace ccr::oracle {

template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-14, int max_iter = 400)
{
  double f_lo = f(lo);
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

template <class F>
double central_diff(F&& f, double x, double h)
{
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <class F>
double second_diff(F&& f, double x, double h)
{
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Mixed partial d2f/dxdy by the four-point stencil.
template <class F>
double mixed_diff(F&& f, double x, double y, double h)
{
  return (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
}

// Distance from x to the nearest point where a kernel of support [-1, 1]
// and bandwidth h centred on some x_i stops being smooth, i.e. to the
// nearest x_i +- h. Finite-difference stencils narrower than this stay on
// one smooth piece.
inline double support_edge_distance(std::span<const double> xs, double x, double h)
{
  double best = INFINITY;
  for (double xi : xs)
    best = std::min({ best, std::fabs(x - (xi + h)), std::fabs(x - (xi - h)) });
  return best;
}

// Composite Simpson rule with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, std::size_t n)
{
  if (n % 2)
    ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i)
    s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

namespace detail {

inline std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi)
{
  if (hi - lo < 2)
    return 0;
  const std::size_t mid = (lo + hi) / 2;
  std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid)
    buf[k++] = v[i++];
  while (j < hi)
    buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

} // namespace detail

// Kendall's tau-a for tie-free data via Knight's O(n log n) inversion count.
inline double kendall_tau(std::span<const double> x, std::span<const double> y)
{
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{ 0 });
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i)
    ys[i] = y[idx[i]];
  const std::uint64_t discordant = detail::merge_count(ys, buf, 0, n);
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return (pairs - 2.0 * static_cast<double>(discordant)) / pairs;
}

// Standard error of tau-a under independence; an upper envelope for the
// positively dependent cases used here.
inline double kendall_tau_se(std::size_t n)
{
  const double nn = static_cast<double>(n);
  return std::sqrt(2.0 * (2.0 * nn + 5.0) / (9.0 * nn * (nn - 1.0)));
}

// Closed-form Clayton pieces written out independently of the library.
inline double clayton_copula(double theta, double u, double v)
{
  return std::pow(std::pow(u, -theta) + std::pow(v, -theta) - 1.0, -1.0 / theta);
}

// dC/du for Clayton from log u and log v, so tiny arguments neither
// overflow nor produce inf/inf.
inline double clayton_h_log(double theta, double log_u, double log_v)
{
  const double lu = -theta * log_u;
  const double lv = -theta * log_v;
  double log_d;
  if (theta > 0.0) {
    const double m = std::max(lu, lv);
    if (std::isinf(m))
      return 0.0;
    log_d = m + std::log(std::exp(lu - m) + std::exp(lv - m) - std::exp(-m));
  } else {
    const double d = std::exp(lu) + std::exp(lv) - 1.0;
    if (d <= 0.0)
      return 0.0;
    log_d = std::log(d);
  }
  return std::exp(-(theta + 1.0) * log_u - (1.0 / theta + 1.0) * log_d);
}

inline double clayton_h(double theta, double u, double v)
{
  return clayton_h_log(theta, std::log(u), std::log(v));
}

// Weibull proportional-hazards survival exp(-lambda t^eta e^{z beta}).
inline double weibull_survival(double lambda, double eta, double beta, double t, double z)
{
  return std::exp(-lambda * std::pow(t, eta) * std::exp(z * beta));
}

} // namespace ccr::oracle
