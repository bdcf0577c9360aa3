#include "ccr/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccr {

double compensated_mean(std::span<const double> xs)
{
  if (xs.empty())
    throw std::invalid_argument("mean of empty range");
  CompensatedSum s;
  for (double x : xs)
    s += x;
  return s.value() / static_cast<double>(xs.size());
}

double nearest_rank_percentile_sorted(std::span<const double> sorted, double p)
{
  if (sorted.empty())
    throw std::invalid_argument("percentile of empty range");
  if (!(p >= 0.0 && p <= 100.0))
    throw std::invalid_argument("percentile level outside [0, 100]");
  const auto n = sorted.size();
  // rank = ceil(p/100 * n), clamped to [1, n]
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

double nearest_rank_percentile(std::span<const double> xs, double p)
{
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  return nearest_rank_percentile_sorted(sorted, p);
}

double median(std::vector<double> xs)
{
  if (xs.empty())
    throw std::invalid_argument("median of empty range");
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  if (n % 2 == 1)
    return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace ccr
