#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ccr {

// Neumaier's variant of Kahan summation. The result depends only on the
// order in which terms are added.
class CompensatedSum
{
public:
  void add(double x) noexcept
  {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept
  {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_{ 0.0 };
  double comp_{ 0.0 };
};

double compensated_mean(std::span<const double> xs);

// Nearest-rank percentile, p in [0, 100]. Sorts a copy.
double nearest_rank_percentile(std::span<const double> xs, double p);

// Same, on data already sorted ascending.
double nearest_rank_percentile_sorted(std::span<const double> sorted, double p);

double median(std::vector<double> xs);

} // namespace ccr
