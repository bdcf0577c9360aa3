#include "ccr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ccr/numeric.hpp"
#include "ccr/parallel.hpp"

namespace ccr {

namespace {

void apply_mask(ThetaSeries& s, double trim_lo, double trim_hi)
{
  s.trim_lo = trim_lo;
  s.trim_hi = trim_hi;
  s.included.assign(s.t.size(), false);
  CompensatedSum sum;
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    const bool in_window = trim_lo <= s.t[i] && s.t[i] <= trim_hi;
    if (in_window && is_defined(s.status[i])) {
      s.included[i] = true;
      sum += s.theta_pointwise[i];
      ++count;
    }
  }
  s.n_included = count;
  if (count == 0)
    throw AllPointsExcluded("no defined pointwise estimate inside the trim window");
  s.theta_hat = sum.value() / static_cast<double>(count);
}

double mad(std::vector<double> xs)
{
  const double m = median(xs);
  for (double& x : xs)
    x = std::fabs(x - m);
  return median(std::move(xs));
}

std::string format_double(double x)
{
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

} // namespace

void GridSpec::validate() const
{
  if (!(trim_lo < trim_hi))
    throw std::invalid_argument("trim window requires lo < hi");
  if (t_grid) {
    if (t_grid->empty())
      throw std::invalid_argument("duration grid is empty");
    for (std::size_t i = 1; i < t_grid->size(); ++i)
      if (!((*t_grid)[i - 1] < (*t_grid)[i]))
        throw std::invalid_argument("duration grid must be strictly increasing");
  } else if (grid_points < 1) {
    throw std::invalid_argument("grid needs at least one point");
  }
}

ResolvedGrid resolve_grid(const GridSpec& grid, const SampleView& sample)
{
  grid.validate();
  ResolvedGrid out;
  if (grid.t_grid) {
    out.t = *grid.t_grid;
  } else {
    std::vector<double> times;
    times.reserve(sample.size());
    for (const auto& o : sample.observations())
      times.push_back(o.t);
    std::sort(times.begin(), times.end());
    const double lo = nearest_rank_percentile_sorted(times, 0.5);
    const double hi = nearest_rank_percentile_sorted(times, 99.5);
    const std::size_t m = grid.grid_points;
    out.t.resize(m);
    if (m == 1) {
      out.t[0] = lo;
    } else {
      const double step = (hi - lo) / static_cast<double>(m - 1);
      for (std::size_t s = 0; s < m; ++s)
        out.t[s] = lo + step * static_cast<double>(s);
      out.t[m - 1] = hi;
    }
    for (std::size_t s = 1; s < m; ++s)
      if (!(out.t[s - 1] < out.t[s]))
        throw std::invalid_argument("observed durations too concentrated for a strictly increasing grid");
  }

  const std::size_t d = sample.dim();
  if (grid.z_eval) {
    if (grid.z_eval->size() != d)
      throw std::invalid_argument("z_eval has wrong dimension");
    out.z_eval = *grid.z_eval;
  } else {
    std::vector<CompensatedSum> sums(d);
    for (const auto& o : sample.observations())
      for (std::size_t j = 0; j < d; ++j)
        sums[j] += o.z[j];
    out.z_eval.resize(d);
    for (std::size_t j = 0; j < d; ++j)
      out.z_eval[j] = sums[j].value() / static_cast<double>(sample.size());
  }
  return out;
}

const char* to_string(PointStatus status)
{
  switch (status) {
    case PointStatus::Ok:
      return "ok";
    case PointStatus::NearIndependence:
      return "near_independence";
    case PointStatus::EmptyNeighborhood:
      return "empty_neighborhood";
    case PointStatus::PiOutOfRange:
      return "pi_out_of_range";
    case PointStatus::NonFiniteRatio:
      return "nonfinite_ratio";
    case PointStatus::NoRoot:
      return "no_root";
    case PointStatus::Inadmissible:
      return "inadmissible";
  }
  return "unknown";
}

std::vector<std::optional<SurfaceEstimate>> estimate_surfaces(const SampleView& sample,
                                                              const KernelSpec& spec,
                                                              const ResolvedGrid& grid)
{
  const SurfaceProfile profile(sample, spec, grid.z_eval);
  std::vector<std::optional<SurfaceEstimate>> out(grid.t.size());
  for (std::size_t s = 0; s < grid.t.size(); ++s) {
    try {
      out[s] = profile.at(grid.t[s]);
    } catch (const EmptyNeighborhood&) {
      // left empty; the caller skips the point
    }
  }
  return out;
}

ThetaSeries theta_series_from_surfaces(std::span<const double> t,
                                       std::span<const std::optional<SurfaceEstimate>> surfaces,
                                       CopulaFamily family,
                                       double trim_lo,
                                       double trim_hi)
{
  if (t.size() != surfaces.size())
    throw std::invalid_argument("grid and surface lengths differ");
  if (family == CopulaFamily::Independence)
    throw std::invalid_argument("independence copula has no parameter to estimate");
  if (!(trim_lo < trim_hi))
    throw std::invalid_argument("trim window requires lo < hi");

  const std::size_t m = t.size();
  ThetaSeries s;
  s.t.assign(t.begin(), t.end());
  s.theta_pointwise.assign(m, std::numeric_limits<double>::quiet_NaN());
  s.status.assign(m, PointStatus::Ok);
  s.solver_iterations.assign(m, 0);

  for (std::size_t i = 0; i < m; ++i) {
    if (!surfaces[i]) {
      s.status[i] = PointStatus::EmptyNeighborhood;
      continue;
    }
    const SurfaceEstimate& e = *surfaces[i];
    if (!(e.pi_hat > 0.0 && e.pi_hat < 1.0)) {
      s.status[i] = PointStatus::PiOutOfRange;
      continue;
    }
    const double r = e.d2pi_hat / (e.dpi_hat[0] * e.dpi_hat[1]);
    if (!std::isfinite(r)) {
      s.status[i] = PointStatus::NonFiniteRatio;
      continue;
    }
    try {
      const ThetaSolution sol = theta_from_ratio(family, e.pi_hat, DerivativeRatio(r));
      s.theta_pointwise[i] = sol.theta;
      s.solver_iterations[i] = sol.iterations;
      switch (sol.status) {
        case ThetaStatus::Admissible:
          s.status[i] = PointStatus::Ok;
          break;
        case ThetaStatus::NearIndependence:
          s.status[i] = PointStatus::NearIndependence;
          break;
        case ThetaStatus::Inadmissible:
          s.status[i] = PointStatus::Inadmissible;
          break;
      }
    } catch (const NoRootError&) {
      s.status[i] = PointStatus::NoRoot;
    }
  }
  apply_mask(s, trim_lo, trim_hi);
  return s;
}

ThetaSeries theta_series(const SampleView& sample,
                         const KernelSpec& spec,
                         const GridSpec& grid,
                         CopulaFamily family)
{
  const ResolvedGrid resolved = resolve_grid(grid, sample);
  const auto surfaces = estimate_surfaces(sample, spec, resolved);
  return theta_series_from_surfaces(resolved.t, surfaces, family, grid.trim_lo, grid.trim_hi);
}

ThetaSeries retrim(const ThetaSeries& series, double trim_lo, double trim_hi)
{
  if (!(trim_lo < trim_hi))
    throw std::invalid_argument("trim window requires lo < hi");
  ThetaSeries out = series;
  apply_mask(out, trim_lo, trim_hi);
  return out;
}

TrimSuggestion default_trim_from_series(const ThetaSeries& series, std::size_t stability_window)
{
  const std::size_t m = series.t.size();
  if (m == 0)
    throw std::invalid_argument("empty series");
  if (stability_window < 2)
    throw std::invalid_argument("stability window needs at least two points");
  const TrimSuggestion full{ series.t.front(), series.t.back(), true };
  const std::size_t window = std::min(stability_window, m);
  const std::size_t half = window / 2;

  std::vector<double> rolling(m, std::numeric_limits<double>::infinity());
  std::vector<double> finite;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t begin = std::min(i > half ? i - half : 0, m - window);
    std::vector<double> values;
    for (std::size_t j = begin; j < begin + window; ++j)
      if (is_defined(series.status[j]) && std::isfinite(series.theta_pointwise[j]))
        values.push_back(series.theta_pointwise[j]);
    if (2 * values.size() < window)
      continue;
    rolling[i] = mad(std::move(values));
    finite.push_back(rolling[i]);
  }
  if (finite.empty())
    return full;
  const double threshold = 3.0 * median(finite);

  std::size_t best_begin = 0;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < m;) {
    if (!(rolling[i] <= threshold)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < m && rolling[j] <= threshold)
      ++j;
    if (j - i > best_len) {
      best_begin = i;
      best_len = j - i;
    }
    i = j;
  }
  if (best_len == 0)
    return full;
  return { series.t[best_begin], series.t[best_begin + best_len - 1], false };
}

std::string describe_run(const DgpConfig& dgp,
                         const KernelSpec& spec,
                         const GridSpec& grid,
                         CopulaFamily family,
                         std::size_t replicates,
                         std::uint64_t base_seed)
{
  std::ostringstream os;
  os << "family=" << to_string(dgp.copula.family()) << "\n"
     << "theta=" << format_double(dgp.copula.theta()) << "\n"
     << "estimation_family=" << to_string(family) << "\n";
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& m = dgp.marginals[j];
    os << "lambda" << j + 1 << "=" << format_double(m.lambda) << "\n"
       << "eta" << j + 1 << "=" << format_double(m.eta) << "\n"
       << "beta" << j + 1 << "=" << format_double(m.beta) << "\n";
  }
  os << "covariate_scale=" << format_double(dgp.covariate_scale) << "\n"
     << "covariate_scale_is_sd=" << (dgp.scale_kind == CovariateScale::StandardDeviation) << "\n"
     << "n=" << dgp.n << "\n"
     << "bandwidth=";
  for (std::size_t j = 0; j < spec.bandwidths.size(); ++j)
    os << (j ? "," : "") << format_double(spec.bandwidths[j]);
  os << "\nkernel=epanechnikov\n"
     << "grid_points=" << (grid.t_grid ? grid.t_grid->size() : grid.grid_points) << "\n"
     << "trim=" << format_double(grid.trim_lo) << ":" << format_double(grid.trim_hi) << "\n"
     << "replicates=" << replicates << "\n"
     << "base_seed=" << base_seed << "\n";
  return os.str();
}

std::vector<McSummary> monte_carlo_windows(const DgpConfig& dgp,
                                           const KernelSpec& spec,
                                           const GridSpec& grid,
                                           CopulaFamily family,
                                           std::size_t replicates,
                                           std::uint64_t base_seed,
                                           std::span<const TrimWindow> windows,
                                           unsigned threads)
{
  if (replicates < 1)
    throw std::invalid_argument("monte carlo needs at least one replicate");
  if (windows.empty())
    throw std::invalid_argument("no trim window requested");
  dgp.validate();
  spec.validate(2);
  grid.validate();

  const std::size_t nw = windows.size();
  // results[r * nw + w]
  std::vector<ReplicateResult> results(replicates * nw);

  parallel_blocks(replicates, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      DgpConfig cfg = dgp;
      cfg.seed = base_seed + r;
      const auto sample = simulate(cfg);
      const SampleView view(sample);
      const ResolvedGrid resolved = resolve_grid(grid, view);
      const auto surfaces = estimate_surfaces(view, spec, resolved);

      for (std::size_t w = 0; w < nw; ++w) {
        ReplicateResult& out = results[r * nw + w];
        out = { r, cfg.seed, std::numeric_limits<double>::quiet_NaN(), 0, false };
        try {
          const ThetaSeries s =
            theta_series_from_surfaces(resolved.t, surfaces, family, windows[w].lo, windows[w].hi);
          out.theta_hat = s.theta_hat;
          out.n_included = s.n_included;
        } catch (const AllPointsExcluded&) {
          out.failed = true;
        }
      }
    }
  });

  std::vector<McSummary> summaries(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    GridSpec echo_grid = grid;
    echo_grid.trim_lo = windows[w].lo;
    echo_grid.trim_hi = windows[w].hi;
    McSummary& sum = summaries[w];
    sum.config_echo = describe_run(dgp, spec, echo_grid, family, replicates, base_seed);
    for (std::size_t r = 0; r < replicates; ++r) {
      const ReplicateResult& rr = results[r * nw + w];
      sum.replicates.push_back(rr);
      if (rr.failed)
        ++sum.failures;
      else
        sum.replicate_thetas.push_back(rr.theta_hat);
    }
    if (!sum.replicate_thetas.empty()) {
      sum.mean = compensated_mean(sum.replicate_thetas);
      std::vector<double> sorted = sum.replicate_thetas;
      std::sort(sorted.begin(), sorted.end());
      sum.p05 = nearest_rank_percentile_sorted(sorted, 5.0);
      sum.p95 = nearest_rank_percentile_sorted(sorted, 95.0);
    }
  }
  return summaries;
}

McSummary monte_carlo(const DgpConfig& dgp,
                      const KernelSpec& spec,
                      const GridSpec& grid,
                      CopulaFamily family,
                      std::size_t replicates,
                      std::uint64_t base_seed,
                      unsigned threads)
{
  const TrimWindow window{ grid.trim_lo, grid.trim_hi };
  return std::move(
    monte_carlo_windows(dgp, spec, grid, family, replicates, base_seed, { &window, 1 }, threads)
      .front());
}

} // namespace ccr
