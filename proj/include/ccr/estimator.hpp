#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccr/copula.hpp"
#include "ccr/dgp.hpp"
#include "ccr/kernel.hpp"

namespace ccr {

inline constexpr double kNoTrimLo = -std::numeric_limits<double>::infinity();
inline constexpr double kNoTrimHi = std::numeric_limits<double>::infinity();

struct GridSpec
{
  // Explicit duration grid. When absent, grid_points equally spaced
  // points between the 0.5th and 99.5th percentiles of observed T.
  std::optional<std::vector<double>> t_grid;
  std::size_t grid_points{ 500 };
  // Covariate evaluation point; the sample mean when absent.
  std::optional<std::vector<double>> z_eval;
  double trim_lo{ 1.3 };
  double trim_hi{ 2.5 };

  void validate() const;
  bool trimmed() const noexcept { return trim_lo != kNoTrimLo || trim_hi != kNoTrimHi; }
};

struct ResolvedGrid
{
  std::vector<double> t;
  std::vector<double> z_eval;
};

ResolvedGrid resolve_grid(const GridSpec& grid, const SampleView& sample);

enum class PointStatus
{
  Ok,
  NearIndependence,
  EmptyNeighborhood,
  PiOutOfRange,
  NonFiniteRatio,
  NoRoot,
  Inadmissible
};

const char* to_string(PointStatus status);

// Whether a pointwise estimate may enter the grid average.
constexpr bool is_defined(PointStatus status) noexcept
{
  return status == PointStatus::Ok || status == PointStatus::NearIndependence;
}

struct ThetaSeries
{
  std::vector<double> t;
  // NaN where no value could be solved; inadmissible values are kept.
  std::vector<double> theta_pointwise;
  std::vector<PointStatus> status;
  // Root-finder iterations per point (Frank); 0 otherwise.
  std::vector<int> solver_iterations;
  // Trim window and definedness.
  std::vector<bool> included;
  double trim_lo{ kNoTrimLo };
  double trim_hi{ kNoTrimHi };
  double theta_hat{ std::numeric_limits<double>::quiet_NaN() };
  std::size_t n_included{ 0 };
};

class AllPointsExcluded : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Kernel estimates along the grid at the fixed covariate point; empty
// entries mark points without kernel mass.
std::vector<std::optional<SurfaceEstimate>> estimate_surfaces(const SampleView& sample,
                                                              const KernelSpec& spec,
                                                              const ResolvedGrid& grid);

// Pointwise theta from precomputed surfaces, then trimmed averaging.
// Throws AllPointsExcluded when nothing survives the mask.
ThetaSeries theta_series_from_surfaces(std::span<const double> t,
                                       std::span<const std::optional<SurfaceEstimate>> surfaces,
                                       CopulaFamily family,
                                       double trim_lo,
                                       double trim_hi);

ThetaSeries theta_series(const SampleView& sample,
                         const KernelSpec& spec,
                         const GridSpec& grid,
                         CopulaFamily family);

// Recomputes mask and average for another trim window.
ThetaSeries retrim(const ThetaSeries& series, double trim_lo, double trim_hi);

struct TrimSuggestion
{
  double lo;
  double hi;
  // No window qualified; [lo, hi] is the full grid range.
  bool fallback;
};

//! Suggests a trim window: the widest run of grid points whose rolling
//! median absolute deviation of theta(t), over `stability_window` points,
//! stays at or below three times the median rolling MAD. A suggestion only.
TrimSuggestion default_trim_from_series(const ThetaSeries& series, std::size_t stability_window);

struct ReplicateResult
{
  std::size_t replicate;
  std::uint64_t seed;
  double theta_hat;
  std::size_t n_included;
  bool failed;
};

struct McSummary
{
  std::vector<ReplicateResult> replicates;
  // theta_hat of successful replicates, in replicate order.
  std::vector<double> replicate_thetas;
  double mean{ std::numeric_limits<double>::quiet_NaN() };
  double p05{ std::numeric_limits<double>::quiet_NaN() };
  double p95{ std::numeric_limits<double>::quiet_NaN() };
  std::size_t failures{ 0 };
  std::string config_echo;
};

struct TrimWindow
{
  double lo;
  double hi;
};

std::string describe_run(const DgpConfig& dgp,
                         const KernelSpec& spec,
                         const GridSpec& grid,
                         CopulaFamily family,
                         std::size_t replicates,
                         std::uint64_t base_seed);

// Replicate r simulates with seed base_seed + r. Each replicate's series
// is computed once and summarised under every trim window.
std::vector<McSummary> monte_carlo_windows(const DgpConfig& dgp,
                                           const KernelSpec& spec,
                                           const GridSpec& grid,
                                           CopulaFamily family,
                                           std::size_t replicates,
                                           std::uint64_t base_seed,
                                           std::span<const TrimWindow> windows,
                                           unsigned threads = 1);

McSummary monte_carlo(const DgpConfig& dgp,
                      const KernelSpec& spec,
                      const GridSpec& grid,
                      CopulaFamily family,
                      std::size_t replicates,
                      std::uint64_t base_seed,
                      unsigned threads = 1);

} // namespace ccr
