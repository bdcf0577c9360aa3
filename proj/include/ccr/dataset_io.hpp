#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccr/dgp.hpp"
#include "ccr/estimator.hpp"
#include "ccr/kernel.hpp"

namespace ccr {

// Shortest decimal that parses back to the same double.
std::string format_roundtrip(double x);

// Dataset CSV: header `t,delta,z1,...,zd`, LF line endings.
std::string dataset_to_csv(std::span<const Observation> observations);
std::vector<Observation> dataset_from_csv(const std::string& text);
std::vector<Observation> read_dataset(const std::filesystem::path& path);

// `t,pi,dpi1,dpi2,d2pi`; points without kernel mass are written as nan.
std::string surface_to_csv(std::span<const double> t,
                           std::span<const std::optional<SurfaceEstimate>> surfaces);

// `t,theta,included`
std::string theta_series_to_csv(const ThetaSeries& series);

// `replicate,theta_hat,n_included,failed`
std::string mc_summary_to_csv(const McSummary& summary);

// Writes to `path.tmp` and renames into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace ccr
