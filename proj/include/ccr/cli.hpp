#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccr/copula.hpp"
#include "ccr/dgp.hpp"
#include "ccr/estimator.hpp"
#include "ccr/kernel.hpp"

namespace ccr::cli {

enum class Command
{
  Simulate,
  Estimate,
  MonteCarlo,
  OracleCheck
};

const char* to_string(Command command);
Command parse_command(const std::string& name);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitEstimation = 3;

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class EstimationFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig
{
  Command command{ Command::Estimate };
  DgpConfig dgp;
  KernelSpec kernel;
  GridSpec grid;
  CopulaFamily family{ CopulaFamily::Clayton };
  std::size_t replicates{ 500 };
  std::filesystem::path output_dir{ "." };
  std::uint64_t seed{ 1 };
  unsigned threads{ 1 };
  // Dataset to estimate from instead of simulating.
  std::optional<std::filesystem::path> data;
};

// Flat `key = value` text; `#` starts a comment. Keys are the long flag
// names without dashes.
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Builds a config from layered settings: built-in defaults, then
// `file_settings`, then `flag_settings`. Throws ConfigError.
RunConfig build_config(const std::map<std::string, std::string>& file_settings,
                       const std::map<std::string, std::string>& flag_settings);

// Parses argv (CLI11), including an optional --config file.
RunConfig parse_command_line(const std::vector<std::string>& args);

// Manifest in config-file syntax. It omits the output directory and the
// thread count, neither of which affects artifact contents.
std::string manifest_text(const RunConfig& config);

// Executes a validated config, writing artifacts into output_dir and a
// short report to `out`. Throws EstimationFailure or ConfigError.
void run(const RunConfig& config, std::ostream& out);

// argv-level entry point; returns the process exit code.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ccr::cli
