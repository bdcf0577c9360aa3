#include "ccr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "ccr/dataset_io.hpp"
#include "ccr/parallel.hpp"

namespace ccr::cli {

namespace {

constexpr const char* kVersion = CCR_VERSION;

// Keys accepted in config files and as long flags.
const std::set<std::string>& known_keys()
{
  static const std::set<std::string> keys{
    "command",     "n",        "seed",       "theta",     "tau",
    "family",      "bandwidth", "grid-points", "trim",     "no-trim",
    "replicates",  "threads",  "covariate-scale-is-sd", "covariate-scale",
    "lambda1",     "eta1",     "beta1",      "lambda2",   "eta2",
    "beta2",       "data",     "out",        "version",
  };
  return keys;
}

std::string trim_ws(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v)
{
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v)
{
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string format_list(const std::vector<double>& xs)
{
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    out += (i ? "," : "") + format_roundtrip(xs[i]);
  return out;
}

struct Artifact
{
  std::string name;
  std::string content;
};

// All-or-nothing: every artifact goes to a temp name first.
void commit(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> staged;
  for (const auto& a : artifacts) {
    auto tmp = dir / a.name;
    tmp += ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw ConfigError("output directory not writable: " + dir.string());
    out.write(a.content.data(), static_cast<std::streamsize>(a.content.size()));
    if (!out)
      throw ConfigError("write failed for " + tmp.string());
    staged.push_back(tmp);
  }
  for (std::size_t i = 0; i < artifacts.size(); ++i)
    std::filesystem::rename(staged[i], dir / artifacts[i].name);
}

std::vector<Observation> obtain_sample(const RunConfig& config)
{
  if (config.data) {
    try {
      return read_dataset(*config.data);
    } catch (const std::runtime_error& e) {
      throw ConfigError(std::string("dataset: ") + e.what());
    }
  }
  DgpConfig dgp = config.dgp;
  dgp.seed = config.seed;
  return simulate(dgp, config.threads);
}

void run_simulate(const RunConfig& config, std::vector<Artifact>& artifacts, std::ostream& out)
{
  DgpConfig dgp = config.dgp;
  dgp.seed = config.seed;
  const auto sample = simulate(dgp, config.threads);
  artifacts.push_back({ "dataset.csv", dataset_to_csv(sample) });
  out << "simulated " << sample.size() << " observations\n";
}

void run_estimate(const RunConfig& config, std::vector<Artifact>& artifacts, std::ostream& out)
{
  const auto sample = obtain_sample(config);
  const SampleView view(sample);
  try {
    config.kernel.validate(view.dim());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const ResolvedGrid grid = resolve_grid(config.grid, view);
  const auto surfaces = estimate_surfaces(view, config.kernel, grid);
  artifacts.push_back({ "surface.csv", surface_to_csv(grid.t, surfaces) });

  ThetaSeries series;
  try {
    series = theta_series_from_surfaces(grid.t, surfaces, config.family, config.grid.trim_lo,
                                        config.grid.trim_hi);
  } catch (const AllPointsExcluded& e) {
    throw EstimationFailure(e.what());
  }
  artifacts.push_back({ "theta_series.csv", theta_series_to_csv(series) });

  std::ostringstream summary;
  summary << "theta_hat=" << format_roundtrip(series.theta_hat) << "\n"
          << "n_included=" << series.n_included << "\n"
          << "z_eval=" << format_list(grid.z_eval) << "\n";
  std::size_t max_iterations = 0;
  for (int it : series.solver_iterations)
    max_iterations = std::max<std::size_t>(max_iterations, static_cast<std::size_t>(it));
  if (config.family == CopulaFamily::Frank)
    summary << "max_solver_iterations=" << max_iterations << "\n";
  try {
    const ThetaSeries untrimmed = retrim(series, kNoTrimLo, kNoTrimHi);
    const TrimSuggestion hint = default_trim_from_series(untrimmed, 25);
    summary << "suggested_trim=" << format_roundtrip(hint.lo) << ":" << format_roundtrip(hint.hi)
            << (hint.fallback ? " (fallback)" : "") << "\n";
  } catch (const AllPointsExcluded&) {
    // unreachable once the trimmed series succeeded
  }
  artifacts.push_back({ "estimate_summary.txt", summary.str() });
  out << summary.str();
}

void run_montecarlo(const RunConfig& config, std::vector<Artifact>& artifacts, std::ostream& out)
{
  const TrimWindow untrimmed{ kNoTrimLo, kNoTrimHi };
  const GridSpec& g = config.grid;
  // A --no-trim run still reports a trimmed column, at the reference 1.3:2.5.
  const TrimWindow trimmed = g.trimmed() ? TrimWindow{ g.trim_lo, g.trim_hi } : TrimWindow{ 1.3, 2.5 };
  const TrimWindow windows[] = { untrimmed, trimmed };
  const auto sums = monte_carlo_windows(config.dgp, config.kernel, g, config.family,
                                        config.replicates, config.seed, windows, config.threads);
  const McSummary& primary = g.trimmed() ? sums[1] : sums[0];
  artifacts.push_back({ "replicates.csv", mc_summary_to_csv(primary) });

  std::ostringstream table;
  table << "statistic,no_trimming,trimming\n"
        << "mean," << format_roundtrip(sums[0].mean) << "," << format_roundtrip(sums[1].mean) << "\n"
        << "p05," << format_roundtrip(sums[0].p05) << "," << format_roundtrip(sums[1].p05) << "\n"
        << "p95," << format_roundtrip(sums[0].p95) << "," << format_roundtrip(sums[1].p95) << "\n"
        << "failures," << sums[0].failures << "," << sums[1].failures << "\n";
  artifacts.push_back({ "table1.csv", table.str() });
  out << table.str();
  if (primary.replicate_thetas.empty())
    throw EstimationFailure("every replicate failed: no defined pointwise estimates");
}

void run_oracle_check(const RunConfig& config, std::vector<Artifact>& artifacts, std::ostream& out)
{
  if (config.dgp.copula.family() != CopulaFamily::Clayton)
    throw ConfigError("oracle-check requires --family clayton");
  double oracle_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t = 0.05 + (4.0 - 0.05) * i / 19.0;
    for (int j = 0; j < 20; ++j) {
      const double zj = -1.5 + 3.0 * j / 19.0;
      const std::vector<double> z{ zj, -0.5 * zj };
      const OracleSurface o = oracle_surface(config.dgp, t, z);
      const auto ratio = DerivativeRatio::from_partials(o.dpi_dz1, o.dpi_dz2, o.d2pi_dz1dz2);
      const double theta = theta_from_ratio(CopulaFamily::Clayton, o.pi, ratio).theta;
      oracle_err = std::max(oracle_err, std::fabs(theta - config.dgp.copula.theta()));
    }
  }

  double generator_err = 0.0;
  const std::pair<CopulaFamily, std::vector<double>> families[] = {
    { CopulaFamily::Clayton, { -0.9, -0.5, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0 } },
    { CopulaFamily::Gumbel, { 1.1, 1.5, 2.0, 3.0, 5.0, 10.0 } },
    { CopulaFamily::Frank, { -20.0, -5.0, -1.0, -0.1, 0.1, 1.0, 3.0, 5.0, 20.0 } },
  };
  for (const auto& [family, thetas] : families)
    for (double theta : thetas)
      for (int k = 1; k <= 9; ++k) {
        const double pi = 0.1 * k;
        const CopulaModel model(family, theta);
        const DerivativeRatio r(-phi_log_deriv_ratio(model, pi));
        generator_err = std::max(generator_err, std::fabs(theta_from_ratio(family, pi, r).theta - theta));
      }

  std::ostringstream report;
  report << "max_abs_theta_error_oracle=" << format_roundtrip(oracle_err) << "\n"
         << "max_abs_theta_error_generator=" << format_roundtrip(generator_err) << "\n"
         << "max_abs_theta_error=" << format_roundtrip(std::max(oracle_err, generator_err)) << "\n";
  artifacts.push_back({ "oracle_check.txt", report.str() });
  out << report.str();
}

} // namespace

const char* to_string(Command command)
{
  switch (command) {
    case Command::Simulate:
      return "simulate";
    case Command::Estimate:
      return "estimate";
    case Command::MonteCarlo:
      return "montecarlo";
    case Command::OracleCheck:
      return "oracle-check";
  }
  return "unknown";
}

Command parse_command(const std::string& name)
{
  if (name == "simulate")
    return Command::Simulate;
  if (name == "estimate")
    return Command::Estimate;
  if (name == "montecarlo")
    return Command::MonteCarlo;
  if (name == "oracle-check")
    return Command::OracleCheck;
  throw ConfigError("unknown command '" + name + "'");
}

std::map<std::string, std::string> parse_config_text(const std::string& text)
{
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim_ws(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim_ws(line.substr(0, eq));
    const std::string value = trim_ws(line.substr(eq + 1));
    if (!known_keys().count(key))
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (out.count(key))
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

RunConfig build_config(const std::map<std::string, std::string>& file_settings,
                       const std::map<std::string, std::string>& flag_settings)
{
  for (const auto* layer : { &file_settings, &flag_settings })
    if (layer->count("theta") && layer->count("tau"))
      throw ConfigError("--theta and --tau are mutually exclusive");

  std::map<std::string, std::string> merged = file_settings;
  // a dependence setting on the command line replaces either one from the file
  if (flag_settings.count("theta") || flag_settings.count("tau")) {
    merged.erase("theta");
    merged.erase("tau");
  }
  if (flag_settings.count("trim") || flag_settings.count("no-trim")) {
    merged.erase("trim");
    merged.erase("no-trim");
  }
  for (const auto& [k, v] : flag_settings)
    merged[k] = v;

  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };

  RunConfig c;
  c.threads = default_thread_count();
  try {
    if (auto v = get("command"))
      c.command = parse_command(*v);
    if (auto v = get("family"))
      c.family = parse_family(*v);
    if (c.family == CopulaFamily::Independence)
      throw ConfigError("family must be clayton, gumbel or frank");

    double theta = 0.5;
    if (auto v = get("theta"))
      theta = to_double("theta", *v);
    else if (auto v = get("tau"))
      theta = theta_from_tau(c.family, to_double("tau", *v));
    else if (c.family == CopulaFamily::Gumbel)
      theta = theta_from_tau(c.family, 0.2);
    else if (c.family == CopulaFamily::Frank)
      theta = theta_from_tau(c.family, 0.2);
    c.dgp.copula = CopulaModel(c.family, theta);

    if (auto v = get("n"))
      c.dgp.n = to_u64("n", *v);
    if (auto v = get("seed"))
      c.seed = to_u64("seed", *v);
    c.dgp.seed = c.seed;
    if (auto v = get("covariate-scale"))
      c.dgp.covariate_scale = to_double("covariate-scale", *v);
    if (auto v = get("covariate-scale-is-sd"))
      c.dgp.scale_kind = to_bool("covariate-scale-is-sd", *v) ? CovariateScale::StandardDeviation
                                                              : CovariateScale::Variance;
    const char* names[2][3] = { { "lambda1", "eta1", "beta1" }, { "lambda2", "eta2", "beta2" } };
    for (int j = 0; j < 2; ++j) {
      if (auto v = get(names[j][0]))
        c.dgp.marginals[j].lambda = to_double(names[j][0], *v);
      if (auto v = get(names[j][1]))
        c.dgp.marginals[j].eta = to_double(names[j][1], *v);
      if (auto v = get(names[j][2]))
        c.dgp.marginals[j].beta = to_double(names[j][2], *v);
    }

    if (auto v = get("bandwidth")) {
      std::vector<double> hs;
      std::stringstream ss(*v);
      std::string item;
      while (std::getline(ss, item, ','))
        hs.push_back(to_double("bandwidth", trim_ws(item)));
      if (hs.size() == 1)
        hs.push_back(hs.front());
      c.kernel.bandwidths = hs;
    }
    if (auto v = get("grid-points"))
      c.grid.grid_points = to_u64("grid-points", *v);

    const bool no_trim = get("no-trim") && to_bool("no-trim", *get("no-trim"));
    if (no_trim && get("trim"))
      throw ConfigError("--trim and --no-trim are mutually exclusive");
    if (no_trim) {
      c.grid.trim_lo = kNoTrimLo;
      c.grid.trim_hi = kNoTrimHi;
    } else if (auto v = get("trim")) {
      const auto colon = v->find(':');
      if (colon == std::string::npos)
        throw ConfigError("trim: expected lo:hi, got '" + *v + "'");
      c.grid.trim_lo = to_double("trim", v->substr(0, colon));
      c.grid.trim_hi = to_double("trim", v->substr(colon + 1));
    }

    if (auto v = get("replicates"))
      c.replicates = to_u64("replicates", *v);
    if (auto v = get("threads")) {
      const auto t = to_u64("threads", *v);
      c.threads = t == 0 ? default_thread_count() : static_cast<unsigned>(t);
    }
    if (auto v = get("out"))
      c.output_dir = *v;
    if (auto v = get("data"))
      c.data = std::filesystem::path(*v);

    c.dgp.validate();
    c.kernel.validate(2);
    c.grid.validate();
    if (c.replicates < 1)
      throw ConfigError("replicates must be >= 1");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig parse_command_line(const std::vector<std::string>& args)
{
  CLI::App app{ "Copula-based estimation of dependent competing risks under exclusion restrictions",
                "ccr" };
  app.set_version_flag("--version", std::string(kVersion));

  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  auto add = [&](const std::string& key, const std::string& help) {
    options.emplace_back(key, app.add_option("--" + key, values[key], help));
  };
  auto add_flag = [&](const std::string& key, const std::string& help) {
    options.emplace_back(key, app.add_flag("--" + key, help));
  };

  std::string config_path;
  app.add_option("--config", config_path, "flat key = value config file");
  add("command", "command to run when no subcommand is given");
  add("n", "sample size");
  add("seed", "random seed (base seed for montecarlo)");
  add("theta", "copula dependence parameter");
  add("tau", "Kendall's tau, converted to theta");
  add("family", "copula family: clayton, gumbel or frank");
  add("bandwidth", "kernel bandwidths h1,h2");
  add("grid-points", "number of duration grid points");
  add("trim", "trim window lo:hi");
  add_flag("no-trim", "average over the whole grid");
  add("replicates", "Monte Carlo replicates");
  add("threads", "worker threads (0 = all cores)");
  add_flag("covariate-scale-is-sd", "read the covariate scale as a standard deviation");
  add("covariate-scale", "covariate normal scale (variance unless --covariate-scale-is-sd)");
  for (const char* k : { "lambda1", "eta1", "beta1", "lambda2", "eta2", "beta2" })
    add(k, "Weibull marginal parameter");
  add("data", "dataset CSV to estimate from (estimate)");
  add("out", "output directory");

  app.require_subcommand(0, 1);
  for (const char* name : { "simulate", "estimate", "montecarlo", "oracle-check" })
    app.add_subcommand(name)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app.parse(reversed);

  std::map<std::string, std::string> flags;
  for (const auto& [key, opt] : options) {
    if (opt->count() == 0)
      continue;
    flags[key] = opt->get_expected_max() == 0 ? "true" : values[key];
  }
  for (auto* sub : app.get_subcommands())
    flags["command"] = sub->get_name();

  std::map<std::string, std::string> file;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in)
      throw ConfigError("cannot read config file " + config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    file = parse_config_text(buf.str());
  }
  if (!flags.count("command") && !file.count("command"))
    throw ConfigError("no command given (simulate, estimate, montecarlo, oracle-check)");
  return build_config(file, flags);
}

std::string manifest_text(const RunConfig& c)
{
  std::ostringstream os;
  os << "# ccr run manifest\n"
     << "version = " << kVersion << "\n"
     << "command = " << to_string(c.command) << "\n"
     << "family = " << ccr::to_string(c.family) << "\n"
     << "theta = " << format_roundtrip(c.dgp.copula.theta()) << "\n"
     << "n = " << c.dgp.n << "\n"
     << "seed = " << c.seed << "\n";
  const char* names[2][3] = { { "lambda1", "eta1", "beta1" }, { "lambda2", "eta2", "beta2" } };
  for (int j = 0; j < 2; ++j) {
    os << names[j][0] << " = " << format_roundtrip(c.dgp.marginals[j].lambda) << "\n"
       << names[j][1] << " = " << format_roundtrip(c.dgp.marginals[j].eta) << "\n"
       << names[j][2] << " = " << format_roundtrip(c.dgp.marginals[j].beta) << "\n";
  }
  os << "covariate-scale = " << format_roundtrip(c.dgp.covariate_scale) << "\n"
     << "covariate-scale-is-sd = "
     << (c.dgp.scale_kind == CovariateScale::StandardDeviation ? "true" : "false") << "\n"
     << "bandwidth = " << format_list(c.kernel.bandwidths) << "\n"
     << "grid-points = " << c.grid.grid_points << "\n";
  if (c.grid.trimmed())
    os << "trim = " << format_roundtrip(c.grid.trim_lo) << ":" << format_roundtrip(c.grid.trim_hi)
       << "\n";
  else
    os << "no-trim = true\n";
  os << "replicates = " << c.replicates << "\n";
  if (c.data)
    os << "data = " << c.data->string() << "\n";
  return os.str();
}

void run(const RunConfig& config, std::ostream& out)
{
  std::vector<Artifact> artifacts;
  switch (config.command) {
    case Command::Simulate:
      run_simulate(config, artifacts, out);
      break;
    case Command::Estimate:
      run_estimate(config, artifacts, out);
      break;
    case Command::MonteCarlo:
      run_montecarlo(config, artifacts, out);
      break;
    case Command::OracleCheck:
      run_oracle_check(config, artifacts, out);
      break;
  }
  artifacts.push_back({ "manifest.txt", manifest_text(config) });
  commit(config.output_dir, artifacts);
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  auto fail = [&err](int code, const char* kind, const std::string& message) {
    std::string flat = message;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    std::replace(flat.begin(), flat.end(), '"', '\'');
    err << "error code=" << code << " kind=" << kind << " message=\"" << flat << "\"\n";
    return code;
  };
  RunConfig config;
  try {
    config = parse_command_line(args);
  } catch (const CLI::CallForHelp&) {
    out << "usage: ccr {simulate|estimate|montecarlo|oracle-check} [--n N] [--seed S] "
           "[--theta X | --tau X] [--family F] [--bandwidth h1,h2] [--grid-points M] "
           "[--trim lo:hi | --no-trim] [--replicates R] [--threads T] "
           "[--covariate-scale-is-sd] [--data FILE] [--config FILE] [--out DIR]\n";
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(kExitConfig, "config", e.what());
  } catch (const ConfigError& e) {
    return fail(kExitConfig, "config", e.what());
  }

  try {
    run(config, out);
  } catch (const ConfigError& e) {
    return fail(kExitConfig, "config", e.what());
  } catch (const EstimationFailure& e) {
    return fail(kExitEstimation, "estimation", e.what());
  } catch (const std::exception& e) {
    return fail(kExitEstimation, "runtime", e.what());
  }
  return kExitOk;
}

} // namespace ccr::cli
