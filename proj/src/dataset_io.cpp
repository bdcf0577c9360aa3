#include "ccr/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace ccr {

namespace {

double parse_double(std::string_view field, std::size_t line)
{
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::runtime_error("line " + std::to_string(line) + ": cannot parse number '" +
                             std::string(field) + "'");
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

} // namespace

std::string format_roundtrip(double x)
{
  if (std::isnan(x))
    return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc())
    throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::string dataset_to_csv(std::span<const Observation> observations)
{
  const std::size_t d = observations.empty() ? 2 : observations.front().z.size();
  std::string out = "t,delta";
  for (std::size_t j = 0; j < d; ++j)
    out += ",z" + std::to_string(j + 1);
  out += '\n';
  for (const auto& o : observations) {
    out += format_roundtrip(o.t);
    out += ',';
    out += std::to_string(o.delta);
    for (double z : o.z) {
      out += ',';
      out += format_roundtrip(z);
    }
    out += '\n';
  }
  return out;
}

std::vector<Observation> dataset_from_csv(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("dataset is empty");
  const auto header = split_commas(line);
  if (header.size() < 4 || header[0] != "t" || header[1] != "delta")
    throw std::runtime_error("dataset header must be t,delta,z1,...,zd");
  for (std::size_t j = 2; j < header.size(); ++j)
    if (header[j] != "z" + std::to_string(j - 1))
      throw std::runtime_error("unexpected dataset column '" + std::string(header[j]) + "'");
  const std::size_t d = header.size() - 2;

  std::vector<Observation> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    const auto fields = split_commas(line);
    if (fields.size() != d + 2)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(d + 2) + " fields");
    Observation o;
    o.t = parse_double(fields[0], line_no);
    if (!(o.t > 0.0))
      throw std::runtime_error("line " + std::to_string(line_no) + ": duration must be > 0");
    if (fields[1] == "1")
      o.delta = 1;
    else if (fields[1] == "2")
      o.delta = 2;
    else
      throw std::runtime_error("line " + std::to_string(line_no) + ": delta must be 1 or 2");
    o.z.resize(d);
    for (std::size_t j = 0; j < d; ++j)
      o.z[j] = parse_double(fields[j + 2], line_no);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<Observation> read_dataset(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_csv(buf.str());
}

std::string surface_to_csv(std::span<const double> t,
                           std::span<const std::optional<SurfaceEstimate>> surfaces)
{
  std::string out = "t,pi,dpi1,dpi2,d2pi\n";
  const double nan = std::nan("");
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = surfaces[i];
    out += format_roundtrip(t[i]) + ',' + format_roundtrip(e ? e->pi_hat : nan) + ',' +
           format_roundtrip(e ? e->dpi_hat[0] : nan) + ',' +
           format_roundtrip(e ? e->dpi_hat[1] : nan) + ',' +
           format_roundtrip(e ? e->d2pi_hat : nan) + '\n';
  }
  return out;
}

std::string theta_series_to_csv(const ThetaSeries& series)
{
  std::string out = "t,theta,included\n";
  for (std::size_t i = 0; i < series.t.size(); ++i)
    out += format_roundtrip(series.t[i]) + ',' + format_roundtrip(series.theta_pointwise[i]) + ',' +
           (series.included[i] ? "1" : "0") + '\n';
  return out;
}

std::string mc_summary_to_csv(const McSummary& summary)
{
  std::string out = "replicate,theta_hat,n_included,failed\n";
  for (const auto& r : summary.replicates)
    out += std::to_string(r.replicate) + ',' + format_roundtrip(r.theta_hat) + ',' +
           std::to_string(r.n_included) + ',' + (r.failed ? "1" : "0") + '\n';
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out)
      throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

} // namespace ccr
