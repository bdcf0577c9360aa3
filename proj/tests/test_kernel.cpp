#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ccr/dgp.hpp"
#include "ccr/kernel.hpp"
#include "ccr/numeric.hpp"
#include "support/oracles.hpp"

using namespace ccr;

namespace {

std::vector<Observation> random_sample(std::size_t n, std::size_t d, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.3);
  std::exponential_distribution<double> t(1.0);
  std::vector<Observation> out(n);
  for (auto& o : out) {
    o.t = t(rng);
    o.delta = 1;
    o.z.resize(d);
    for (auto& x : o.z)
      x = z(rng);
  }
  return out;
}

DgpConfig reference_design(std::size_t n, std::uint64_t seed)
{
  DgpConfig c;
  c.n = n;
  c.seed = seed;
  return c;
}

std::vector<double> mean_z(const std::vector<Observation>& obs)
{
  std::vector<double> m(2, 0.0);
  for (const auto& o : obs) {
    m[0] += o.z[0];
    m[1] += o.z[1];
  }
  m[0] /= static_cast<double>(obs.size());
  m[1] /= static_cast<double>(obs.size());
  return m;
}

} // namespace

TEST_CASE("epanechnikov kernel")
{
  const auto k = KernelType::Epanechnikov;
  CHECK(kernel_eval(k, 0.0) == 0.75);
  CHECK(kernel_eval(k, 1.0) == 0.0);
  CHECK(kernel_eval(k, -1.0) == 0.0);
  CHECK(kernel_eval(k, 2.0) == 0.0);
  CHECK(kernel_deriv(k, 0.0) == 0.0);
  CHECK(kernel_deriv(k, 0.5) == -0.75);
  CHECK(kernel_deriv(k, 1.5) == 0.0);
  CHECK(kernel_eval(k, 0.37) == kernel_eval(k, -0.37));
  CHECK(std::fabs(oracle::simpson([&](double u) { return kernel_eval(k, u); }, -1.0, 1.0, 1000) - 1.0) < 1e-10);
}

TEST_CASE("sample view and kernel spec validation")
{
  std::vector<Observation> empty;
  CHECK_THROWS_AS(SampleView{ empty }, std::invalid_argument);
  std::vector<Observation> one_dim{ { 1.0, 1, { 0.0 } } };
  CHECK_THROWS_AS(SampleView{ one_dim }, std::invalid_argument);
  std::vector<Observation> ragged{ { 1.0, 1, { 0.0, 0.0 } }, { 1.0, 1, { 0.0, 0.0, 0.0 } } };
  CHECK_THROWS_AS(SampleView{ ragged }, std::invalid_argument);

  CHECK_THROWS_AS((KernelSpec{ { 0.3 }, KernelType::Epanechnikov }.validate(2)), std::invalid_argument);
  CHECK_THROWS_AS((KernelSpec{ { 0.3, 0.0 }, KernelType::Epanechnikov }.validate(2)), std::invalid_argument);
  CHECK_NOTHROW(KernelSpec{}.validate(2));
}

TEST_CASE("raw sums: single observation at the evaluation point")
{
  std::vector<Observation> obs{ { 2.0, 1, { 0.1, -0.2 } } };
  const KernelSpec spec{ { 0.3, 0.4 }, KernelType::Epanechnikov };
  const std::vector<double> z{ 0.1, -0.2 };
  const RawSums s = raw_sums(SampleView(obs), spec, 1.0, z);
  const double expected = (0.75 / 0.3) * (0.75 / 0.4);
  CHECK(s.a == doctest::Approx(expected).epsilon(1e-15));
  CHECK(s.b == doctest::Approx(expected).epsilon(1e-15));
  CHECK(s.a_k[0] == 0.0);
  CHECK(s.b_kl == 0.0);
}

TEST_CASE("raw sums: sample outside the kernel support")
{
  auto obs = random_sample(50, 2, 1);
  for (auto& o : obs)
    o.z[0] += 10.0;
  const std::vector<double> z{ 0.0, 0.0 };
  const KernelSpec spec;
  const RawSums s = raw_sums(SampleView(obs), spec, 0.5, z);
  CHECK(s.a == 0.0);
  CHECK(s.b == 0.0);
  CHECK(s.a_k == std::vector<double>{ 0.0, 0.0 });
  CHECK(s.b_k == std::vector<double>{ 0.0, 0.0 });
  CHECK(s.a_kl == 0.0);
  CHECK(s.b_kl == 0.0);
  CHECK_THROWS_AS(estimate_surface(SampleView(obs), spec, 0.5, z), EmptyNeighborhood);
}

TEST_CASE("raw sum derivatives match finite differences")
{
  const KernelSpec spec{ { 0.3, 0.3, 0.5 }, KernelType::Epanechnikov };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto obs = random_sample(50, 3, seed);
    const SampleView view(obs);
    const std::vector<double> z{ 0.05, -0.02, 0.1 };
    const double t = 0.7;
    const RawSums s = raw_sums(view, spec, t, z);
    REQUIRE(s.b > 0.0);

    auto a_at = [&](std::size_t k, double x) {
      auto zz = z;
      zz[k] = x;
      return raw_sums(view, spec, t, zz).a;
    };
    auto b_at = [&](std::size_t k, double x) {
      auto zz = z;
      zz[k] = x;
      return raw_sums(view, spec, t, zz).b;
    };
    for (std::size_t k = 0; k < 3; ++k) {
      const double fa = oracle::central_diff([&](double x) { return a_at(k, x); }, z[k], 1e-6);
      const double fb = oracle::central_diff([&](double x) { return b_at(k, x); }, z[k], 1e-6);
      CHECK(std::fabs(s.a_k[k] - fa) <= 1e-6 * std::fabs(s.a_k[k]));
      CHECK(std::fabs(s.b_k[k] - fb) <= 1e-6 * std::fabs(s.b_k[k]));
    }
    auto a2 = [&](double x, double y) {
      auto zz = z;
      zz[0] = x;
      zz[1] = y;
      return raw_sums(view, spec, t, zz).a;
    };
    const double fa12 = oracle::mixed_diff(a2, z[0], z[1], 1e-5);
    CHECK(std::fabs(s.a_kl - fa12) <= 1e-5 * std::fabs(s.a_kl));
  }
}

TEST_CASE("estimate surface: everyone at risk in the window")
{
  auto obs = random_sample(200, 2, 4);
  for (auto& o : obs)
    o.t += 5.0;
  const std::vector<double> z{ 0.0, 0.0 };
  const SurfaceEstimate e = estimate_surface(SampleView(obs), KernelSpec{}, 1.0, z);
  CHECK(e.pi_hat == 1.0);
  CHECK(e.dpi_hat[0] == 0.0);
  CHECK(e.dpi_hat[1] == 0.0);
  CHECK(e.d2pi_hat == doctest::Approx(0.0));
  CHECK(e.b_at_z > 0.0);
}

TEST_CASE("estimated derivatives match finite differences of pi_hat")
{
  const auto obs = simulate(reference_design(5000, 77));
  const SampleView view(obs);
  const KernelSpec spec;
  std::vector<double> z1s, z2s;
  for (const auto& o : obs) {
    z1s.push_back(o.z[0]);
    z2s.push_back(o.z[1]);
  }
  const std::vector<double> z{ 0.02, -0.03 };
  const double edge = std::min(oracle::support_edge_distance(z1s, z[0], 0.3),
                               oracle::support_edge_distance(z2s, z[1], 0.3));
  const double step = std::min(2e-5, 0.5 * edge);
  for (double t : { 0.3, 0.8, 1.4 }) {
    const SurfaceEstimate e = estimate_surface(view, spec, t, z);
    auto pi_at = [&](double x, double y) {
      const std::vector<double> zz{ x, y };
      return estimate_surface(view, spec, t, zz).pi_hat;
    };
    const double d1 = oracle::central_diff([&](double x) { return pi_at(x, z[1]); }, z[0], 1e-6);
    const double d2 = oracle::central_diff([&](double y) { return pi_at(z[0], y); }, z[1], 1e-6);
    const double d12 = oracle::mixed_diff(pi_at, z[0], z[1], step);
    CAPTURE(t);
    CHECK(std::fabs(e.dpi_hat[0] - d1) <= 1e-6 * std::fabs(e.dpi_hat[0]));
    CHECK(std::fabs(e.dpi_hat[1] - d2) <= 1e-6 * std::fabs(e.dpi_hat[1]));
    CHECK(std::fabs(e.d2pi_hat - d12) <= 1e-4 * std::fabs(e.d2pi_hat));
  }
}

TEST_CASE("profile sums agree with direct sums")
{
  const auto obs = simulate(reference_design(20000, 3));
  const SampleView view(obs);
  const KernelSpec spec;
  const std::vector<double> z{ 0.01, 0.0 };
  const SurfaceProfile profile(view, spec, z);
  CHECK(profile.window_size() > 0);
  CHECK(profile.window_size() < obs.size());
  for (double t : { 0.0, 0.2, 1.0, 2.0, 10.0 }) {
    const RawSums direct = raw_sums(view, spec, t, z);
    const RawSums fast = profile.sums_at(t);
    CHECK(fast.a == doctest::Approx(direct.a).epsilon(1e-12));
    CHECK(fast.b == doctest::Approx(direct.b).epsilon(1e-12));
    CHECK(fast.a_k[0] == doctest::Approx(direct.a_k[0]).epsilon(1e-11));
    CHECK(fast.b_k[1] == doctest::Approx(direct.b_k[1]).epsilon(1e-11));
    CHECK(fast.a_kl == doctest::Approx(direct.a_kl).epsilon(1e-10));
    CHECK(fast.b_kl == doctest::Approx(direct.b_kl).epsilon(1e-10));
  }
}

TEST_CASE("property: pi_hat is a survival curve in t")
{
  const auto obs = simulate(reference_design(20000, 8));
  const SampleView view(obs);
  const std::vector<double> z = mean_z(obs);
  const SurfaceProfile profile(view, KernelSpec{}, z);
  double previous = 1.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = 0.025 * i;
    const double p = profile.at(t).pi_hat;
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(p <= previous);
    previous = p;
  }
}

TEST_CASE("pi_hat tracks the true surface at n = 100000")
{
  const auto obs = simulate(reference_design(100000, 1234));
  const SampleView view(obs);
  const std::vector<double> z = mean_z(obs);
  const SurfaceProfile profile(view, KernelSpec{}, z);
  const DgpConfig truth = reference_design(1, 1);
  for (double t : { 0.25, 0.5, 1.0, 1.5, 2.0 }) {
    CAPTURE(t);
    CHECK(std::fabs(profile.at(t).pi_hat - oracle_surface(truth, t, z).pi) <= 0.02);
  }
}

TEST_CASE("property: error of pi_hat shrinks with n under a shrinking bandwidth")
{
  const double t = 1.0;
  const DgpConfig truth = reference_design(1, 1);
  std::vector<double> medians;
  for (std::size_t n : { 5000, 20000, 80000 }) {
    const double h = 0.3 * std::pow(static_cast<double>(n) / 100000.0, -1.0 / 7.0);
    const KernelSpec spec{ { h, h }, KernelType::Epanechnikov };
    std::vector<double> errors;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto obs = simulate(reference_design(n, 1000 + seed));
      const std::vector<double> z = mean_z(obs);
      const SurfaceProfile profile(SampleView(obs), spec, z);
      errors.push_back(std::fabs(profile.at(t).pi_hat - oracle_surface(truth, t, z).pi));
    }
    medians.push_back(median(errors));
  }
  CAPTURE(medians[0]);
  CAPTURE(medians[1]);
  CAPTURE(medians[2]);
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("property: variance of the cross-derivative estimate falls like 1/n at fixed h")
{
  const double t = 1.0;
  const KernelSpec spec;
  std::vector<double> log_n, log_var;
  for (std::size_t n : { 5000, 20000, 80000 }) {
    std::vector<double> d2;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto obs = simulate(reference_design(n, 5000 + seed));
      const std::vector<double> z{ 0.0, 0.0 };
      d2.push_back(SurfaceProfile(SampleView(obs), spec, z).at(t).d2pi_hat);
    }
    const double m = compensated_mean(d2);
    double v = 0.0;
    for (double x : d2)
      v += (x - m) * (x - m);
    v /= static_cast<double>(d2.size() - 1);
    log_n.push_back(std::log(static_cast<double>(n)));
    log_var.push_back(std::log(v));
  }
  const double mx = (log_n[0] + log_n[1] + log_n[2]) / 3.0;
  const double my = (log_var[0] + log_var[1] + log_var[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (log_n[i] - mx) * (log_var[i] - my);
    sxx += (log_n[i] - mx) * (log_n[i] - mx);
  }
  const double slope = sxy / sxx;
  CAPTURE(slope);
  CHECK(slope >= -1.5);
  CHECK(slope <= -0.5);
}
