#pragma once

#include "bootstrap_ci.hpp"
#include "isotonic.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smoothboot {

//! Y = f0(X) + N(0, sigma0^2) with X uniform on [0,1].
struct ScenarioSpec
{
  std::string name;
  std::function<double(double)> f0;
  double sigma0 = 0.1;
  std::size_t n = 100;

  void validate() const
  {
    if (!f0) {
      throw std::invalid_argument("scenario needs a regression function");
    }
    if (!(sigma0 > 0.0)) {
      throw std::invalid_argument("sigma0 must be positive");
    }
    if (n < 3) {
      throw std::invalid_argument("scenario needs n >= 3");
    }
  }

  //! f0(x) = x^2 + x/5.
  static ScenarioSpec quadratic(std::size_t n, double sigma0 = 0.1)
  {
    return { "quadratic", [](double x) { return x * x + x / 5.0; }, sigma0, n };
  }

  //! f0(x) = exp(4(x - 1/2)) / (1 + exp(4(x - 1/2))).
  static ScenarioSpec logistic(std::size_t n, double sigma0 = 0.1)
  {
    return { "logistic",
             [](double x) {
               double e = std::exp(4.0 * (x - 0.5));
               return e / (1.0 + e);
             },
             sigma0,
             n };
  }

  static ScenarioSpec custom(std::string name,
                             std::function<double(double)> f0,
                             std::size_t n,
                             double sigma0)
  {
    return { std::move(name), std::move(f0), sigma0, n };
  }
};

inline RegressionSample gen_sample(const ScenarioSpec& spec, Stream& stream)
{
  spec.validate();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> xs(spec.n);
  for (;;) {
    for (auto& x : xs) {
      x = unif(stream);
    }
    std::sort(xs.begin(), xs.end());
    if (std::adjacent_find(xs.begin(), xs.end()) == xs.end()) {
      break;
    }
  }
  std::vector<double> ys(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    ys[i] = spec.f0(xs[i]) + spec.sigma0 * noise(stream);
  }
  return RegressionSample(std::move(xs), std::move(ys));
}

struct CoverageReport
{
  std::vector<double> ts;
  std::vector<double> coverage;
  std::vector<std::size_t> hits;
  std::size_t M = 0;
  std::uint64_t seed = 0;
  std::string scenario;
  double sigma0 = 0.0;
  std::size_t n = 0;
  BootstrapConfig config;
};

//! Optional post-processing of each band before containment is checked.
using BandHook = std::function<void(ConfidenceBand&)>;

//! Fraction of M simulated data sets whose band contains f0(t). Replication
//! m generates its sample from substream (seed, m, 0) and resamples from
//! (seed, m, 1, b).
inline CoverageReport coverage_experiment(const ScenarioSpec& spec,
                                          const BootstrapConfig& config,
                                          std::span<const double> ts,
                                          std::size_t M,
                                          std::uint64_t seed,
                                          const BandHook& hook = {})
{
  spec.validate();
  config.validate();
  if (M == 0) {
    throw std::invalid_argument("M must be positive");
  }

  BootstrapConfig inner = config;
  inner.threads = 1;
  StreamKey root(seed);
  std::vector<std::vector<char>> contained(M);
  parallel_for(M, config.threads, [&](std::size_t m) {
    StreamKey rep = root.child(m);
    Stream sample_stream(rep.child(0));
    RegressionSample sample = gen_sample(spec, sample_stream);
    ConfidenceBand band = confidence_band(sample, inner, ts, rep.child(1));
    if (hook) {
      hook(band);
    }
    auto& row = contained[m];
    row.resize(ts.size());
    for (std::size_t j = 0; j < ts.size(); ++j) {
      double truth = spec.f0(ts[j]);
      row[j] = band.lower[j] <= truth && truth <= band.upper[j];
    }
  });

  CoverageReport report;
  report.ts.assign(ts.begin(), ts.end());
  report.hits.assign(ts.size(), 0);
  for (const auto& row : contained) {
    for (std::size_t j = 0; j < ts.size(); ++j) {
      report.hits[j] += row[j] ? 1 : 0;
    }
  }
  report.coverage.resize(ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) {
    report.coverage[j] = static_cast<double>(report.hits[j]) / static_cast<double>(M);
  }
  report.M = M;
  report.seed = seed;
  report.scenario = spec.name;
  report.sigma0 = spec.sigma0;
  report.n = spec.n;
  report.config = config;
  return report;
}

} // namespace smoothboot
