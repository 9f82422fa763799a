#pragma once

#include "estimators.hpp"
#include "isotonic.hpp"
#include "kernel.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smoothboot {

enum class Estimator
{
  slse,
  nw
};

//! Variance estimate used to Studentize the NW path.
enum class NwSigma
{
  hall_kay,
  residual
};

inline std::string to_string(Estimator e)
{
  return e == Estimator::slse ? "slse" : "nw";
}

inline std::string to_string(NwSigma s)
{
  return s == NwSigma::hall_kay ? "hall-kay" : "residual";
}

struct BootstrapConfig
{
  std::size_t B = 1000;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::slse;
  bool studentized = false;
  NwSigma nw_sigma = NwSigma::hall_kay;
  double alpha = 0.05;
  double c = 0.5;
  double c0 = 0.7;
  //! Worker threads for the replications; 0 = hardware concurrency. Output
  //! does not depend on this value.
  unsigned threads = 0;

  void validate() const
  {
    if (B < 2) {
      throw std::invalid_argument("B must be at least 2");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("alpha must lie in (0,1)");
    }
    if (!(c > 0.0) || !(c0 > 0.0)) {
      throw std::invalid_argument("bandwidth constants must be positive");
    }
  }

  BandwidthPlan plan(std::size_t n) const { return BandwidthPlan(c, c0, n); }
};

//! Centered residuals, one entry per observation (tied observations repeat
//! their design point's residual), plus the pilot values at the design points.
struct ResidualSet
{
  std::vector<double> residuals;
  std::vector<double> pilot_values;
};

struct ConfidenceBand
{
  std::vector<double> ts;
  std::vector<double> estimate;
  std::vector<double> lower;
  std::vector<double> upper;

  Estimator estimator = Estimator::slse;
  bool studentized = false;
  NwSigma nw_sigma = NwSigma::hall_kay;
  double h = 0.0;
  double h0 = 0.0;
  double c = 0.0;
  double c0 = 0.0;
  double alpha = 0.0;
  std::size_t B = 0;
  std::uint64_t seed = 0;
};

//! Row-major B x |ts| matrix of bootstrap differences.
struct DiffMatrix
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::vector<double> column(std::size_t c) const
  {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      out[r] = (*this)(r, c);
    }
    return out;
  }
};

namespace detail {

//! Neumaier-compensated sum.
inline double compensated_sum(std::span<const double> v)
{
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

} // namespace detail

inline ResidualSet make_residuals(const RegressionSample& sample,
                                  std::span<const double> pilot_at_xs)
{
  if (pilot_at_xs.size() != sample.size()) {
    throw std::invalid_argument("pilot values must match the design points");
  }
  ResidualSet rs;
  rs.pilot_values.assign(pilot_at_xs.begin(), pilot_at_xs.end());
  rs.residuals.reserve(sample.observations());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    rs.residuals.insert(rs.residuals.end(),
                        sample.counts()[i],
                        sample.ys()[i] - pilot_at_xs[i]);
  }
  double mean = detail::compensated_sum(rs.residuals) /
                static_cast<double>(rs.residuals.size());
  for (auto& r : rs.residuals) {
    r -= mean;
  }
  return rs;
}

//! sqrt(n^-1 sum E_i^2) over the centered residuals.
inline double sigma_residual(const ResidualSet& rs)
{
  if (rs.residuals.empty()) {
    throw std::invalid_argument("empty residual set");
  }
  double ss = 0.0;
  for (double r : rs.residuals) {
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(rs.residuals.size()));
}

//! Hall-Kay second-order difference coefficients.
inline constexpr double hall_kay_d0 = 0.80901699437494742410; // (sqrt5 + 1) / 4
inline constexpr double hall_kay_d1 = -0.5;
inline constexpr double hall_kay_d2 = -0.30901699437494742410; // -(sqrt5 - 1) / 4

//! Difference-based noise level estimate from responses in x order.
inline double sigma_hall_kay(std::span<const double> ys)
{
  if (ys.size() < 3) {
    throw std::invalid_argument("Hall-Kay estimator needs at least 3 responses");
  }
  double ss = 0.0;
  for (std::size_t i = 0; i + 2 < ys.size(); ++i) {
    double d = hall_kay_d0 * ys[i] + hall_kay_d1 * ys[i + 1] + hall_kay_d2 * ys[i + 2];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(ys.size() - 2));
}

namespace detail {

struct Resample
{
  RegressionSample sample;
  //! Standard deviation of the drawn residuals around their own mean.
  double drawn_sigma;
};

inline Resample draw_resample(const RegressionSample& design,
                              const ResidualSet& rs,
                              Stream& stream)
{
  std::size_t pool = rs.residuals.size();
  if (pool == 0 || rs.pilot_values.size() != design.size()) {
    throw std::invalid_argument("residual set does not match the design");
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  std::vector<double> ys(design.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> draws;
  for (std::size_t i = 0; i < design.size(); ++i) {
    // a point with tie count k receives the mean of k draws
    std::size_t k = design.counts()[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double e = rs.residuals[pick(stream)];
      draws.push_back(e);
      acc += e;
      sum += e;
    }
    ys[i] = rs.pilot_values[i] + acc / static_cast<double>(k);
  }
  double mean = sum / static_cast<double>(draws.size());
  for (double e : draws) {
    sum_sq += (e - mean) * (e - mean);
  }
  return { RegressionSample(design.xs(), std::move(ys), design.counts()),
           std::sqrt(sum_sq / static_cast<double>(draws.size())) };
}

} // namespace detail

//! Y*_i = m(X_i) + E*_i, E*_i uniform with replacement from the centered
//! residuals; design points are kept fixed.
inline RegressionSample draw_bootstrap_sample(const RegressionSample& design,
                                              const ResidualSet& rs,
                                              Stream& stream)
{
  return detail::draw_resample(design, rs, stream).sample;
}

namespace detail {

inline std::vector<double> estimator_curve(const RegressionSample& sample,
                                           Estimator estimator,
                                           Bandwidth h,
                                           Bandwidth h0,
                                           std::span<const double> ts)
{
  if (estimator == Estimator::slse) {
    return slse_curve(SlseFit(fit_lse(sample), h, h0), ts);
  }
  return nw_curve(sample, h, ts);
}

//! Everything the resampling needs that does not depend on the main
//! bandwidth: the oversmoothed pilot fit, its values at the design points
//! and the centered residuals.
class ResamplingModel
{
public:
  ResamplingModel(const RegressionSample& sample, Estimator estimator, Bandwidth h0)
    : sample_(sample)
    , estimator_(estimator)
    , h0_(h0)
    , pilot_fit_(estimator == Estimator::slse
                   ? std::optional<SlseFit>(SlseFit(fit_lse(sample), h0, h0))
                   : std::nullopt)
    , residuals_(make_residuals(sample, pilot(sample.xs())))
  {}

  std::vector<double> pilot(std::span<const double> ts) const
  {
    if (pilot_fit_) {
      return slse_curve(*pilot_fit_, ts);
    }
    return nw_curve(sample_, h0_, ts);
  }

  const RegressionSample& sample() const { return sample_; }
  const ResidualSet& residuals() const { return residuals_; }
  Estimator estimator() const { return estimator_; }
  Bandwidth h0() const { return h0_; }

  Resample draw(StreamKey key) const
  {
    Stream stream(key);
    return draw_resample(sample_, residuals_, stream);
  }

private:
  const RegressionSample& sample_;
  Estimator estimator_;
  Bandwidth h0_;
  std::optional<SlseFit> pilot_fit_;
  ResidualSet residuals_;
};

//! Per-replication scale for Studentization.
inline double replicate_sigma(const Resample& r, Estimator estimator, NwSigma nw_sigma)
{
  if (estimator == Estimator::nw && nw_sigma == NwSigma::hall_kay) {
    return sigma_hall_kay(r.sample.ys());
  }
  return r.drawn_sigma;
}

inline DiffMatrix bootstrap_diffs(const ResamplingModel& model,
                                  const BootstrapConfig& config,
                                  Bandwidth h,
                                  std::span<const double> ts,
                                  StreamKey key)
{
  std::vector<double> pilot_ts = model.pilot(ts);
  DiffMatrix m{ config.B, ts.size(), std::vector<double>(config.B * ts.size()) };
  parallel_for(config.B, config.threads, [&](std::size_t b) {
    Resample r = model.draw(key.child(b));
    std::vector<double> est =
      estimator_curve(r.sample, config.estimator, h, model.h0(), ts);
    double scale = 1.0;
    if (config.studentized) {
      scale = replicate_sigma(r, config.estimator, config.nw_sigma);
      if (!(scale > 0.0)) {
        throw std::domain_error("zero variance estimate in Studentized bootstrap replication");
      }
    }
    for (std::size_t j = 0; j < ts.size(); ++j) {
      m(b, j) = (est[j] - pilot_ts[j]) / scale;
    }
  });
  return m;
}

} // namespace detail

//! Bootstrap differences f*_h(t) - f_{h0}(t) (optionally Studentized),
//! replication b drawn from substream (seed, b).
inline DiffMatrix bootstrap_diffs(const RegressionSample& sample,
                                  const BootstrapConfig& config,
                                  std::span<const double> ts)
{
  config.validate();
  auto plan = config.plan(sample.observations());
  detail::ResamplingModel model(sample, config.estimator, plan.h0());
  return detail::bootstrap_diffs(model, config, plan.h(), ts, StreamKey(config.seed));
}

//! Order-statistic quantile X_(ceil(qB)) of a sorted sample.
inline double order_quantile(std::span<const double> sorted, double q)
{
  if (sorted.empty()) {
    throw std::invalid_argument("empty bootstrap sample");
  }
  auto n = static_cast<double>(sorted.size());
  // guard against q*B landing a rounding error above an integer
  double k = std::ceil(q * n - 1e-9 * n);
  auto idx = static_cast<std::size_t>(std::clamp(k, 1.0, n)) - 1;
  return sorted[idx];
}

struct Interval
{
  double lower;
  double upper;
};

//! (estimate - Q_{1-a/2} scale, estimate - Q_{a/2} scale).
inline Interval percentile_ci(std::span<const double> diffs,
                              double point_estimate,
                              double alpha,
                              double scale = 1.0)
{
  if (diffs.empty()) {
    throw std::invalid_argument("empty bootstrap sample");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1)");
  }
  if (!(scale >= 0.0)) {
    throw std::invalid_argument("scale must be nonnegative");
  }
  std::vector<double> sorted(diffs.begin(), diffs.end());
  std::sort(sorted.begin(), sorted.end());
  double q_hi = order_quantile(sorted, 1.0 - alpha / 2.0);
  double q_lo = order_quantile(sorted, alpha / 2.0);
  return { point_estimate - q_hi * scale, point_estimate - q_lo * scale };
}

//! Full pipeline with an explicit root key; replication b uses key.child(b).
inline ConfidenceBand confidence_band(const RegressionSample& sample,
                                      const BootstrapConfig& config,
                                      std::span<const double> ts,
                                      StreamKey key)
{
  config.validate();
  auto plan = config.plan(sample.observations());
  detail::ResamplingModel model(sample, config.estimator, plan.h0());

  ConfidenceBand band;
  band.ts.assign(ts.begin(), ts.end());
  band.estimate = detail::estimator_curve(sample, config.estimator, plan.h(), plan.h0(), ts);

  double scale = 1.0;
  if (config.studentized) {
    bool hall_kay = config.estimator == Estimator::nw && config.nw_sigma == NwSigma::hall_kay;
    scale = hall_kay ? sigma_hall_kay(sample.ys()) : sigma_residual(model.residuals());
  }

  DiffMatrix diffs = detail::bootstrap_diffs(model, config, plan.h(), ts, key);
  band.lower.resize(ts.size());
  band.upper.resize(ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) {
    auto ci = percentile_ci(diffs.column(j), band.estimate[j], config.alpha, scale);
    band.lower[j] = ci.lower;
    band.upper[j] = ci.upper;
  }

  band.estimator = config.estimator;
  band.studentized = config.studentized;
  band.nw_sigma = config.nw_sigma;
  band.h = plan.h().value();
  band.h0 = plan.h0().value();
  band.c = config.c;
  band.c0 = config.c0;
  band.alpha = config.alpha;
  band.B = config.B;
  band.seed = config.seed;
  return band;
}

inline ConfidenceBand confidence_band(const RegressionSample& sample,
                                      const BootstrapConfig& config,
                                      std::span<const double> ts)
{
  return confidence_band(sample, config, ts, StreamKey(config.seed));
}

} // namespace smoothboot
