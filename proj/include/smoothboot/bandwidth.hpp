#pragma once

#include "bootstrap_ci.hpp"
#include "estimators.hpp"
#include "kernel.hpp"
#include "rng.hpp"

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace smoothboot {

//! Result of the bootstrap MISE search over h = c n^(-1/5).
struct BandwidthSelection
{
  std::vector<double> c_grid;
  std::vector<double> scores;
  double chosen_c = 0.0;
  double h = 0.0;
  double pilot_c0 = 0.0;
  double h0 = 0.0;
  std::size_t B = 0;
  std::uint64_t seed = 0;
};

//! Evaluation points t_1 < ... < t_m of a grid 0 = t_0 < t_1 < ... < t_m = 1
//! together with the widths t_i - t_{i-1}.
struct MiseGrid
{
  std::vector<double> ts;
  std::vector<double> widths;

  //! t_i = i/m, i = 1..m.
  static MiseGrid uniform(std::size_t m)
  {
    if (m == 0) {
      throw std::invalid_argument("MISE grid needs at least one point");
    }
    MiseGrid g;
    for (std::size_t i = 1; i <= m; ++i) {
      g.ts.push_back(static_cast<double>(i) / static_cast<double>(m));
      g.widths.push_back(1.0 / static_cast<double>(m));
    }
    return g;
  }

  //! Takes the evaluation points; t_0 = 0 is implicit.
  static MiseGrid from_points(std::span<const double> ts)
  {
    if (ts.empty()) {
      throw std::invalid_argument("MISE grid needs at least one point");
    }
    MiseGrid g;
    double prev = 0.0;
    for (double t : ts) {
      if (!(t > prev) || t > 1.0) {
        throw std::invalid_argument("MISE grid must be strictly increasing in (0,1]");
      }
      g.ts.push_back(t);
      g.widths.push_back(t - prev);
      prev = t;
    }
    return g;
  }
};

namespace detail {

//! Integrated squared bootstrap difference for replication `key`.
inline double replicate_ise(const ResamplingModel& model,
                            Bandwidth h,
                            const MiseGrid& grid,
                            std::span<const double> pilot_ts,
                            StreamKey key)
{
  Resample r = model.draw(key);
  std::vector<double> est =
    estimator_curve(r.sample, Estimator::slse, h, model.h0(), grid.ts);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.ts.size(); ++i) {
    double d = est[i] - pilot_ts[i];
    sum += d * d * grid.widths[i];
  }
  return sum;
}

inline double mise_hat(const ResamplingModel& model,
                       Bandwidth h,
                       std::size_t B,
                       const MiseGrid& grid,
                       StreamKey key,
                       unsigned threads)
{
  std::vector<double> pilot_ts = model.pilot(grid.ts);
  std::vector<double> per_rep(B);
  parallel_for(B, threads, [&](std::size_t b) {
    per_rep[b] = replicate_ise(model, h, grid, pilot_ts, key.child(b));
  });
  double total = 0.0;
  for (double v : per_rep) {
    total += v;
  }
  return total / static_cast<double>(B);
}

inline void require_replications(std::size_t B)
{
  if (B == 0) {
    throw std::invalid_argument("B must be positive");
  }
}

} // namespace detail

//! B^-1 sum_b (f*_{nh}(t) - f_{nh0}(t))^2, replication b from substream (seed, b).
inline double mse_hat_point(const RegressionSample& sample,
                            double t,
                            double c,
                            double c0,
                            std::size_t B,
                            std::uint64_t seed,
                            unsigned threads = 0)
{
  detail::require_replications(B);
  BandwidthPlan plan(c, c0, sample.observations());
  detail::ResamplingModel model(sample, Estimator::slse, plan.h0());
  BootstrapConfig config;
  config.B = B;
  config.threads = threads;
  config.estimator = Estimator::slse;
  std::vector<double> ts{ t };
  DiffMatrix diffs = detail::bootstrap_diffs(model, config, plan.h(), ts, StreamKey(seed));
  double sum = 0.0;
  for (double d : diffs.data) {
    sum += d * d;
  }
  return sum / static_cast<double>(B);
}

//! B^-1 sum_b sum_i (f*_{nh}(t_i) - f_{nh0}(t_i))^2 (t_i - t_{i-1}).
inline double mise_hat(const RegressionSample& sample,
                       double c,
                       double c0,
                       std::size_t B,
                       const MiseGrid& grid,
                       std::uint64_t seed,
                       unsigned threads = 0)
{
  detail::require_replications(B);
  BandwidthPlan plan(c, c0, sample.observations());
  detail::ResamplingModel model(sample, Estimator::slse, plan.h0());
  return detail::mise_hat(model, plan.h(), B, grid, StreamKey(seed), threads);
}

//! Minimizes the bootstrap MISE over c_grid. Each c draws its replications
//! from its own substreams (seed, c, b), so equal c values score equally;
//! ties go to the smallest c, then to the first occurrence.
inline BandwidthSelection select_c(const RegressionSample& sample,
                                   std::span<const double> c_grid,
                                   double c0,
                                   std::size_t B,
                                   const MiseGrid& grid,
                                   std::uint64_t seed,
                                   unsigned threads = 0)
{
  if (c_grid.empty()) {
    throw std::invalid_argument("empty c grid");
  }
  detail::require_replications(B);
  std::size_t n = sample.observations();
  std::vector<Bandwidth> hs;
  hs.reserve(c_grid.size());
  for (double c : c_grid) {
    hs.push_back(BandwidthPlan(c, c0, n).h());
  }
  Bandwidth h0 = BandwidthPlan(c_grid.front(), c0, n).h0();
  detail::ResamplingModel model(sample, Estimator::slse, h0);
  std::vector<double> pilot_ts = model.pilot(grid.ts);

  StreamKey root(seed);
  std::vector<double> cells(c_grid.size() * B);
  parallel_for(cells.size(), threads, [&](std::size_t cell) {
    std::size_t k = cell / B;
    std::size_t b = cell % B;
    StreamKey key = root.child(std::bit_cast<std::uint64_t>(c_grid[k])).child(b);
    cells[cell] = detail::replicate_ise(model, hs[k], grid, pilot_ts, key);
  });

  BandwidthSelection sel;
  sel.c_grid.assign(c_grid.begin(), c_grid.end());
  sel.scores.resize(c_grid.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < c_grid.size(); ++k) {
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      total += cells[k * B + b];
    }
    sel.scores[k] = total / static_cast<double>(B);
    if (sel.scores[k] < sel.scores[best] ||
        (sel.scores[k] == sel.scores[best] && c_grid[k] < c_grid[best])) {
      best = k;
    }
  }
  sel.chosen_c = c_grid[best];
  sel.h = hs[best].value();
  sel.pilot_c0 = c0;
  sel.h0 = h0.value();
  sel.B = B;
  sel.seed = seed;
  return sel;
}

} // namespace smoothboot
