#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace smoothboot {

//! Regression data on [0,1] with strictly increasing design points.
//!
//! Each design point carries an integer multiplicity. Tied observations are
//! merged into one point holding the mean response and the tie count, which
//! leaves every least-squares and kernel-weighted objective unchanged.
class RegressionSample
{
public:
  RegressionSample(std::vector<double> xs,
                   std::vector<double> ys,
                   std::vector<std::size_t> counts = {})
    : xs_(std::move(xs))
    , ys_(std::move(ys))
    , counts_(std::move(counts))
  {
    if (xs_.empty()) {
      throw std::invalid_argument("empty input");
    }
    if (xs_.size() != ys_.size()) {
      throw std::invalid_argument("xs and ys must have equal length");
    }
    if (counts_.empty()) {
      counts_.assign(xs_.size(), 1);
    }
    if (counts_.size() != xs_.size()) {
      throw std::invalid_argument("counts must match the number of design points");
    }
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (!(xs_[i] >= 0.0 && xs_[i] <= 1.0)) {
        throw std::invalid_argument("design points must lie in [0,1]");
      }
      if (i > 0 && !(xs_[i] > xs_[i - 1])) {
        throw std::invalid_argument("design points must be strictly increasing");
      }
      if (!std::isfinite(ys_[i])) {
        throw std::invalid_argument("responses must be finite");
      }
      if (counts_[i] == 0) {
        throw std::invalid_argument("counts must be positive");
      }
    }
  }

  //! Sorts by x and merges ties (mean response, summed count).
  static RegressionSample from_unsorted(std::span<const double> xs,
                                        std::span<const double> ys)
  {
    if (xs.size() != ys.size()) {
      throw std::invalid_argument("xs and ys must have equal length");
    }
    if (xs.empty()) {
      throw std::invalid_argument("empty input");
    }
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return xs[a] < xs[b];
    });

    std::vector<double> mx, my;
    std::vector<std::size_t> mc;
    for (auto i : order) {
      if (!mx.empty() && xs[i] == mx.back()) {
        my.back() += ys[i];
        ++mc.back();
      } else {
        mx.push_back(xs[i]);
        my.push_back(ys[i]);
        mc.push_back(1);
      }
    }
    for (std::size_t k = 0; k < my.size(); ++k) {
      my[k] /= static_cast<double>(mc[k]);
    }
    return RegressionSample(std::move(mx), std::move(my), std::move(mc));
  }

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  const std::vector<std::size_t>& counts() const { return counts_; }

  //! Number of distinct design points.
  std::size_t size() const { return xs_.size(); }

  //! Number of observations (sum of counts); this is the `n` of all rates.
  std::size_t observations() const
  {
    return std::accumulate(counts_.begin(), counts_.end(), std::size_t{ 0 });
  }

  bool unit_counts() const
  {
    return std::all_of(counts_.begin(), counts_.end(), [](auto c) { return c == 1; });
  }

private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<std::size_t> counts_;
};

struct Jump
{
  double position;
  double size;
};

//! Right-continuous nondecreasing step function with flat extension outside
//! its knots.
class StepFunction
{
public:
  StepFunction(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots))
    , values_(std::move(values))
  {
    if (knots_.empty() || knots_.size() != values_.size()) {
      throw std::invalid_argument("step function needs equal, nonzero numbers of knots and values");
    }
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (!(knots_[i] > knots_[i - 1])) {
        throw std::invalid_argument("knots must be strictly increasing");
      }
      if (values_[i] < values_[i - 1]) {
        throw std::invalid_argument("step function values must be nondecreasing");
      }
    }
  }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  double first_value() const { return values_.front(); }
  double last_value() const { return values_.back(); }

private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

inline double eval_step(const StepFunction& f, double x)
{
  const auto& knots = f.knots();
  auto it = std::upper_bound(knots.begin(), knots.end(), x);
  if (it == knots.begin()) {
    return f.first_value();
  }
  return f.values()[static_cast<std::size_t>(it - knots.begin()) - 1];
}

//! Jump locations and (strictly positive) jump sizes.
inline std::vector<Jump> jumps(const StepFunction& f)
{
  std::vector<Jump> out;
  const auto& v = f.values();
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) {
      out.push_back({ f.knots()[i], v[i] - v[i - 1] });
    }
  }
  return out;
}

//! Monotone least-squares fit by weighted pool-adjacent-violators.
//! The fitted level of each block is the (count-weighted) mean of its
//! responses, i.e. the left slope of the greatest convex minorant of the
//! cumulative-sum diagram.
inline StepFunction fit_lse(const RegressionSample& sample)
{
  struct Block
  {
    double sum;
    double weight;
    std::size_t points;
    double level() const { return sum / weight; }
  };

  const auto& ys = sample.ys();
  const auto& counts = sample.counts();
  std::vector<Block> stack;
  stack.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    auto w = static_cast<double>(counts[i]);
    stack.push_back({ ys[i] * w, w, 1 });
    while (stack.size() > 1 &&
           stack[stack.size() - 2].level() > stack.back().level()) {
      Block top = stack.back();
      stack.pop_back();
      stack.back().sum += top.sum;
      stack.back().weight += top.weight;
      stack.back().points += top.points;
    }
  }

  std::vector<double> values;
  values.reserve(ys.size());
  for (const auto& b : stack) {
    values.insert(values.end(), b.points, b.level());
  }
  return StepFunction(sample.xs(), std::move(values));
}

} // namespace smoothboot
