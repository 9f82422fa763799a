#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// code paths being checked, except for trivially evaluating the kernel
// formula itself.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

inline double simpson_step(const std::function<double(double)>& f,
                           double a,
                           double b,
                           double fa,
                           double fm,
                           double fb,
                           double whole,
                           double tol,
                           int depth)
{
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

//! Adaptive Simpson quadrature with absolute tolerance.
inline double integrate(const std::function<double(double)>& f,
                        double a,
                        double b,
                        double tol = 1e-11)
{
  if (b <= a) {
    return 0.0;
  }
  double fa = f(a);
  double fb = f(b);
  double fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

inline double triweight(double u)
{
  return std::abs(u) <= 1.0 ? 35.0 / 32.0 * std::pow(1.0 - u * u, 3) : 0.0;
}

inline double central_diff(const std::function<double(double)>& f, double x, double step)
{
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

inline double second_diff(const std::function<double(double)>& f, double x, double step)
{
  return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
}

struct IsoResult
{
  std::vector<double> fitted;
  double sse;
};

//! Exhaustive search over all partitions of 0..n-1 into consecutive blocks;
//! keeps the block-mean fit with minimal SSE among the monotone ones.
inline IsoResult brute_force_isotonic(const std::vector<double>& ys,
                                      const std::vector<double>& weights = {})
{
  std::size_t n = ys.size();
  std::vector<double> w = weights.empty() ? std::vector<double>(n, 1.0) : weights;
  IsoResult best{ {}, std::numeric_limits<double>::infinity() };
  std::size_t cuts = n - 1;
  for (std::size_t mask = 0; mask < (std::size_t{ 1 } << cuts); ++mask) {
    std::vector<double> fit(n);
    std::size_t start = 0;
    double prev = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (std::size_t i = 0; i < n && monotone; ++i) {
      bool end = (i == n - 1) || (mask >> i & 1);
      if (!end) {
        continue;
      }
      double s = 0.0, sw = 0.0;
      for (std::size_t j = start; j <= i; ++j) {
        s += w[j] * ys[j];
        sw += w[j];
      }
      double level = s / sw;
      if (level < prev) {
        monotone = false;
      }
      for (std::size_t j = start; j <= i; ++j) {
        fit[j] = level;
      }
      prev = level;
      start = i + 1;
    }
    if (!monotone) {
      continue;
    }
    double sse = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sse += w[j] * (ys[j] - fit[j]) * (ys[j] - fit[j]);
    }
    if (sse < best.sse) {
      best = { fit, sse };
    }
  }
  return best;
}

//! Integral of K_h(t - x) f(x) dx for a right-continuous step function given
//! by knots/values (flat outside), split at the knots.
inline double smoothed_step_quadrature(const std::vector<double>& knots,
                                       const std::vector<double>& values,
                                       double h,
                                       double t)
{
  auto step = [&](double x) {
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    if (it == knots.begin()) {
      return values.front();
    }
    return values[static_cast<std::size_t>(it - knots.begin()) - 1];
  };
  std::vector<double> cuts{ t - h };
  for (double k : knots) {
    if (k > t - h && k < t + h) {
      cuts.push_back(k);
    }
  }
  cuts.push_back(t + h);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double level = step(0.5 * (cuts[i] + cuts[i + 1]));
    total += level * integrate([&](double x) { return triweight((t - x) / h) / h; },
                               cuts[i],
                               cuts[i + 1],
                               1e-12);
  }
  return total;
}

//! Random nondecreasing step function on [0,1] with the given number of jumps.
struct RandomStep
{
  std::vector<double> knots;
  std::vector<double> values;
};

inline RandomStep random_step(std::mt19937_64& gen, std::size_t points)
{
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RandomStep s;
  s.knots.resize(points);
  for (auto& k : s.knots) {
    k = unif(gen);
  }
  std::sort(s.knots.begin(), s.knots.end());
  double level = unif(gen) - 0.5;
  for (std::size_t i = 0; i < points; ++i) {
    if (unif(gen) < 0.6) {
      level += unif(gen);
    }
    s.values.push_back(level);
  }
  return s;
}

} // namespace oracle
