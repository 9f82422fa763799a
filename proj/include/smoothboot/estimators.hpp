#pragma once

#include "isotonic.hpp"
#include "kernel.hpp"

#include <algorithm>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace smoothboot {

//! Smoothed LSE: the LSE step function convolved with K_h, with a quadratic
//! Taylor continuation on [0,h) and (1-h,1]. The pilot bandwidth h0 only
//! enters through the curvature of that continuation.
class SlseFit
{
public:
  SlseFit(StepFunction base, Bandwidth h, Bandwidth h0)
    : base_(std::move(base))
    , jumps_(smoothboot::jumps(base_))
    , h_(h)
    , h0_(h0)
  {}

  const StepFunction& base() const { return base_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  Bandwidth h() const { return h_; }
  Bandwidth h0() const { return h0_; }

private:
  StepFunction base_;
  std::vector<Jump> jumps_;
  Bandwidth h_;
  Bandwidth h0_;
};

namespace detail {

inline bool in_interior(double t, Bandwidth h)
{
  return t >= h.value() && t <= 1.0 - h.value();
}

inline void require_interior(double t, Bandwidth h, const char* what)
{
  if (!in_interior(t, h)) {
    throw std::domain_error(what);
  }
}

} // namespace detail

//! f(0) + sum_{tau_i <= t+h} IK_h(t - tau_i) p_i on [h, 1-h].
inline double slse_at(const SlseFit& fit, double t)
{
  detail::require_interior(t, fit.h(), "use slse_boundary");
  double upper = t + fit.h().value();
  double value = fit.base().first_value();
  // Jumps below t-h contribute p exactly; the fixed summation order keeps the
  // result monotone in t under rounding.
  for (const auto& j : fit.jumps()) {
    if (j.position > upper) {
      break;
    }
    value += ikh(t - j.position, fit.h()) * j.size;
  }
  return value;
}

inline double slse_deriv_at(const SlseFit& fit, double t)
{
  detail::require_interior(t, fit.h(), "use slse_boundary");
  double lower = t - fit.h().value();
  double upper = t + fit.h().value();
  double value = 0.0;
  for (const auto& j : fit.jumps()) {
    if (j.position > upper) {
      break;
    }
    if (j.position >= lower) {
      value += kh(t - j.position, fit.h()) * j.size;
    }
  }
  return value;
}

//! Second derivative of the SLSE with bandwidth h0: sum K'_{h0}(t - tau_i) p_i.
inline double slse_second_deriv_at(const std::vector<Jump>& jumps, Bandwidth h0, double t)
{
  detail::require_interior(t, h0, "curvature point outside [h0, 1-h0]");
  double lower = t - h0.value();
  double upper = t + h0.value();
  double value = 0.0;
  for (const auto& j : jumps) {
    if (j.position > upper) {
      break;
    }
    if (j.position >= lower) {
      value += kh_prime(t - j.position, h0) * j.size;
    }
  }
  return value;
}

inline double slse_second_deriv_at(const StepFunction& base, Bandwidth h0, double t)
{
  return slse_second_deriv_at(jumps(base), h0, t);
}

//! Quadratic continuation from the seam at h (left) or 1-h (right). The
//! curvature is taken at the fixed points h0 and 1-h0 respectively.
inline double slse_boundary(const SlseFit& fit, double t)
{
  double h = fit.h().value();
  double h0 = fit.h0().value();
  if (detail::in_interior(t, fit.h()) || t < 0.0 || t > 1.0) {
    throw std::domain_error("use slse_at");
  }
  double seam = t < h ? h : 1.0 - h;
  double curvature_at = t < h ? h0 : 1.0 - h0;
  double d = t - seam;
  return slse_at(fit, seam) + d * slse_deriv_at(fit, seam) +
         0.5 * d * d * slse_second_deriv_at(fit.jumps(), fit.h0(), curvature_at);
}

inline double slse_eval(const SlseFit& fit, double t)
{
  return detail::in_interior(t, fit.h()) ? slse_at(fit, t) : slse_boundary(fit, t);
}

inline std::vector<double> slse_curve(const SlseFit& fit, std::span<const double> grid)
{
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) {
    out.push_back(slse_eval(fit, t));
  }
  return out;
}

namespace detail {

//! Calls `visit(i, weight)` for every design point with a nonzero kernel
//! weight at t (tie counts included). Interior points use K_h; boundary
//! points use the moment-matched boundary kernel, reflected at the right edge.
template<class Visit>
void nw_weights(const RegressionSample& sample, Bandwidth bw, double t, Visit&& visit)
{
  double h = bw.value();
  const auto& xs = sample.xs();
  const auto& counts = sample.counts();
  auto first = std::lower_bound(xs.begin(), xs.end(), t - h);
  auto last = std::upper_bound(xs.begin(), xs.end(), t + h);
  bool left = t < h;
  bool right = t > 1.0 - h;
  double rho = left ? t / h : (right ? (1.0 - t) / h : 1.0);
  if (left || right) {
    rho = std::clamp(rho, 0.0, 1.0);
  }
  for (auto it = first; it != last; ++it) {
    auto i = static_cast<std::size_t>(it - xs.begin());
    double u = (t - xs[i]) / h;
    double k;
    if (left) {
      k = boundary_nw_kernel(u, rho);
    } else if (right) {
      k = boundary_nw_kernel(-u, rho);
    } else {
      k = triweight(u);
    }
    if (k != 0.0) {
      visit(i, static_cast<double>(counts[i]) * k / h);
    }
  }
}

} // namespace detail

//! Nadaraya-Watson estimate with boundary kernel near 0 and 1.
inline double nw_at(const RegressionSample& sample, Bandwidth h, double t)
{
  if (t < 0.0 || t > 1.0) {
    throw std::domain_error("evaluation point outside [0,1]");
  }
  const auto& ys = sample.ys();
  double num = 0.0;
  double den = 0.0;
  bool any = false;
  detail::nw_weights(sample, h, t, [&](std::size_t i, double w) {
    num += w * ys[i];
    den += w;
    any = true;
  });
  if (!any) {
    throw std::domain_error("no data in window");
  }
  if (!(den > 0.0)) {
    throw std::domain_error("nonpositive boundary kernel weight sum");
  }
  return num / den;
}

inline std::vector<double> nw_curve(const RegressionSample& sample,
                                    Bandwidth h,
                                    std::span<const double> grid)
{
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) {
    out.push_back(nw_at(sample, h, t));
  }
  return out;
}

//! sum K_h(t-X_i)^2 / (sum K_h(t-X_i))^2 (each observation counted).
inline double nw_beta_sq(const RegressionSample& sample, Bandwidth h, double t)
{
  double sq = 0.0;
  double den = 0.0;
  bool any = false;
  const auto& counts = sample.counts();
  detail::nw_weights(sample, h, t, [&](std::size_t i, double w) {
    double per_obs = w / static_cast<double>(counts[i]);
    sq += w * per_obs;
    den += w;
    any = true;
  });
  if (!any) {
    throw std::domain_error("no data in window");
  }
  return sq / (den * den);
}

} // namespace smoothboot
