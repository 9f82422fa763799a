#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace smoothboot {

//! Kernel scale, restricted to (0, 1/2) so that the interior [h, 1-h] is
//! nonempty and the two boundary regions do not overlap.
class Bandwidth
{
public:
  explicit Bandwidth(double h)
    : h_(h)
  {
    if (!(h > 0.0 && h < 0.5)) {
      throw std::invalid_argument("bandwidth must lie in (0, 0.5), got " +
                                  std::to_string(h));
    }
  }

  double value() const { return h_; }

private:
  double h_;
};

//! Rate exponents of the main and the pilot bandwidth. The pilot must shrink
//! strictly slower than the main bandwidth for its second derivative to be
//! consistent.
inline constexpr double main_bandwidth_exponent = -1.0 / 5.0;
inline constexpr double pilot_bandwidth_exponent = -1.0 / 9.0;
static_assert(pilot_bandwidth_exponent > main_bandwidth_exponent);

//! Bandwidth constants: h = c n^(-1/5), h0 = c0 n^(-1/9).
class BandwidthPlan
{
public:
  BandwidthPlan(double c, double c0, std::size_t n)
    : c_(c)
    , c0_(c0)
    , n_(n)
  {
    if (!(c > 0.0) || !(c0 > 0.0)) {
      throw std::invalid_argument("bandwidth constants must be positive");
    }
    if (n == 0) {
      throw std::invalid_argument("sample size must be positive");
    }
    // validates both
    (void)h();
    (void)h0();
  }

  double c() const { return c_; }
  double c0() const { return c0_; }
  std::size_t n() const { return n_; }

  Bandwidth h() const
  {
    return Bandwidth(c_ * std::pow(static_cast<double>(n_), main_bandwidth_exponent));
  }
  Bandwidth h0() const
  {
    return Bandwidth(c0_ * std::pow(static_cast<double>(n_), pilot_bandwidth_exponent));
  }

private:
  double c_;
  double c0_;
  std::size_t n_;
};

//! Triweight kernel (35/32)(1-u^2)^3 on [-1,1].
inline double triweight(double u)
{
  if (std::abs(u) > 1.0) {
    return 0.0;
  }
  double v = 1.0 - u * u;
  return 35.0 / 32.0 * v * v * v;
}

inline double triweight_prime(double u)
{
  if (std::abs(u) > 1.0) {
    return 0.0;
  }
  double v = 1.0 - u * u;
  return -105.0 / 16.0 * u * v * v;
}

namespace detail {

//! Upper tail mass of the triweight kernel on [y, 1], 0 <= y <= 1.
inline double triweight_tail(double y)
{
  double s = 1.0 - y;
  double s2 = s * s;
  return s2 * s2 * (((5.0 * y + 20.0) * y + 29.0) * y + 16.0) / 32.0;
}

} // namespace detail

//! Integrated triweight kernel, i.e. its distribution function. Evaluated
//! through the tail so that it is accurate (and monotone) near the support
//! ends.
inline double ik(double y)
{
  if (y <= -1.0) {
    return 0.0;
  }
  if (y >= 1.0) {
    return 1.0;
  }
  if (y < 0.0) {
    return detail::triweight_tail(-y);
  }
  return 1.0 - detail::triweight_tail(y);
}

inline double kh(double y, Bandwidth h)
{
  return triweight(y / h.value()) / h.value();
}

inline double kh_prime(double y, Bandwidth h)
{
  double s = h.value();
  return triweight_prime(y / s) / (s * s);
}

inline double ikh(double y, Bandwidth h)
{
  return ik(y / h.value());
}

//! Partial moments a_j(rho) = int_{-1}^{rho} u^j K(u) du, j = 0, 1, 2.
struct PartialMoments
{
  double a0;
  double a1;
  double a2;
};

inline PartialMoments triweight_partial_moments(double rho)
{
  double r2 = rho * rho;
  double v = 1.0 - r2;
  double v2 = v * v;
  double r3 = r2 * rho;
  // antiderivative of u^2 (1-u^2)^3
  double p = r3 * (1.0 / 3.0 + r2 * (-3.0 / 5.0 + r2 * (3.0 / 7.0 - r2 / 9.0)));
  return { ik(rho),
           -35.0 / 256.0 * v2 * v2,
           35.0 / 32.0 * (p + 16.0 / 315.0) };
}

//! Boundary kernel for the left edge: the combination of K(u) and uK(u)
//! supported on [-1, rho] whose zeroth moment is 1 and first moment is 0.
inline double boundary_nw_kernel(double u, double rho)
{
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::domain_error("boundary kernel needs rho in [0,1]");
  }
  if (u > rho) {
    return 0.0;
  }
  auto [a0, a1, a2] = triweight_partial_moments(rho);
  double det = a0 * a2 - a1 * a1;
  if (!(det > 0.0)) {
    throw std::domain_error("degenerate boundary kernel moment matrix");
  }
  return (a2 - a1 * u) * triweight(u) / det;
}

} // namespace smoothboot
