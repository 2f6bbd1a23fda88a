#pragma once

// Derivatives of |B| for any field source.
//
// A field source exposes field(p) and length_scale(). It may additionally
// provide an analytic jacobian(p) (J(i, j) = dB_i/dx_j) and
// second_derivatives(p) (array of three Hessians, one per component). Missing
// derivatives fall back to Richardson-extrapolated central differences.

#include <array>
#include <cmath>
#include <concepts>

#include "maglat/errors.hpp"
#include "maglat/types.hpp"

namespace maglat {

template <class F>
concept FieldSource = requires(const F& f, const Vec3& p) {
  { f.field(p) } -> std::convertible_to<Vec3>;
  { f.length_scale() } -> std::convertible_to<double>;
};

template <class F>
concept HasJacobian = FieldSource<F> && requires(const F& f, const Vec3& p) {
  { f.jacobian(p) } -> std::convertible_to<Mat3>;
};

template <class F>
concept HasSecondDerivatives = HasJacobian<F> && requires(const F& f, const Vec3& p) {
  { f.second_derivatives(p) } -> std::convertible_to<std::array<Mat3, 3>>;
  { f.has_second_derivatives() } -> std::convertible_to<bool>;
};

/// Relative step for first derivatives of B.
inline constexpr double kGradientStep = 1e-6;
/// Relative step for differencing an analytic gradient into a Hessian.
inline constexpr double kHessianStep = 1e-4;
/// Below this magnitude (T) the norm is treated as singular.
inline constexpr double kSingularField = 1e-15;

/// Richardson-extrapolated central difference of a vector-valued function.
template <class Fn>
auto richardson_derivative(const Fn& fn, const Vec3& p, int axis, double h) {
  Vec3 e = Vec3::Zero();
  e[axis] = h;
  const auto d1 = ((fn(p + e) - fn(p - e)) / (2.0 * h)).eval();
  const auto d2 = ((fn(p + 0.5 * e) - fn(p - 0.5 * e)) / h).eval();
  return ((4.0 * d2 - d1) / 3.0).eval();
}

template <FieldSource F>
Mat3 jacobian_of(const F& f, const Vec3& p) {
  if constexpr (HasJacobian<F>) {
    return f.jacobian(p);
  } else {
    const double h = kGradientStep * f.length_scale();
    Mat3 j;
    for (int a = 0; a < 3; ++a)
      j.col(a) = richardson_derivative([&](const Vec3& q) { return Vec3(f.field(q)); }, p, a, h);
    return j;
  }
}

struct MagnitudeDerivatives {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

/// Value and gradient of |B| (no Hessian).
template <FieldSource F>
std::pair<double, Vec3> magnitude_gradient(const F& f, const Vec3& p) {
  const Vec3 b = f.field(p);
  const double mag = std::hypot(b[0], b[1], b[2]);
  if (mag < kSingularField) throw SingularPointError("|B| vanishes at evaluation point");
  const Mat3 j = jacobian_of(f, p);
  return {mag, j.transpose() * b / mag};
}

/// Value, gradient and Hessian of |B|.
template <FieldSource F>
MagnitudeDerivatives magnitude_derivatives(const F& f, const Vec3& p) {
  MagnitudeDerivatives out;
  const Vec3 b = f.field(p);
  out.value = std::hypot(b[0], b[1], b[2]);
  if (out.value < kSingularField) throw SingularPointError("|B| vanishes at evaluation point");
  const Mat3 j = jacobian_of(f, p);
  out.gradient = j.transpose() * b / out.value;
  if constexpr (HasSecondDerivatives<F>) {
    if (f.has_second_derivatives()) {
      const auto second = f.second_derivatives(p);
      Mat3 h = j.transpose() * j;
      for (int i = 0; i < 3; ++i) h += b[i] * second[i];
      out.hessian = (h - out.gradient * out.gradient.transpose()) / out.value;
      out.hessian = (0.5 * (out.hessian + out.hessian.transpose())).eval();
      return out;
    }
  }
  const double h = kHessianStep * f.length_scale();
  auto grad = [&](const Vec3& q) { return magnitude_gradient(f, q).second; };
  Mat3 hess;
  for (int a = 0; a < 3; ++a) hess.col(a) = richardson_derivative(grad, p, a, h);
  out.hessian = 0.5 * (hess + hess.transpose());
  return out;
}

}  // namespace maglat
