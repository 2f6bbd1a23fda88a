#pragma once

#include <numbers>

namespace maglat {

/// CODATA 2018 values, SI units.
struct PhysicalConstants {
  static constexpr double mu0 = 1.25663706212e-6;     // T m / A
  static constexpr double mu_b = 9.2740100783e-24;    // J / T
  static constexpr double hbar = 1.054571817e-34;     // J s
  static constexpr double g_n = 9.80665;              // m / s^2
  static constexpr double pi = std::numbers::pi;
};

}  // namespace maglat
