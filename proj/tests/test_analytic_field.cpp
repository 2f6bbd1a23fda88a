#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "maglat/analytic_field.hpp"

using namespace maglat;

namespace {

const LatticeSpec kSpec{};
constexpr long double kPiL = 3.141592653589793238462643383279503L;

// Independent evaluation of the corrected formulas in long double.
Eigen::Matrix<long double, 3, 1> corrected_oracle(const LatticeSpec& s, const BiasField& b, const Vec3& p) {
  const long double beta = kPiL / s.alpha;
  const long double b0 = 1.25663706212e-6L * s.m_z / kPiL;
  const long double k = b0 * (1.0L - std::exp(-beta * s.tau)) * std::exp(-beta * p.z());
  Eigen::Matrix<long double, 3, 1> out;
  out << k * std::sin(beta * p.x()) + b.bx, k * std::sin(beta * p.y()) + b.by,
      k * (std::cos(beta * p.x()) + std::cos(beta * p.y())) + b.bz;
  return out;
}

Vec3 random_point(std::mt19937_64& rng, double alpha) {
  std::uniform_real_distribution<double> lat(-10 * alpha, 10 * alpha), h(0.1 * alpha, 4 * alpha);
  return {lat(rng), lat(rng), h(rng)};
}

}  // namespace

TEST(FieldInfinite, ZeroMagnetizationZeroBias) {
  LatticeSpec s;
  s.m_z = 0.0;
  for (auto mode : {EquationMode::corrected, EquationMode::verbatim})
    EXPECT_EQ(field_infinite(s, {}, Vec3(1e-6, 2e-6, 3e-6), mode), Vec3::Zero());
}

TEST(FieldInfinite, OnAxisPoint) {
  const double z = 3e-6;
  const Vec3 b = field_infinite(kSpec, {}, Vec3(0, 0, z));
  const double beta = maglat::beta(kSpec);
  const double expect = 2 * b_surface(kSpec) * (1 - std::exp(-beta * kSpec.tau)) * std::exp(-beta * z);
  EXPECT_EQ(b.x(), 0.0);
  EXPECT_EQ(b.y(), 0.0);
  EXPECT_NEAR(b.z(), expect, 1e-15 * expect);
}

TEST(FieldInfinite, PeriodicUnderPitchTranslation) {
  std::mt19937_64 rng(1);
  const BiasField bias{1e-5, -2e-5, 3e-5};
  const AnalyticField f(kSpec, bias);
  const double a = kSpec.alpha;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = random_point(rng, a);
    const Vec3 b0 = f.field(p);
    for (const Vec3& t : {Vec3(2 * a, 0, 0), Vec3(0, 2 * a, 0)})
      EXPECT_LT((f.field(p + t) - b0).norm(), 1e-12 * b_surface(kSpec));
  }
}

TEST(FieldInfinite, MatchesExtendedPrecisionOracle) {
  std::mt19937_64 rng(2);
  const BiasField bias{1e-4, 0, -2e-5};
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = random_point(rng, kSpec.alpha);
    const Vec3 b = field_infinite(kSpec, bias, p);
    const auto ref = corrected_oracle(kSpec, bias, p);
    for (int c = 0; c < 3; ++c)
      EXPECT_LE(std::abs(b[c] - static_cast<double>(ref[c])), 1e-12 * static_cast<double>(ref.norm()));
  }
}

TEST(FieldInfinite, VerbatimForms) {
  const BiasField bias{1e-5, 2e-5, 3e-5};
  const Vec3 p(1.3e-6, -0.7e-6, 2.1e-6);
  const double beta = maglat::beta(kSpec), b0 = b_surface(kSpec), tau = kSpec.tau;
  const double rise = 1 - std::exp(-beta * p.z());
  const double ez = std::exp(-beta * std::abs(p.z() - tau));
  const double ys = b0 * rise * ez * std::sin(beta * p.y()) + bias.bz;
  const double zs = b0 * rise * ez * (std::cos(beta * p.x()) + std::cos(beta * p.y())) + bias.bz;
  const double sx = b0 * rise * std::sin(beta * p.x());
  const std::pair<VerbatimXFactor, double> cases[] = {
      {VerbatimXFactor::literal, std::exp(-beta * std::abs(p.x() - tau))},
      {VerbatimXFactor::abs_z_tau, ez},
      {VerbatimXFactor::exp_z, std::exp(-beta * p.z())}};
  for (const auto& [mode, factor] : cases) {
    const Vec3 b = field_infinite(kSpec, bias, p, EquationMode::verbatim, {mode});
    EXPECT_NEAR(b.x(), sx * factor + bias.bz, 1e-14 * b0);
    EXPECT_NEAR(b.y(), ys, 1e-14 * b0);
    EXPECT_NEAR(b.z(), zs, 1e-14 * b0);
  }
}

TEST(FieldInfinite, RejectsFilmSide) {
  EXPECT_THROW(field_infinite(kSpec, {}, Vec3(0, 0, 0)), DomainError);
  EXPECT_THROW(field_infinite(kSpec, {}, Vec3(0, 0, -1e-6), EquationMode::verbatim), DomainError);
}

TEST(FieldInfinite, ReflectionAndSwapSymmetry) {
  std::mt19937_64 rng(3);
  const AnalyticField f(kSpec, {});
  const double tol = 1e-14 * b_surface(kSpec);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p = random_point(rng, kSpec.alpha);
    const Vec3 b = f.field(p);
    const Vec3 m = f.field(Vec3(-p.x(), p.y(), p.z()));
    EXPECT_NEAR(m.x(), -b.x(), tol);
    EXPECT_NEAR(m.z(), b.z(), tol);
    const Vec3 s = f.field(Vec3(p.y(), p.x(), p.z()));
    EXPECT_NEAR(s.x(), b.y(), tol);
    EXPECT_NEAR(s.y(), b.x(), tol);
    EXPECT_NEAR(s.z(), b.z(), tol);
  }
}

TEST(FieldInfinite, FilmTermDecays) {
  const Vec3 b = field_infinite(kSpec, {}, Vec3(0.3e-6, 0.1e-6, 10 * kSpec.alpha));
  EXPECT_LT(b.norm(), 1e-12 * b_surface(kSpec));
}

TEST(FieldInfinite, DivergenceAndCurlFree) {
  std::mt19937_64 rng(4);
  const AnalyticField f(kSpec, {1e-4, 0, 0});
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = random_point(rng, kSpec.alpha);
    const Mat3 j = f.jacobian(p);
    const double scale = j.cwiseAbs().maxCoeff();
    EXPECT_LT(std::abs(j.trace()), 1e-12 * scale);
    EXPECT_LT((j - j.transpose()).cwiseAbs().maxCoeff(), 1e-12 * scale);
  }
}

TEST(FieldMagnitude, Basics) {
  EXPECT_EQ(field_magnitude(Vec3::Zero()), 0.0);
  EXPECT_DOUBLE_EQ(field_magnitude(Vec3(3e-4, 4e-4, 0)), 5e-4);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1e-4);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 b(g(rng), g(rng), g(rng));
    const long double ref = std::sqrt(static_cast<long double>(b.x()) * b.x() +
                                      static_cast<long double>(b.y()) * b.y() +
                                      static_cast<long double>(b.z()) * b.z());
    EXPECT_LE(std::abs(field_magnitude(b) - static_cast<double>(ref)), 1e-14 * static_cast<double>(ref));
  }
}

TEST(ZeemanPotential, Values) {
  AtomSpec a;
  EXPECT_EQ(zeeman_potential(a, 0.0), 0.0);
  a.g_f = 0.5;
  a.m_f = 2.0;
  EXPECT_DOUBLE_EQ(zeeman_potential(a, 1.0), PhysicalConstants::mu_b);
  EXPECT_THROW(zeeman_potential(a, -1e-9), DomainError);
}

TEST(ZeemanPotential, MonotoneAndLinear) {
  const AtomSpec a;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1e-3);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), y = u(rng);
    EXPECT_EQ(x < y, zeeman_potential(a, x) < zeeman_potential(a, y));
    EXPECT_NEAR(zeeman_potential(a, x + y), zeeman_potential(a, x) + zeeman_potential(a, y),
                1e-15 * zeeman_potential(a, x + y));
    EXPECT_NEAR(zeeman_potential(a, 3 * x), 3 * zeeman_potential(a, x), 1e-15 * zeeman_potential(a, 3 * x));
  }
}

TEST(GradientHessian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  const BiasField bias{1e-4, 2e-5, -1e-5};
  const AnalyticField f(kSpec, bias);
  const auto mag = [&](const Vec3& q) { return field_magnitude(f.field(q)); };
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = random_point(rng, kSpec.alpha);
    const auto gh = field_gradient_and_hessian(kSpec, bias, p);
    // Two step sizes; the smaller one should agree best.
    for (double rel : {1e-4, 1e-5}) {
      const double h = rel * kSpec.alpha;
      Vec3 fd;
      for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = h;
        fd[a] = (mag(p + e) - mag(p - e)) / (2 * h);
      }
      if (rel == 1e-5) {
        EXPECT_LT((fd - gh.gradient).norm(), 1e-6 * gh.gradient.norm() + 1e-6);
      }
    }
    EXPECT_LT((gh.hessian - gh.hessian.transpose()).cwiseAbs().maxCoeff(),
              1e-12 * gh.hessian.cwiseAbs().maxCoeff());
  }
}

TEST(GradientHessian, AnalyticHessianMatchesDifferencedGradient) {
  std::mt19937_64 rng(8);
  const BiasField bias{1e-4, 0, 0};
  const AnalyticField f(kSpec, bias);
  for (int i = 0; i < 50; ++i) {
    const Vec3 p = random_point(rng, kSpec.alpha);
    const auto gh = field_gradient_and_hessian(kSpec, bias, p);
    const double h = 1e-5 * kSpec.alpha;
    Mat3 fd;
    for (int a = 0; a < 3; ++a)
      fd.col(a) = richardson_derivative([&](const Vec3& q) { return magnitude_gradient(f, q).second; }, p, a, h);
    EXPECT_LT((fd - gh.hessian).cwiseAbs().maxCoeff(), 1e-6 * gh.hessian.cwiseAbs().maxCoeff());
  }
}

TEST(GradientHessian, VerbatimUsesDifferences) {
  const Vec3 p(0.4e-6, 1.1e-6, 2.5e-6);
  const auto gh = field_gradient_and_hessian(kSpec, {1e-4, 0, 0}, p, EquationMode::verbatim);
  EXPECT_TRUE(gh.gradient.allFinite());
  EXPECT_TRUE(gh.hessian.allFinite());
  EXPECT_LT((gh.hessian - gh.hessian.transpose()).cwiseAbs().maxCoeff(), 1e-12 * gh.hessian.norm());
}

TEST(GradientHessian, StationaryAtZeroGradientPoint) {
  // With zero bias and a pure z bias the on-axis point above a wall corner is
  // a stationary point of |B|: B_x = B_y = 0 and dB_z/dx = dB_z/dy = 0 there.
  const double a = kSpec.alpha;
  const auto gh = field_gradient_and_hessian(kSpec, {0, 0, 1e-4}, Vec3(a, a, 1.2 * a));
  EXPECT_LT(gh.gradient.head<2>().norm(), 1e-9);
}

TEST(GradientHessian, SingularAtFieldZero) {
  // At x = y = alpha/2 with cos sum = 0 and sin terms = K e^{-beta z}; bias cancels them.
  const double a = kSpec.alpha;
  const double beta = maglat::beta(kSpec);
  const double z = a;
  const double k = b_surface(kSpec) * (1 - std::exp(-beta * kSpec.tau)) * std::exp(-beta * z);
  const BiasField bias{-k, k, 0.0};
  const Vec3 p(0.5 * a, -0.5 * a, z);
  EXPECT_LT(field_magnitude(field_infinite(kSpec, bias, p)), 1e-15);
  EXPECT_THROW(field_gradient_and_hessian(kSpec, bias, p), SingularPointError);
}
