#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "maglat/schrodinger1d.hpp"

using namespace maglat;

namespace {

const AtomSpec kAtom{};
constexpr double kHbar = PhysicalConstants::hbar;

PotentialCurve1D make_curve(double lo, double hi, std::size_t n, const std::function<double(double)>& u) {
  PotentialCurve1D c;
  c.coords.resize(n);
  c.energies.resize(n);
  const double h = (hi - lo) / double(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    c.coords[i] = lo + h * double(i);
    c.energies[i] = u(c.coords[i]);
  }
  return c;
}

// Potential sampled symmetrically about the midpoint index.
PotentialCurve1D symmetric_curve(double half, std::size_t n, const std::function<double(double)>& u) {
  PotentialCurve1D c;
  c.coords.resize(n);
  c.energies.resize(n);
  const double h = 2 * half / double(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    c.coords[i] = h * double(i);
    c.energies[i] = u((double(i) - 0.5 * double(n - 1)) * h);
  }
  return c;
}

// Dense finite-difference Hamiltonian on the interior nodes, physical units.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense_solve(const PotentialCurve1D& c) {
  const Eigen::Index m = Eigen::Index(c.coords.size()) - 2;
  const double h = c.spacing();
  const double t = kHbar * kHbar / (2 * kAtom.mass * h * h);
  Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    hm(i, i) = 2 * t + c.energies[std::size_t(i + 1)];
    if (i + 1 < m) hm(i, i + 1) = hm(i + 1, i) = -t;
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hm);
}

// Energy unit for 1 um features.
constexpr double kX0 = 1e-6;
const double kEps = kHbar * kHbar / (kAtom.mass * kX0 * kX0);

double quartic_well(double x, double v0) {
  const double r = (x / kX0) * (x / kX0) - 1.0;
  return v0 * r * r;
}

struct ScalarField {
  std::function<double(const Vec3&)> mag;
  double length_scale() const { return 5e-6; }
  Vec3 field(const Vec3& p) const { return Vec3(0, 0, mag(p)); }
};

}  // namespace

TEST(Eigensolve, SquareWell) {
  const double len = 10e-6;
  const auto c = make_curve(0.0, len, 4096, [](double) { return 0.0; });
  const auto r = eigensolve(c, kAtom, 8);
  for (int n = 1; n <= 8; ++n) {
    const double exact = n * n * PhysicalConstants::pi * PhysicalConstants::pi * kHbar * kHbar /
                         (2 * kAtom.mass * len * len);
    EXPECT_NEAR(r.energies[std::size_t(n - 1)], exact, 1e-4 * exact);
  }
}

TEST(Eigensolve, HarmonicWell) {
  const double w = 2 * PhysicalConstants::pi * 1000;
  const double a = std::sqrt(kHbar / (kAtom.mass * w));
  const auto c = make_curve(-12 * a, 12 * a, 2048, [&](double x) { return 0.5 * kAtom.mass * w * w * x * x; });
  const auto r = eigensolve(c, kAtom, 9);
  for (int n = 0; n <= 8; ++n) {
    const double exact = kHbar * w * (n + 0.5);
    EXPECT_NEAR(r.energies[std::size_t(n)], exact, 1e-3 * exact) << n;
  }
}

TEST(Eigensolve, SecondOrderConvergence) {
  const double w = 2 * PhysicalConstants::pi * 500;
  const double a = std::sqrt(kHbar / (kAtom.mass * w));
  const auto u = [&](double x) { return 0.5 * kAtom.mass * w * w * x * x; };
  const double exact = 0.5 * kHbar * w;
  const double e1 = eigensolve(make_curve(-10 * a, 10 * a, 257, u), kAtom, 1).energies[0] - exact;
  const double e2 = eigensolve(make_curve(-10 * a, 10 * a, 513, u), kAtom, 1).energies[0] - exact;
  const double ratio = e1 / e2;
  EXPECT_GE(ratio, 3.0);
  EXPECT_LE(ratio, 5.0);
}

TEST(Eigensolve, MatchesDenseSolver) {
  const auto c = make_curve(-3 * kX0, 3 * kX0, 1024, [](double x) { return quartic_well(x, 10 * kEps) + 0.3 * kEps * x / kX0; });
  const auto r = eigensolve(c, kAtom, 10);
  const auto dense = dense_solve(c);
  const double h = c.spacing();
  for (int j = 0; j < 10; ++j) {
    const double ref = dense.eigenvalues()[j];
    EXPECT_NEAR(r.energies[std::size_t(j)], ref, 1e-5 * std::abs(ref)) << j;
    const Eigen::VectorXd psi = r.wavefunctions.col(j).segment(1, Eigen::Index(c.coords.size()) - 2);
    const double overlap = std::abs(psi.dot(dense.eigenvectors().col(j))) * std::sqrt(h);
    EXPECT_NEAR(overlap, 1.0, 1e-8) << j;
  }
}

TEST(Eigensolve, OrthonormalAndOrdered) {
  const auto c = make_curve(-3 * kX0, 3 * kX0, 1500, [](double x) { return quartic_well(x, 6 * kEps) + 1e-29; });
  const auto r = eigensolve(c, kAtom, 12);
  const double h = c.spacing();
  const Eigen::MatrixXd g = r.wavefunctions.transpose() * r.wavefunctions * h;
  EXPECT_LT((g - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-10);
  const double umin = *std::min_element(c.energies.begin(), c.energies.end());
  EXPECT_GT(r.energies[0], umin);
  for (std::size_t j = 1; j < r.energies.size(); ++j) EXPECT_GT(r.energies[j], r.energies[j - 1]);
  EXPECT_EQ(r.wavefunctions(0, 0), 0.0);
  EXPECT_EQ(r.wavefunctions(Eigen::Index(c.coords.size()) - 1, 3), 0.0);
}

TEST(Eigensolve, ParityOfSymmetricWell) {
  const auto c = symmetric_curve(3 * kX0, 1201, [](double x) { return quartic_well(x, 8 * kEps); });
  const auto r = eigensolve(c, kAtom, 6);
  for (int j = 0; j < 6; ++j) {
    const Eigen::VectorXd p = r.wavefunctions.col(j);
    const double sign = j % 2 == 0 ? 1.0 : -1.0;
    EXPECT_LT((p - sign * p.reverse()).cwiseAbs().maxCoeff(), 1e-8 * p.cwiseAbs().maxCoeff()) << j;
  }
}

TEST(Eigensolve, InvalidInputs) {
  const auto good = make_curve(0, 1e-5, 256, [](double) { return 0.0; });
  EXPECT_THROW(eigensolve(good, kAtom, 0), ConfigError);
  EXPECT_THROW(eigensolve(good, kAtom, 64), ConfigError);
  EXPECT_NO_THROW(eigensolve(good, kAtom, 63));
  EXPECT_THROW(eigensolve(make_curve(0, 1e-5, 32, [](double) { return 0.0; }), kAtom, 2), ShapeError);
  auto bad = good;
  bad.energies.pop_back();
  EXPECT_THROW(eigensolve(bad, kAtom, 2), ShapeError);
  bad = good;
  bad.energies[10] = NAN;
  EXPECT_THROW(eigensolve(bad, kAtom, 2), ShapeError);
  bad = good;
  bad.coords[100] += 0.3 * good.spacing();
  EXPECT_THROW(eigensolve(bad, kAtom, 2), ShapeError);
  bad = good;
  std::swap(bad.coords[5], bad.coords[6]);
  EXPECT_THROW(eigensolve(bad, kAtom, 2), ShapeError);
}

TEST(InteriorMinima, CountsPlateauOnce) {
  EXPECT_EQ(interior_minima({3, 1, 2, 0, 0, 0, 4}).size(), 2u);
  EXPECT_EQ(interior_minima({0, 1, 2, 3}).size(), 0u);
  EXPECT_EQ(interior_minima({3, 2, 2, 1}).size(), 0u);
  EXPECT_EQ(interior_minima({2, 1, 1, 2}), std::vector<std::size_t>{1});
}

TEST(Tunneling, SymmetricDoubleWell) {
  const auto c = symmetric_curve(3 * kX0, 1025, [](double x) { return quartic_well(x, 10 * kEps); });
  const auto t = tunneling_splitting(c, kAtom);
  EXPECT_TRUE(t.symmetric);
  EXPECT_TRUE(t.parity_ok);
  EXPECT_GT(t.delta_e, 0.0);
  EXPECT_DOUBLE_EQ(t.j_hop, 0.5 * t.delta_e);
  const auto dense = dense_solve(c);
  const double ref = 0.5 * (dense.eigenvalues()[1] - dense.eigenvalues()[0]);
  EXPECT_NEAR(t.j_hop, ref, 1e-5 * ref);
}

TEST(Tunneling, HigherBarrierSuppressesSplitting) {
  const auto low = symmetric_curve(3 * kX0, 1025, [](double x) { return quartic_well(x, 10 * kEps); });
  const auto high = symmetric_curve(3 * kX0, 1025, [](double x) { return quartic_well(x, 1000 * kEps); });
  const double dl = tunneling_splitting(low, kAtom).delta_e;
  const double dh = tunneling_splitting(high, kAtom).delta_e;
  EXPECT_LE(dh, 0.1 * dl);
}

TEST(Tunneling, AsymmetricWellSkipsParity) {
  const auto c = make_curve(-3 * kX0, 3 * kX0, 1024, [](double x) { return quartic_well(x, 10 * kEps) + 0.5 * kEps * x / kX0; });
  const auto t = tunneling_splitting(c, kAtom);
  EXPECT_FALSE(t.symmetric);
  EXPECT_FALSE(t.parity_ok);
  EXPECT_GT(t.delta_e, 0.0);
}

TEST(Tunneling, RequiresDoubleWell) {
  const auto single = make_curve(-3 * kX0, 3 * kX0, 512, [](double x) { return kEps * x * x / (kX0 * kX0); });
  EXPECT_THROW(tunneling_splitting(single, kAtom), ShapeError);
  const auto triple = make_curve(-3 * kX0, 3 * kX0, 512, [](double x) { return kEps * (1 + std::cos(3 * PhysicalConstants::pi * x / kX0)); });
  EXPECT_THROW(tunneling_splitting(triple, kAtom), ShapeError);
}

TEST(Hubbard, ZeroScatteringLength) {
  AtomSpec a = kAtom;
  a.a_s = 0.0;
  EXPECT_EQ(hubbard_u_estimate(Vec3(1e4, 2e4, 3e4), a), 0.0);
}

TEST(Hubbard, FrequencyScaling) {
  const Vec3 w(2.3e4, 4.1e4, 8.7e4);
  const double u1 = hubbard_u_estimate(w, kAtom);
  const double u2 = hubbard_u_estimate(2.0 * w, kAtom);
  EXPECT_NEAR(u2 / u1, std::pow(2.0, 1.5), 1e-12);
  EXPECT_NEAR(hubbard_u_estimate(Vec3(2 * w[0], w[1], w[2]), kAtom) / u1, std::sqrt(2.0), 1e-12);
}

TEST(Hubbard, MatchesSeparableQuadrature) {
  const Vec3 w(2.3e4, 4.1e4, 8.7e4);
  const double g = 4 * PhysicalConstants::pi * kHbar * kHbar * kAtom.a_s / kAtom.mass;
  double prod = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double a = std::sqrt(kHbar / (kAtom.mass * w[i]));
    const int n = 128;
    const double lo = -8 * a, h = 16 * a / (n - 1);
    double s = 0;
    for (int k = 0; k < n; ++k) {
      const double x = lo + h * k;
      const double psi2 = std::exp(-x * x / (a * a)) / (std::sqrt(PhysicalConstants::pi) * a);
      s += (k == 0 || k == n - 1 ? 0.5 : 1.0) * psi2 * psi2 * h;
    }
    prod *= s;
  }
  const double u = hubbard_u_estimate(w, kAtom);
  EXPECT_NEAR(u, g * prod, 1e-6 * u);
  TrapSite site;
  site.frequencies = w;
  EXPECT_EQ(hubbard_u_estimate(site, kAtom), u);
}

TEST(Hubbard, RejectsNonPositiveFrequency) {
  EXPECT_THROW(hubbard_u_estimate(Vec3(1e4, 0.0, 1e4), kAtom), DomainError);
  EXPECT_THROW(hubbard_u_estimate(Vec3(1e4, -1.0, 1e4), kAtom), DomainError);
}

TEST(AxisPotential, SymmetricSyntheticBond) {
  const double a = 5e-6, z0 = 7e-6, b0 = 1e-4, k = 1e-5 / std::pow(a, 4), q = 4e5;
  const ScalarField f{[=](const Vec3& p) {
    const double x2 = p.x() * p.x() - a * a;
    return b0 + k * x2 * x2 + q * (p.y() * p.y() + (p.z() - z0) * (p.z() - z0));
  }};
  TrapSite sa, sb;
  sa.position = Vec3(-a, 0, z0);
  sb.position = Vec3(a, 0, z0);
  AxisPotentialOptions opt;
  opt.barrier.samples = 257;
  const auto ap = extract_axis_potential(f, kAtom, sa, sb, opt);
  const auto& e = ap.curve.energies;
  ASSERT_EQ(e.size(), 1024u);
  EXPECT_NO_THROW(validate_curve(ap.curve));
  EXPECT_NEAR(ap.curve.coords.back(), 2.8 * a, 1e-12 * a);
  EXPECT_NEAR(ap.s_a, 0.4 * a, 1e-12 * a);
  EXPECT_NEAR(ap.s_b, 2.4 * a, 1e-12 * a);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(e[i], e[e.size() - 1 - i], 1e-10 * e[i]);
  const auto mins = interior_minima(e);
  ASSERT_EQ(mins.size(), 2u);
  const double h = ap.curve.spacing();
  EXPECT_NEAR(ap.curve.coords[mins[0]], ap.s_a, h);
  EXPECT_NEAR(ap.curve.coords[mins[1]], ap.s_b, h);
  // Curve top between the sites agrees with the barrier summit.
  const double top = *std::max_element(e.begin() + long(mins[0]), e.begin() + long(mins[1]));
  const double summit = zeeman_potential(kAtom, b0 + k * std::pow(a, 4));
  EXPECT_NEAR(top, summit, 1e-6 * summit);

  AxisPotentialOptions grav = opt;
  grav.include_gravity = true;
  const auto ag = extract_axis_potential(f, kAtom, sa, sb, grav);
  const double mgz = kAtom.mass * PhysicalConstants::g_n * z0;
  for (std::size_t i = 0; i < e.size(); i += 37) EXPECT_NEAR(ag.curve.energies[i] - e[i], mgz, 1e-9 * mgz);
}

TEST(AxisPotential, TooFewPoints) {
  const ScalarField f{[](const Vec3&) { return 1e-4; }};
  TrapSite sa, sb;
  sa.position = Vec3(0, 0, 5e-6);
  sb.position = Vec3(1e-5, 0, 5e-6);
  AxisPotentialOptions opt;
  opt.n_points = 128;
  EXPECT_THROW(extract_axis_potential(f, kAtom, sa, sb, opt), ConfigError);
}
