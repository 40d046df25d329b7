#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace pks;
using testing_support::from_vector;
using testing_support::max_diff;
using testing_support::noise;
using testing_support::to_vector;

TEST(Grid, LayoutAndWavenumbers) {
  const TorusGrid g(2, 16);
  EXPECT_DOUBLE_EQ(g.spacing() * 16, kTwoPi);
  EXPECT_EQ(g.size(), 256u);
  EXPECT_EQ(g.spectral_size(), 9u * 16u);
  EXPECT_EQ(g.wavenumber(8), 8);
  EXPECT_EQ(g.wavenumber(9), -7);
  EXPECT_EQ(g.wavenumber(15), -1);
  EXPECT_THROW(TorusGrid(2, 7), Error);
  EXPECT_THROW(TorusGrid(2, 6), Error);
  EXPECT_THROW(TorusGrid(4, 16), Error);
}

TEST(Transform, ConstantFieldHasOnlyMeanMode) {
  const TorusGrid g(2, 16);
  const Spectrum s = to_spectral(Field(g, 1.0));
  EXPECT_NEAR(s[0].real(), 1.0, 1e-13);
  for (std::size_t k = 1; k < s.size(); ++k) EXPECT_LT(std::abs(s[k]), 1e-13);
}

TEST(Transform, CosYIsTwoHalfModes) {
  const TorusGrid g(2, 16);
  const Spectrum s = to_spectral(Field::sample(g, [](double, double y, double) { return std::cos(y); }));
  EXPECT_NEAR(std::abs(s.coefficient(0, 1) - Complex(0.5, 0)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(s.coefficient(0, -1) - Complex(0.5, 0)), 0.0, 1e-13);
  double rest = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto kv = g.wavevector(k);
    if (!(kv[0] == 0 && std::abs(kv[1]) == 1)) rest = std::max(rest, std::abs(s[k]));
  }
  EXPECT_LT(rest, 1e-13);
}

TEST(Transform, MatchesNaiveDft) {
  std::mt19937_64 rng(3);
  for (int dim : {1, 2, 3}) {
    const TorusGrid g(dim, 8);
    const auto v = oracle::uniform_samples(rng, g.size());
    const Spectrum s = to_spectral(from_vector(g, v));
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto kv = g.wavevector(k);
      EXPECT_LT(std::abs(s[k] - oracle::dft_coefficient(v, dim, 8, kv[0], kv[1], kv[2])), 1e-14)
          << "dim " << dim << " slot " << k;
    }
  }
}

TEST(Transform, HermitianPartnersAreConjugate) {
  std::mt19937_64 rng(4);
  const TorusGrid g(3, 8);
  const auto v = oracle::uniform_samples(rng, g.size());
  const Spectrum s = to_spectral(from_vector(g, v));
  for (int kx = -3; kx <= 3; ++kx)
    for (int ky = -3; ky <= 3; ++ky)
      for (int kz = -3; kz <= 3; ++kz) {
        const auto a = s.coefficient(kx, ky, kz), b = s.coefficient(-kx, -ky, -kz);
        EXPECT_LT(std::abs(a - std::conj(b)), 1e-15);
        EXPECT_LT(std::abs(a - oracle::dft_coefficient(v, 3, 8, kx, ky, kz)), 1e-14);
      }
}

TEST(Transform, RoundTrip) {
  std::mt19937_64 rng(5);
  for (int dim : {2, 3}) {
    const TorusGrid g(dim, 32);
    const Field f = noise(g, rng);
    EXPECT_LT(max_diff(to_physical(to_spectral(f)), f), 1e-12);
  }
}

TEST(Transform, RejectsNonFinite) {
  const TorusGrid g(2, 8);
  Field f(g, 1.0);
  f[3] = std::nan("");
  try {
    (void)to_spectral(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteField);
  }
}

TEST(Transform, Parseval) {
  std::mt19937_64 rng(6);
  for (int n : {16, 32, 64}) {
    const TorusGrid g(2, n);
    const Field f = noise(g, rng);
    const double direct = std::sqrt(oracle::quadrature(
        [&] {
          auto v = to_vector(f);
          for (auto& x : v) x *= x;
          return v;
        }(),
        2, n));
    EXPECT_NEAR(l2_norm(to_spectral(f)) / direct, 1.0, 1e-10);
    EXPECT_NEAR(l2_norm(f) / direct, 1.0, 1e-12);
  }
}

TEST(Derivative, CosineAnalytic) {
  const TorusGrid g(2, 32);
  const Field f = Field::sample(g, [](double, double y, double) { return std::cos(2 * y); });
  const Field d1 = derivative(f, 1, 1);
  const Field d2 = derivative(f, 1, 2);
  EXPECT_LT(max_diff(d1, Field::sample(g, [](double, double y, double) { return -2 * std::sin(2 * y); })), 1e-11);
  EXPECT_LT(max_diff(d2, Field::sample(g, [](double, double y, double) { return -4 * std::cos(2 * y); })), 1e-11);
  EXPECT_LT(std::abs(mean(d1)), 1e-14);
}

TEST(Derivative, AgreesWithFiniteDifferences) {
  const TorusGrid g(2, 128);
  auto fx = [](double x) { return std::exp(std::sin(x)); };
  const Field f = Field::sample(g, [&](double x, double, double) { return fx(x); });
  const Field d = derivative(f, 0, 1);
  const double h = 1e-3;
  double worst = 0.0;
  for (int i = 0; i < 128; ++i)
    worst = std::max(worst, std::abs(d.at(i, 5) - oracle::centred_dx(fx, g.coordinate(i), h)));
  EXPECT_LT(worst, 1e-6);
}

TEST(Derivative, LaplacianAgreesWithStencilOnSmoothField) {
  const int n = 256;
  const TorusGrid g(2, n);
  const Field f = Field::sample(g, [](double x, double y, double) { return std::exp(std::sin(x) * std::cos(y)); });
  const Field lap = derivative(f, 0, 2) + derivative(f, 1, 2);
  const auto fd = oracle::fd_laplacian_2d(to_vector(f), n);
  // second-order stencil: error ~ h²/12·|∂⁴f|
  EXPECT_LT(oracle::max_abs_diff(to_vector(lap), fd), 5e-3);
}

TEST(Derivative, LinearAndMeanFree) {
  std::mt19937_64 rng(7);
  const TorusGrid g(3, 16);
  const Field a = noise(g, rng), b = noise(g, rng);
  for (int axis = 0; axis < 3; ++axis)
    for (int order = 1; order <= 3; ++order) {
      const Field lhs = derivative(2.5 * a + (-0.75) * b, axis, order);
      const Field rhs = 2.5 * derivative(a, axis, order) + (-0.75) * derivative(b, axis, order);
      EXPECT_LT(max_diff(lhs, rhs), 1e-12 * std::pow(8.0, order));
      EXPECT_LT(std::abs(mean(derivative(a, axis, order))), 1e-12);
    }
}

TEST(Derivative, NyquistIsZeroForOddOrder) {
  const TorusGrid g(1, 8);
  const Field f = Field::sample(g, [](double x, double, double) { return std::cos(4 * x); });
  EXPECT_LT(max_abs(derivative(f, 0, 1)), 1e-14);
  EXPECT_LT(max_diff(derivative(f, 0, 2), -16.0 * f), 1e-12);
}

TEST(Derivative, ValidatesArguments) {
  const TorusGrid g(2, 8);
  EXPECT_THROW(derivative(Field(g), 2, 1), Error);
  EXPECT_THROW(derivative(Field(g), 0, 0), Error);
}

TEST(Dealias, TwoThirdsRule) {
  const TorusGrid g(2, 16);
  auto mode = [&](int k) { return Field::sample(g, [k](double x, double, double) { return std::cos(k * x); }); };
  // 6 > 16/3 goes, 5 stays
  EXPECT_EQ(dealias(to_spectral(mode(6))).coefficient(6, 0), Complex(0.0, 0.0));
  EXPECT_LT(max_abs(to_physical(dealias(to_spectral(mode(6))))), 1e-14);
  EXPECT_NEAR(dealias(to_spectral(mode(5))).coefficient(5, 0).real(), 0.5, 1e-15);
  EXPECT_LT(max_diff(to_physical(dealias(to_spectral(mode(5)))), mode(5)), 1e-14);
  std::mt19937_64 rng(8);
  const Spectrum once = dealias(to_spectral(noise(g, rng)));
  const Spectrum twice = dealias(once);
  for (std::size_t k = 0; k < once.size(); ++k) EXPECT_EQ(once[k], twice[k]);
}

TEST(Poisson, Eigenfunction) {
  const TorusGrid g(2, 16);
  const Field f = Field::sample(g, [](double, double y, double) { return std::cos(y); });
  EXPECT_LT(max_diff(solve_poisson(f), f), 1e-14);
  EXPECT_LT(max_abs(solve_poisson(Field(g, 7.0))), 1e-15);
}

TEST(Poisson, ResidualAndZeroMean) {
  std::mt19937_64 rng(9);
  for (int dim : {2, 3}) {
    const TorusGrid g(dim, 32);
    const Field f = noise(g, rng);
    const Field e = solve_poisson(f);
    Field lap(g);
    for (int a = 0; a < dim; ++a) lap += derivative(e, a, 2);
    const Field residual = -1.0 * lap - (f + (-mean(f)));
    EXPECT_LE(max_abs(residual), 1e-10 * max_abs(f));
    EXPECT_LT(std::abs(integral(e)), 1e-12);
  }
}

TEST(Heat, SingleModeAndIdentity) {
  const TorusGrid g(2, 16);
  const double A = 37.0;
  const Field f = Field::sample(g, [](double, double y, double) { return std::cos(y); });
  EXPECT_LT(max_diff(heat_propagate(f, A, A), std::exp(-1.0) * f), 1e-12 * std::exp(-1.0));
  std::mt19937_64 rng(10);
  const Field r = noise(g, rng);
  EXPECT_EQ(to_vector(heat_propagate(r, 0.0, A)), to_vector(r));
  EXPECT_THROW(heat_propagate(r, -1.0, A), Error);
  EXPECT_THROW(heat_propagate(r, 1.0, 0.0), Error);
}

TEST(Heat, SemigroupMeanAndContraction) {
  std::mt19937_64 rng(11);
  const TorusGrid g(3, 16);
  const Field f = noise(g, rng);
  const double A = 8.0;
  const Field two_steps = heat_propagate(heat_propagate(f, 0.3, A), 1.1, A);
  const Field one_step = heat_propagate(f, 1.4, A);
  EXPECT_LT(max_diff(two_steps, one_step), 1e-12);
  EXPECT_NEAR(mean(one_step), mean(f), 1e-15);
  const Field f0 = f + (-mean(f));
  double prev = l2_norm(f0);
  for (double t : {0.1, 0.5, 2.0, 10.0}) {
    const double now = l2_norm(heat_propagate(f0, t, A));
    EXPECT_LE(now, prev * (1 + 1e-14));
    prev = now;
  }
}

TEST(Norms, LpAndMagnitude) {
  const TorusGrid g(2, 32);
  const Field f = Field::sample(g, [](double x, double, double) { return std::sin(x); });
  EXPECT_NEAR(lp_norm(f, 2.0), l2_norm(f), 1e-12);
  EXPECT_NEAR(lp_norm(f, std::numeric_limits<double>::infinity()), max_abs(f), 0.0);
  // ∫sin⁴x over the torus = (3π/4)·2π
  EXPECT_NEAR(lp_norm(f, 4.0), std::pow(1.5 * oracle::kPi * oracle::kPi, 0.25), 1e-12);
  const Field m = magnitude(gradient(f));
  EXPECT_LT(max_diff(m, Field::sample(g, [](double x, double, double) { return std::abs(std::cos(x)); })), 1e-12);
}
