#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "vwave/coeffs.hpp"

using namespace vwave;
using doctest::Approx;

namespace {

CoefficientField smooth_field() {
  // alpha, beta, gamma all depending on x and u, with closed-form partials.
  CoefficientBounds b{0.7, 1.3, 0.2, 1.1, 1.9, 2.0};
  auto eval = [](double x, double u) {
    FieldSample s;
    s.alpha = 1.0 + 0.3 * std::sin(x + u);
    s.alpha_x = s.alpha_u = 0.3 * std::cos(x + u);
    s.beta = 0.2 * std::cos(2 * x - u);
    s.beta_x = -0.4 * std::sin(2 * x - u);
    s.beta_u = 0.2 * std::sin(2 * x - u);
    s.gamma = 1.5 + 0.4 * std::sin(u) * std::cos(x);
    s.gamma_x = -0.4 * std::sin(u) * std::sin(x);
    s.gamma_u = 0.4 * std::cos(u) * std::cos(x);
    return s;
  };
  return CoefficientField("smooth", eval, b);
}

}  // namespace

TEST_CASE("wave speeds of a constant field") {
  auto f = CoefficientField::linear(1.0, 0.0, 2.0);
  const WaveSpeeds w = eval_wave_speeds(f, 0.3, -1.0);
  CHECK(w.lambda_minus == -2.0);
  CHECK(w.lambda_plus == 2.0);
  CHECK(w.c1 == -2.0);
  CHECK(w.c2 == 2.0);
}

TEST_CASE("liquid-crystal speed at u = pi/2") {
  auto f = CoefficientField::liquid_crystal(1.0, 4.0);
  const WaveSpeeds w = eval_wave_speeds(f, 0.0, std::numbers::pi / 2);
  CHECK(w.lambda_plus == Approx(2.0).epsilon(1e-14));
  CHECK(w.lambda_minus == Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("asymmetric speeds match the quadratic roots") {
  auto f = CoefficientField::linear(2.0, 3.0, 1.0);
  const WaveSpeeds w = eval_wave_speeds(f, 0.0, 0.0);
  CHECK(w.lambda_minus == Approx(-0.15138781886599734).epsilon(1e-14));
  CHECK(w.lambda_plus == Approx(1.6513878188659973).epsilon(1e-14));
  CHECK(w.c1 == Approx(2.0 * w.lambda_minus).epsilon(1e-15));
}

TEST_CASE("non-admissible field raises a domain error") {
  CoefficientField bad("bad", [](double x, double) {
    FieldSample s;
    s.gamma = x;
    return s;
  }, CoefficientBounds{});
  CHECK_THROWS_AS(eval_wave_speeds(bad, -1.0, 0.0), std::domain_error);
  CHECK_NOTHROW(eval_wave_speeds(bad, 1.0, 0.0));
}

TEST_CASE("source coefficients vanish for constant fields") {
  const SourceCoeffs s = eval_source_coeffs(CoefficientField::linear(1.3, 0.4, 0.8), 1.0, 2.0);
  CHECK(s.a1 == 0.0);
  CHECK(s.a2 == 0.0);
  CHECK(s.b == 0.0);
  CHECK(s.d1 == 0.0);
  CHECK(s.d2 == 0.0);
}

TEST_CASE("liquid-crystal source coefficients") {
  const double K1 = 1.0, K2 = 4.0;
  auto f = CoefficientField::liquid_crystal(K1, K2);
  for (double u : {0.0, 0.3, 0.9, 2.0, -1.2}) {
    const double c = std::sqrt(K1 * std::cos(u) * std::cos(u) + K2 * std::sin(u) * std::sin(u));
    const double cp = (K2 - K1) * std::sin(u) * std::cos(u) / c;
    const SourceCoeffs s = eval_source_coeffs(f, 0.0, u);
    CHECK(s.a1 == Approx(cp / (4 * c)).epsilon(1e-12));
    CHECK(s.a2 == Approx(-cp / (4 * c)).epsilon(1e-12));
    CHECK(std::abs(s.b) < 1e-15);
    CHECK(std::abs(s.d1) < 1e-15);
    CHECK(std::abs(s.d2) < 1e-15);
  }
}

TEST_CASE("x-heterogeneous source coefficients") {
  const double g0 = 1.2, eps = 0.3, k = 2.0;
  auto f = CoefficientField::x_heterogeneous(g0, eps, k);
  for (double x : {-1.0, 0.2, 0.7}) {
    const double g = g0 * (1 + eps * std::sin(k * x));
    const double gp = g0 * eps * k * std::cos(k * x);
    const SourceCoeffs s = eval_source_coeffs(f, x, 0.4);
    CHECK(std::abs(s.a1) < 1e-15);
    CHECK(std::abs(s.a2) < 1e-15);
    CHECK(s.b == Approx(-gp / (2 * g)).epsilon(1e-12));
    CHECK(s.d1 == Approx(-gp / 2).epsilon(1e-12));
    CHECK(s.d2 == Approx(gp / 2).epsilon(1e-12));
  }
}

TEST_CASE("eigenvalue identity and speed gap") {
  auto f = smooth_field();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = U(rng), u = U(rng);
    const FieldSample s = f(x, u);
    const WaveSpeeds w = eval_wave_speeds(f, x, u);
    CHECK(w.lambda_minus < 0.0);
    CHECK(w.lambda_plus > 0.0);
    for (double l : {w.lambda_minus, w.lambda_plus}) {
      const double scale = s.alpha * s.alpha * l * l + 2 * std::abs(s.beta * l) + s.gamma * s.gamma;
      CHECK(std::abs(s.alpha * s.alpha * l * l - 2 * s.beta * l - s.gamma * s.gamma) <=
            1e-12 * scale);
    }
    const double gap = 2 * std::sqrt(s.beta * s.beta + s.alpha * s.alpha * s.gamma * s.gamma) / s.alpha;
    CHECK(w.c2 - w.c1 == Approx(gap).epsilon(1e-12));
  }
}

TEST_CASE("source coefficients match finite differences of the speeds") {
  auto f = smooth_field();
  const double h = 1e-5;
  for (auto [x, u] : {std::pair{0.3, -0.7}, {1.1, 0.4}, {-2.0, 2.2}}) {
    auto c = [&](double xx, double uu) { return eval_wave_speeds(f, xx, uu); };
    const FieldSample s = f(x, u);
    const double c1x = (c(x + h, u).c1 - c(x - h, u).c1) / (2 * h);
    const double c2x = (c(x + h, u).c2 - c(x - h, u).c2) / (2 * h);
    const double c1u = (c(x, u + h).c1 - c(x, u - h).c1) / (2 * h);
    const double c2u = (c(x, u + h).c2 - c(x, u - h).c2) / (2 * h);
    const WaveSpeeds w = c(x, u);
    const double D = w.c2 - w.c1, a = s.alpha;
    const SourceCoeffs got = eval_source_coeffs(f, x, u);
    CHECK(got.a1 == Approx((w.c1 * s.alpha_u - a * c1u) / (2 * a * D)).epsilon(1e-6));
    CHECK(got.a2 == Approx((w.c2 * s.alpha_u - a * c2u) / (2 * a * D)).epsilon(1e-6));
    CHECK(got.b == Approx((a * (c1x - c2x) + (w.c1 - w.c2) * s.alpha_x) / (2 * a * D)).epsilon(1e-6));
    const double common = (w.c2 * c1x - w.c1 * c2x) / (2 * D);
    CHECK(got.d1 == Approx(common + (a * c1x - w.c1 * s.alpha_x) / (2 * a)).epsilon(1e-6));
    CHECK(got.d2 == Approx(common + (a * c2x - w.c2 * s.alpha_x) / (2 * a)).epsilon(1e-6));
  }
}

TEST_CASE("finite-difference partials of a value-only field") {
  auto f = CoefficientField::with_fd_partials(
      "fd",
      [](double x, double u) {
        return std::array<double, 3>{1.0 + 0.2 * std::sin(x), 0.1 * u, 1.0 + 0.5 * std::cos(u)};
      },
      CoefficientBounds{0.8, 1.2, 0.5, 0.5, 1.5, 1.0});
  const FieldSample s = f(0.4, 0.9);
  CHECK(s.alpha_x == Approx(0.2 * std::cos(0.4)).epsilon(1e-6));
  CHECK(s.beta_u == Approx(0.1).epsilon(1e-6));
  CHECK(s.gamma_u == Approx(-0.5 * std::sin(0.9)).epsilon(1e-6));
  CHECK(std::abs(s.alpha_u) < 1e-9);
}

TEST_CASE("validate_bounds") {
  SUBCASE("constant field") {
    const BoundsReport r =
        validate_bounds(CoefficientField::linear(1, 0, 1), Rect{-1, 1, -1, 1}, 100);
    CHECK(r.ok());
    CHECK(r.lambda_plus_min == 1.0);
    CHECK(r.lambda_plus_max == 1.0);
    CHECK(r.lambda_minus_min == -1.0);
  }
  SUBCASE("liquid crystal observed range") {
    const BoundsReport r = validate_bounds(CoefficientField::liquid_crystal(1, 4),
                                           Rect{0, 1, 0, 2 * std::numbers::pi}, 10000);
    CHECK(r.ok());
    CHECK(r.lambda_plus_min == Approx(1.0).epsilon(1e-6));
    CHECK(r.lambda_plus_max == Approx(2.0).epsilon(1e-4));
    CHECK(r.N_lower <= r.lambda_plus_min);
    CHECK(r.N_upper >= r.lambda_plus_max);
  }
  SUBCASE("gamma crossing zero is flagged") {
    CoefficientField bad("bad", [](double x, double) {
      FieldSample s;
      s.gamma = x;
      return s;
    }, CoefficientBounds{1, 1, 0, 0.5, 2, 0});
    const BoundsReport r = validate_bounds(bad, Rect{-1, 1, 0, 1}, 25);
    CHECK_FALSE(r.ok());
    CHECK(r.violations.front().x == -1.0);
  }
  SUBCASE("empty domain") {
    CHECK_THROWS_AS(validate_bounds(CoefficientField::linear(1, 0, 1), Rect{1, 0, 0, 1}, 10),
                    std::invalid_argument);
  }
}

TEST_CASE("source bound constant") {
  CHECK(source_bound_constant(CoefficientField::linear(1, 0, 1), Rect{0, 1, 0, 1}, 16) == 0.0);
  // For (1, 0, c(u)): A = c'/(4c), B = c'/(4c) (times 2c2/(alpha D) = 1), C = 0; k1 = k2 = 1/2.
  const double Ch = source_bound_constant(CoefficientField::liquid_crystal(1, 4),
                                          Rect{0, 0, 0, std::numbers::pi}, 20000);
  double best = 0;
  for (int k = 0; k <= 20000; ++k) {
    const double u = std::numbers::pi * k / 20000;
    const double c = std::sqrt(std::cos(u) * std::cos(u) + 4 * std::sin(u) * std::sin(u));
    best = std::max(best, std::abs(3 * std::sin(u) * std::cos(u) / c) / (4 * c) * 2);
  }
  CHECK(Ch == Approx(best).epsilon(1e-3));
}
