#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "vwave/errors.hpp"
#include "vwave/physmap.hpp"

using namespace vwave;
using doctest::Approx;

namespace {

double dalembert_pulse(double t, double x) {
  const double lo = std::max(x - t, 0.0), hi = std::min(x + t, 1.0);
  return hi > lo ? 0.5 * (hi - lo) : 0.0;
}

CharGrid pulse_grid(double T, double h) {
  auto f = CoefficientField::linear(1, 0, 1);
  auto d = InitialData::pulse();
  BoundaryCurve c = build_boundary_curve(f, d, 64, light_cone_range(f, d, T));
  return solve(c, T, h);
}

}  // namespace

TEST_CASE("jacobian determinant on the initial curve") {
  CharNode n;  // p = q = 1, sigma = eta = 1
  SUBCASE("unit speed") {
    auto f = CoefficientField::linear(1, 0, 1);
    CHECK(jacobian_det(n, derive(f, 0, 0)) == Approx(-0.5));
  }
  SUBCASE("speed two") {
    auto f = CoefficientField::linear(1, 0, 2);
    CHECK(jacobian_det(n, derive(f, 0, 0)) == Approx(-0.25));
  }
  SUBCASE("vacuum states are degenerate") {
    auto f = CoefficientField::linear(1, 0, 1);
    n.sigma = 0.0;
    CHECK(jacobian_det(n, derive(f, 0, 0)) == Approx(0.0));
  }
}

TEST_CASE("Riemann variables from characteristic data") {
  auto f = CoefficientField::linear(1, 0, 1);
  const DerivedCoeffs d = derive(f, 0, 0);
  CharNode n;
  n.sigma = 0.5;
  n.xi = 0.5;
  n.eta = 0.2;
  n.zeta = -0.4;
  const Reconstructed r = reconstruct_riemann(n, d);
  CHECK_FALSE(r.concentrated());
  CHECK(r.state.Rt2 == Approx(1.0));
  CHECK(r.state.St2 == Approx(4.0));

  n.sigma = 1e-9;
  const Reconstructed c = reconstruct_riemann(n, d);
  CHECK(c.concentrated_minus);
  CHECK(std::isinf(c.state.Rt2));
}

TEST_CASE("isochrones of zero data carry no energy") {
  auto f = CoefficientField::linear(1, 0, 1);
  BoundaryCurve c = build_boundary_curve(f, InitialData::zero(), 4, {-1, 1});
  CharGrid g = solve(c, 0.3, 1.0 / 32);
  const Isochrone iso = extract_isochrone(g, 0.2);
  for (const IsoPoint& p : iso.points) {
    CHECK(p.u == Approx(0.0));
    CHECK(std::abs(p.mu_minus_cum) < 1e-14);
    CHECK(std::abs(p.mu_plus_cum) < 1e-14);
  }
  CHECK(iso.atoms.empty());
  CHECK(sample_u(g, 0.2, 0.0) == Approx(0.0));
}

TEST_CASE("linear pulse: isochrones follow d'Alembert") {
  const double T = 0.5, h = 1.0 / 64;
  CharGrid g = pulse_grid(T, h);

  SUBCASE("point values") {
    const Isochrone iso = extract_isochrone(g, 0.25);
    double worst = 0.0;
    for (const IsoPoint& p : iso.points)
      worst = std::max(worst, std::abs(p.u - dalembert_pulse(0.25, p.x)));
    CHECK(worst < 1e-12);
    CHECK(sample_u(iso, 0.5) == Approx(0.25).epsilon(1e-12));
    CHECK(sample_u(g, 0.25, 1.5) ==
          Approx(0.0).scale(1e-12));
    CHECK_THROWS_AS(sample_u(iso, iso.x_max() + 1.0), OutOfDomain);
  }

  SUBCASE("energy measures move along the characteristics") {
    const Isochrone i0 = extract_isochrone(g, 0.0);
    const Isochrone i1 = extract_isochrone(g, 0.25);
    const double m0 = i0.points.back().mu_minus_cum, p0 = i0.points.back().mu_plus_cum;
    CHECK(m0 == Approx(p0));
    CHECK(m0 + p0 == Approx(1.0).epsilon(1e-12));
    // The left-moving half sits on [-t, 1 - t], the right-moving one on [t, 1 + t].
    CHECK(std::abs(i1.mu_minus_at(-0.26)) < 1e-12);
    CHECK(i1.mu_minus_at(0.25) == Approx(0.5 * m0).epsilon(1e-10));
    CHECK(i1.mu_minus_at(0.76) == Approx(m0).epsilon(1e-12));
    CHECK(std::abs(i1.mu_plus_at(0.24)) < 1e-12);
    CHECK(i1.mu_plus_at(0.75) == Approx(0.5 * p0).epsilon(1e-10));
    CHECK(i1.mu_plus_at(1.26) == Approx(p0).epsilon(1e-12));
  }

  SUBCASE("isochrone is ordered in x") {
    const Isochrone iso = extract_isochrone(g, 0.4);
    for (std::size_t k = 1; k < iso.points.size(); ++k)
      CHECK(iso.points[k].x >= iso.points[k - 1].x);
  }

  SUBCASE("level sets outside the computed region") {
    CHECK_THROWS_AS(extract_isochrone(g, -0.1), EmptyLevelSet);
    CHECK_THROWS_AS(extract_isochrone(g, 5.0), EmptyLevelSet);
  }
}

TEST_CASE("no critical nodes for linear data") {
  CharGrid g = pulse_grid(0.3, 1.0 / 32);
  CHECK(critical_nodes(g).empty());
}

TEST_CASE("isochrone csv header") {
  CharGrid g = pulse_grid(0.3, 1.0 / 32);
  std::ostringstream os;
  write_isochrone_csv(extract_isochrone(g, 0.1), os);
  CHECK(os.str().rfind("x,u,sigma,eta,Rt2,St2,mu_minus_cum,mu_plus_cum,concentrated\n", 0) == 0);
}
