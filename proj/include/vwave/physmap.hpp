#pragma once

// Inverse of the map (X, Y) -> (t, x): isochrones t(X, Y) = t*, point
// samples of u(t, x), the Jacobian of the map and the Riemann variables
// recovered from characteristic-coordinate data.

#include <iosfwd>
#include <string>
#include <vector>

#include "vwave/goursat.hpp"

namespace vwave {

/// (1/c2 - 1/c1) alpha x_X x_Y, derivatives with respect to the physical X, Y.
double jacobian_det(const CharNode& n, const DerivedCoeffs& c);

struct Reconstructed {
  RiemannState state;
  bool concentrated_minus = false;  // sigma <= floor: Rt2 is +inf
  bool concentrated_plus = false;   // eta <= floor: St2 is +inf
  bool concentrated() const { return concentrated_minus || concentrated_plus; }
};

Reconstructed reconstruct_riemann(const CharNode& n, const DerivedCoeffs& c,
                                  double eps_floor = 1e-6);

struct IsoPoint {
  double x = 0.0;
  double u = 0.0;
  double sigma = 1.0;
  double eta = 1.0;
  double xi = 0.0;
  double zeta = 0.0;
  double p = 1.0;
  double q = 1.0;
  double Rt2 = 0.0;
  double St2 = 0.0;
  double mu_minus_cum = 0.0;
  double mu_plus_cum = 0.0;
  /// Integral of the source G over (-inf, x] along the isochrone.
  double G_cum = 0.0;
  bool concentrated = false;
  // Lattice position: labels and the line the crossing was found on.
  double X_label = 0.0;
  double Yhat_label = 0.0;
  double p_label = 1.0;  // p dX/dlabel
  double q_label = 1.0;  // q dY/dlabel
  // Lattice lines the crossing lies on (-1 if none); a crossing exactly at
  // a node lies on both.
  int column = -1;
  int row = -1;
};

struct Atom {
  double x;
  double mass_minus;
  double mass_plus;
};

struct Isochrone {
  double t_star = 0.0;
  std::vector<IsoPoint> points;  // sorted along the curve, x nondecreasing
  std::vector<Atom> atoms;
  double eps_conc = 1e-6;

  /// mu_-((-inf, x]) by linear interpolation; x outside the range is clamped.
  double mu_minus_at(double x) const;
  double mu_plus_at(double x) const;
  double G_cum_at(double x) const;
  double x_min() const { return points.front().x; }
  double x_max() const { return points.back().x; }
};

struct IsochroneOptions {
  double eps_conc = 1e-6;
  /// Points whose x differ by less than this are treated as one location.
  double merge_tol = 1e-12;
};

/// Level set t = t_star of the grid. Throws EmptyLevelSet when t_star is
/// negative or the level set leaves the computed region.
Isochrone extract_isochrone(const CharGrid& grid, double t_star, const IsochroneOptions& opt = {});

/// u(t_star, x_star) by interpolation along the isochrone; throws
/// OutOfDomain outside the isochrone's x range.
double sample_u(const CharGrid& grid, double t_star, double x_star);
double sample_u(const Isochrone& iso, double x_star);

/// Nodes with |jacobian_det| < tol (default h^2 when tol <= 0).
struct CriticalNode {
  int i;
  int m;
  double det;
};
std::vector<CriticalNode> critical_nodes(const CharGrid& grid, double tol = 0.0);

void write_isochrone_csv(const Isochrone& iso, std::ostream& os);

/// Long-format CSV (one line per node) plus a JSON sidecar
/// {h, X0, Y0, nX, nY, orientation, scenario_hash}.
void write_grid_dump(const CharGrid& grid, const std::string& csv_path,
                     const std::string& sidecar_path, const std::string& scenario_hash);

}  // namespace vwave
