#pragma once

// Goursat solver for the semilinear system in characteristic coordinates.
//
// The lattice is indexed by (i, m): column i is a backward characteristic
// X = const, row m a forward characteristic Y = const. Columns and rows are
// attached to points of the initial curve so that the curve is the lattice
// anti-diagonal i + m = nX - 1; the region t > 0 is i + m > nX - 1.
//
// Lattice labels are uniform with spacing h, but the physical energy
// coordinates X, Y of a column / row are only piecewise smooth functions of
// the label: every breakpoint of the initial data lands exactly half-way
// between two lattice lines, which keeps the trapezoidal scheme second order
// across the jumps of R and S. Nodes store the physical p, q (p = q = 1 on
// the initial curve); the per-line factors dX/dlabel, dY/dlabel are kept in
// the grid.

#include <cstdint>
#include <memory>
#include <vector>

#include "vwave/coeffs.hpp"
#include "vwave/initdata.hpp"

namespace vwave {

struct CharNode {
  double t = 0.0;
  double x = 0.0;
  double u = 0.0;
  double p = 1.0;
  double q = 1.0;
  double sigma = 1.0;
  double eta = 1.0;
  double xi = 0.0;
  double zeta = 0.0;
};

/// Right-hand sides of the X-equations.
struct XDerivs {
  double u, x, t, q, eta, zeta;
};

/// Right-hand sides of the Y-equations.
struct YDerivs {
  double u, x, t, p, sigma, xi;
};

YDerivs rhs_Y(const CharNode& n, const DerivedCoeffs& c);
XDerivs rhs_X(const CharNode& n, const DerivedCoeffs& c);

struct CellOptions {
  double tol = 1e-12;
  int max_iter = 60;
};

/// Known data of one lattice cell: the west and south neighbours of the new
/// corner together with the label-to-coordinate factors of the lines involved.
struct CellInput {
  CharNode west;
  CharNode south;
  double west_col_scale = 1.0;   // dX/dlabel on the west column
  double ne_col_scale = 1.0;     // dX/dlabel on the new corner's column
  double south_row_scale = 1.0;  // dY/dlabel on the south row
  double ne_row_scale = 1.0;     // dY/dlabel on the new corner's row
  /// Weight of the west -> NE route in the averaged (t, x, u). An edge that
  /// crosses a data knot line integrates a kinked integrand, so the solver
  /// sets 0 or 1 when exactly one of the two edges does.
  double x_route_weight = 0.5;
};

struct CellResult {
  CharNode node;
  double residual = 0.0;  // |difference| of the two (t, x, u) routes, max-norm
  int iterations = 0;
};

/// Computes the north-east corner of a cell. p, sigma, xi are integrated
/// along the south -> NE edge with the Y-equations; q, eta, zeta along the
/// west -> NE edge with the X-equations; t, x, u along both and averaged
/// with CellInput::x_route_weight.
/// Throws NoConvergence (carrying i, m) or DomainExit.
CellResult advance_cell(const CellInput& in, const CoefficientField& field, double h,
                        const CellOptions& opt = {}, int i = 0, int m = 0);

/// Variant taking a south-west corner; it only seeds the iteration.
CellResult advance_cell(const CharNode& west, const CharNode& south, const CharNode& southwest,
                        const CoefficientField& field, double h, const CellOptions& opt = {});

/// Maps lattice labels to points of the initial curve.
///
/// label(x) is piecewise linear in Z(x) = (X(x) + Y(x)) / 2 with slope 1
/// outside the data breakpoints; the breakpoints sit at half-integer
/// multiples of h and consecutive ones are at least one cell apart.
class LabelMap {
 public:
  LabelMap(std::shared_ptr<const InitialState> state, Interval range, double h);

  int columns() const { return n_; }
  double h() const { return h_; }
  /// Curve point of column i (equivalently of row n - 1 - i).
  double x_of(int i) const { return xs_[static_cast<std::size_t>(i)]; }
  double X_of(int i) const { return X_[static_cast<std::size_t>(i)]; }
  double Y_of(int i) const { return Y_[static_cast<std::size_t>(i)]; }
  double dX_dlabel(int i) const { return dX_[static_cast<std::size_t>(i)]; }
  double dY_dlabel(int i) const { return dY_[static_cast<std::size_t>(i)]; }
  /// Label (in units of h) of a point of the curve.
  double label_of_x(double x) const;
  /// Labels of the data breakpoints inside the range, in units of h.
  const std::vector<double>& knot_labels() const { return knot_labels_; }

 private:
  double z_of_label(double l) const;

  std::shared_ptr<const InitialState> state_;
  double h_;
  int n_ = 0;
  double z0_ = 0.0;
  std::vector<double> lz_;  // label (units of h) at the Z breakpoints
  std::vector<double> z_;   // Z at the breakpoints
  std::vector<double> knot_labels_;
  std::vector<double> xs_, X_, Y_, dX_, dY_;
};

struct SolveOptions {
  CellOptions cell;
  int num_threads = 1;
  /// Refuse to allocate beyond this many nodes.
  std::size_t max_nodes = 40'000'000;
};

struct SolveStats {
  std::size_t nodes = 0;
  std::size_t cells = 0;
  int max_iterations = 0;
  double max_residual = 0.0;
  int wavefronts = 0;
};

class CharGrid {
 public:
  struct Column {
    int m_begin = 0;
    std::vector<CharNode> nodes;
    std::vector<double> residual;  // compatibility residual per node
  };

  CharGrid(CoefficientField field, std::shared_ptr<const LabelMap> labels, int orientation,
           double T);

  int nX() const { return labels_->columns(); }
  int nY() const { return labels_->columns(); }
  double h() const { return labels_->h(); }
  double T() const { return T_; }
  /// Sign s with Y_equations = s * Y_curve: the Y-equations hold in the
  /// coordinate -Y, i.e. t grows as the forward coordinate decreases.
  int orientation() const { return orientation_; }
  const CoefficientField& field() const { return field_; }
  const LabelMap& labels() const { return *labels_; }
  std::shared_ptr<const LabelMap> labels_ptr() const { return labels_; }

  /// Anti-diagonal row of column i: the node on the initial curve.
  int m0(int i) const { return nX() - 1 - i; }
  /// Physical X of column i and physical Y of row m.
  double X(int i) const { return labels_->X_of(i); }
  double Y(int m) const { return labels_->Y_of(nX() - 1 - m); }
  double col_scale(int i) const { return labels_->dX_dlabel(i); }
  double row_scale(int m) const { return labels_->dY_dlabel(nX() - 1 - m); }
  /// Lattice labels: X' = i h and Yhat' = (m - (nX - 1)) h, so that the
  /// curve is X' + Yhat' = 0 and t increases with both.
  double X_label(int i) const { return i * h(); }
  double Yhat_label(int m) const { return (m - (nX() - 1)) * h(); }

  const Column& column(int i) const { return cols_[static_cast<std::size_t>(i)]; }
  Column& column(int i) { return cols_[static_cast<std::size_t>(i)]; }
  bool contains(int i, int m) const;
  const CharNode* find(int i, int m) const;
  const CharNode& at(int i, int m) const;
  double residual(int i, int m) const;
  /// One past the last row present in column i.
  int m_end(int i) const;

  SolveStats& stats() { return stats_; }
  const SolveStats& stats() const { return stats_; }
  std::size_t node_count() const;
  double max_t() const;

 private:
  CoefficientField field_;
  std::shared_ptr<const LabelMap> labels_;
  int orientation_;
  double T_;
  std::vector<Column> cols_;
  SolveStats stats_;
};

/// Trial-cell test of the marching orientation: returns the sign s for
/// which a cell next to the curve yields t > 0 along both of its edges.
int detect_orientation(const BoundaryCurve& curve, double h);

/// Solves on the lattice covering `curve.range()` until every front node has
/// t > T. A node is computed iff both its west and south neighbours exist and
/// min(t_west, t_south) <= T. Results do not depend on num_threads.
CharGrid solve(const BoundaryCurve& curve, double T, double h, const SolveOptions& opt = {});

/// Range of the initial curve needed to cover [a - N T, b + N T] at time T.
Interval light_cone_range(const CoefficientField& field, const InitialData& data, double T);

}  // namespace vwave
