#pragma once

// Initial data (u0, u1), the Riemann variables and directional energy
// densities at t = 0, the cumulative energy coordinates X(x), Y(x), and the
// boundary data on the curve t = 0 of the characteristic plane.

#include <memory>
#include <vector>

#include "vwave/coeffs.hpp"
#include "json.hpp"

namespace vwave {

struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
};

/// Continuous piecewise-linear function, constant outside its breakpoints.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> xs, std::vector<double> values);

  double operator()(double x) const;
  /// Derivative; at a breakpoint the right cell's slope is returned.
  double slope(double x) const;

  const std::vector<double>& breakpoints() const { return xs_; }
  const std::vector<double>& values() const { return vs_; }

 private:
  std::vector<double> xs_;
  std::vector<double> vs_;
};

/// Piecewise-constant function: values[k] on [xs[k], xs[k+1]), zero outside.
class PiecewiseConstant {
 public:
  PiecewiseConstant() = default;
  PiecewiseConstant(std::vector<double> xs, std::vector<double> values);

  double operator()(double x) const;

  const std::vector<double>& breakpoints() const { return xs_; }
  const std::vector<double>& values() const { return vs_; }

 private:
  std::vector<double> xs_;
  std::vector<double> vs_;
};

struct InitialData {
  PiecewiseLinear u0;
  PiecewiseConstant u1;
  Interval support{0.0, 0.0};

  /// Throws std::invalid_argument unless breakpoints lie inside `support`.
  void validate() const;

  static InitialData zero();
  /// u0 = 0, u1 = amp on [a, b).
  static InitialData pulse(double a = 0.0, double b = 1.0, double amp = 1.0);
  /// u0 rises linearly from `base` at a to base + height at `peak`, back to
  /// `base` at b; u1 = 0.
  static InitialData hat(double a, double peak, double b, double height, double base = 0.0);
  /// Piecewise-linear sampling of base + amp * exp(-((x - center) / width)^2)
  /// on center +- 3 width with `resolution` cells, shifted so that it joins
  /// the base value continuously.
  static InitialData gauss_like(double center, double width, double amp, double base,
                                int resolution);
};

/// JSON: {u0_breakpoints, u0_values, u1_breakpoints, u1_values, support:[a,b]}.
InitialData initial_data_from_json(const nlohmann::json& j);
nlohmann::json to_json(const InitialData& d);

struct RiemannState {
  double R = 0.0;
  double S = 0.0;
  double Rt2 = 0.0;
  double St2 = 0.0;
};

/// R = alpha u1 + c2 u0', S = alpha u1 + c1 u0' and the tilted densities.
RiemannState riemann_init(const CoefficientField& field, const InitialData& data, double x);

/// Precomputed cumulative integrals of the initial energy densities.
class InitialState {
 public:
  InitialState(CoefficientField field, InitialData data);

  const CoefficientField& field() const { return field_; }
  const InitialData& data() const { return data_; }

  RiemannState riemann(double x) const;
  /// X(x) = x + int_{-inf}^x Rt2(0, .).
  double X(double x) const;
  /// Y(x) = x + int_{-inf}^x St2(0, .).
  double Y(double x) const;
  /// Inverse of X, Y and of X + Y (all strictly increasing).
  double x_of_X(double X) const;
  double x_of_Y(double Y) const;
  double x_of_sum(double s) const;

  /// int (alpha^2 u1^2 + gamma^2 u0'^2) dx.
  double energy_classical() const { return energy_classical_; }
  /// int (Rt2 + St2) dx.
  double energy_riemann() const { return cum_minus_.back() + cum_plus_.back(); }
  double energy_minus() const { return cum_minus_.back(); }
  double energy_plus() const { return cum_plus_.back(); }

  /// Merged breakpoints of u0 and u1: the only places where R, S can jump.
  const std::vector<double>& knots() const { return knots_; }

  /// True when Rt2 == St2 everywhere (X(x) == Y(x)).
  bool symmetric() const { return symmetric_; }

 private:
  struct Piece {
    double lo;
    double hi;
    double slope;
    double u1;
  };
  RiemannState density(const Piece& piece, double x) const;
  // Integral of (Rt2, St2) over [piece.lo, x].
  std::pair<double, double> partial(std::size_t piece, double x) const;
  std::size_t piece_of(double x) const;
  double invert(double target, int which) const;
  double coordinate(double x, int which) const;

  CoefficientField field_;
  InitialData data_;
  std::vector<double> knots_;
  std::vector<Piece> pieces_;
  std::vector<double> cum_minus_;  // at knots_
  std::vector<double> cum_plus_;
  double energy_classical_ = 0.0;
  bool symmetric_ = false;
};

std::pair<double, double> cumulative_coords(const CoefficientField& field,
                                            const InitialData& data, double x);
double total_initial_energy(const CoefficientField& field, const InitialData& data);

struct BoundaryRecord {
  double x = 0.0;
  double X = 0.0;
  double Y = 0.0;
  double u = 0.0;
  double p = 1.0;
  double q = 1.0;
  double sigma = 1.0;
  double eta = 1.0;
  double xi = 0.0;
  double zeta = 0.0;
  double t = 0.0;
};

/// The curve t = 0 in the (X, Y) plane, sampled along increasing x, with
/// exact evaluation at arbitrary points through the initial state.
class BoundaryCurve {
 public:
  BoundaryCurve(std::shared_ptr<const InitialState> state, Interval range,
                std::vector<BoundaryRecord> records);

  const std::vector<BoundaryRecord>& records() const { return records_; }
  const InitialState& state() const { return *state_; }
  std::shared_ptr<const InitialState> state_ptr() const { return state_; }
  Interval range() const { return range_; }

  BoundaryRecord at_x(double x) const;

 private:
  std::shared_ptr<const InitialState> state_;
  Interval range_;
  std::vector<BoundaryRecord> records_;
};

BoundaryRecord boundary_record(const InitialState& state, double x);

/// Samples the curve at `resolution` uniform points of `range` plus every
/// breakpoint inside it. Throws std::logic_error if X or Y fails to be
/// strictly increasing.
BoundaryCurve build_boundary_curve(const CoefficientField& field, const InitialData& data,
                                   std::size_t resolution, Interval range);
BoundaryCurve build_boundary_curve(const CoefficientField& field, const InitialData& data,
                                   std::size_t resolution);

}  // namespace vwave
