#pragma once

// Classical finite-difference solver of the first-order Riemann-variable
// system, used to cross-check the characteristic solver while the solution
// is smooth.

#include <iosfwd>
#include <vector>

#include "vwave/physmap.hpp"

namespace vwave {

struct FDState {
  double t = 0.0;
  double x0 = 0.0;  // xs[k] = x0 + k dx
  double dx = 0.0;
  std::vector<double> u, R, S;

  std::size_t size() const { return u.size(); }
  double x(std::size_t k) const { return x0 + static_cast<double>(k) * dx; }
};

/// Uniform grid on `range` with R, S from the initial data.
FDState fd_initial_state(const CoefficientField& field, const InitialData& data, Interval range,
                         double dx);

/// Largest |lambda_pm| over the state.
double max_speed(const FDState& s, const CoefficientField& field);

/// One Heun step of the method of lines: R is differenced with the
/// right-biased and S with the left-biased second-order stencil, two ghost
/// cells per side copy the edge values. Throws CFLViolation when
/// max_speed * dt / dx > 0.5.
FDState step(const FDState& s, const CoefficientField& field, double dt);

struct FDRunOptions {
  double cfl = 0.5;
  double blowup_cap = 1e6;
};

/// Runs from t = 0 and returns snapshots at `times` (sorted, in [0, T]).
/// The domain is the data support padded by N_bar T + 1 on both sides.
/// Throws BlowupSuspected when max(|R|, |S|) exceeds the cap.
std::vector<FDState> fd_run(const CoefficientField& field, const InitialData& data, double T,
                            double dx, const std::vector<double>& times,
                            const FDRunOptions& opt = {});

/// int (Rt2 + St2) dx by the trapezoid rule.
double fd_energy(const FDState& s, const CoefficientField& field);

/// The state as an isochrone: cumulative energies and source integral by
/// the trapezoid rule.
Isochrone fd_profile(const FDState& s, const CoefficientField& field);

struct ErrorRow {
  double t;
  double u_linf, u_l2, u_rel_l2;
  double R_linf, R_l2;
  double S_linf, S_l2;
  std::size_t points;
};

/// Characteristic-grid solution sampled at the FD nodes inside the
/// isochrone's x range. Relative L2 is normalized by the L2 norm of u
/// minus its far-field value. Throws WindowMismatch when a time lies
/// outside either solution.
std::vector<ErrorRow> fd_compare(const std::vector<FDState>& oracle, const CharGrid& grid);

void write_fd_snapshot_csv(const FDState& s, std::ostream& os);

}  // namespace vwave
