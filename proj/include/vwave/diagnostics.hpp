#pragma once

// Energy bookkeeping and structural checks on a solved grid.

#include <string>
#include <vector>

#include "json.hpp"

#include "vwave/physmap.hpp"

namespace vwave {

struct EnergyReport {
  double t = 0.0;
  double E_ac_minus = 0.0;
  double E_ac_plus = 0.0;
  double E_atoms = 0.0;
  double E_total = 0.0;
  double Q = 0.0;
  double rel_drift = 0.0;  // (E_total - E0) / max(E0, 1)
};

/// Energies on an isochrone. The absolutely continuous parts are the sums of
/// measure increments over non-concentrated segments.
EnergyReport total_energy(const Isochrone& iso, double E0);

/// Mass of {x > y} under mu_- (x) mu_+ (y); coincident increments count half.
double interaction_potential(const Isochrone& iso);

/// Defect of the weak balance law for mu_- on [t1, t2] x (-inf, x_probe]:
/// mass change minus inflow through x_probe minus the integrated source.
double balance_residual(const CharGrid& grid, double t1, double t2, double x_probe);

struct ConcentrationEvent {
  std::size_t nodes = 0;
  // Most concentrated node of the cluster.
  double X = 0.0, Y = 0.0, t = 0.0, x = 0.0, sigma = 1.0, eta = 1.0;
  double t_min = 0.0, t_max = 0.0, x_min = 0.0, x_max = 0.0;
  // Advisory: d lambda_-/du and d lambda_+/du at that node.
  double dlambda_minus_du = 0.0, dlambda_plus_du = 0.0;
};

/// Nodes with min(sigma, eta) < eps, together with nodes where xi (zeta)
/// flips sign along a column (row) while sigma (eta) < 1/2 -- the discrete
/// trace of R (S) passing through infinity -- clustered by lattice adjacency
/// and ordered by time.
std::vector<ConcentrationEvent> detect_concentration(const CharGrid& grid, double eps = 1e-6);

/// Hoelder exponent of t -> x along the column nearest to X_fixed, fitted
/// over dyadic node separations. Throws InsufficientSamples when the column
/// has fewer than 16 nodes.
double holder_estimate(const CharGrid& grid, double X_fixed);
double holder_estimate_column(const CharGrid& grid, int column);

struct SpaceTimeBound {
  double lhs = 0.0;    // int int Rt2 St2 dx dt over 0 <= t <= T
  double rhs = 0.0;
  double C_hat = 0.0;
  bool holds() const { return lhs <= rhs; }
};

SpaceTimeBound space_time_bound(const CharGrid& grid, double E0, double C_hat);

struct BalanceProbe {
  double t1, t2, x_probe, residual;
};

struct HolderProbe {
  double X;
  double exponent;
};

struct DiagnosticsReport {
  std::string scenario;
  double h = 0.0;
  double T = 0.0;
  double E0 = 0.0;
  std::vector<EnergyReport> energy_series;
  std::vector<ConcentrationEvent> events;
  std::vector<HolderProbe> holder;
  std::vector<BalanceProbe> balance;
};

nlohmann::json to_json(const DiagnosticsReport& r);
DiagnosticsReport report_from_json(const nlohmann::json& j);

}  // namespace vwave
