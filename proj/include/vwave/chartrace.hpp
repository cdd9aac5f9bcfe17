#pragma once

// Characteristics traced in the energy variables: omega (backward family)
// and upsilon (forward family) obey integral equations driven by the wave
// speed and the cumulative source; x is recovered from the cumulative
// energy on the current time slice.

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "vwave/fdoracle.hpp"

namespace vwave {

enum class Family { backward, forward };

/// Solution slices at given times.
class SolutionProvider {
 public:
  virtual ~SolutionProvider() = default;
  virtual std::string name() const = 0;
  virtual const CoefficientField& field() const = 0;
  /// Slice at time t; throws ProviderGap when unavailable.
  virtual const Isochrone& at(double t) const = 0;
};

/// Isochrones of a characteristic grid, extracted on demand and cached.
class GridProvider : public SolutionProvider {
 public:
  explicit GridProvider(std::shared_ptr<const CharGrid> grid) : grid_(std::move(grid)) {}
  std::string name() const override { return "grid"; }
  const CoefficientField& field() const override { return grid_->field(); }
  const Isochrone& at(double t) const override;

 private:
  std::shared_ptr<const CharGrid> grid_;
  mutable std::mutex mutex_;
  mutable std::map<double, Isochrone> cache_;
};

/// Snapshots of the finite-difference oracle; times must match a snapshot.
class OracleProvider : public SolutionProvider {
 public:
  OracleProvider(CoefficientField field, const std::vector<FDState>& snapshots);
  std::string name() const override { return "oracle"; }
  const CoefficientField& field() const override { return field_; }
  const Isochrone& at(double t) const override;

 private:
  CoefficientField field_;
  std::vector<Isochrone> slices_;
};

struct PathSample {
  double t;
  double coord;  // omega or upsilon
  double x;
};

struct CharPath {
  Family family = Family::backward;
  double y_bar = 0.0;
  std::vector<PathSample> samples;
  std::string source;
};

/// x with x + mu((-inf, x]) = coord on the slice, by bisection on the
/// monotone cumulative coordinate. Throws OutOfDomain.
double x_of_energy_coordinate(const Isochrone& iso, Family family, double coord);

/// Heun integration of the omega (or upsilon) equation from y_bar on
/// [0, T] with steps of at most dt.
CharPath trace_characteristic(const SolutionProvider& provider, Family family, double y_bar,
                              double T, double dt);

/// Time slices a trace with these arguments will request.
std::vector<double> trace_times(double T, double dt);

struct GridlineComparison {
  double sup_distance = 0.0;
  double t_at_sup = 0.0;
  std::size_t compared = 0;
};

/// Distance in x between the path and the lattice line through its start.
/// Throws MismatchedStart unless the start lies on a lattice line.
GridlineComparison compare_with_gridline(const CharGrid& grid, const CharPath& path);

struct SpeedRange {
  double min_speed;
  double max_speed;
};

/// Extremes of |dx/dt| over the steps of a path.
SpeedRange path_speeds(const CharPath& path);

void write_path_csv(const CharPath& path, std::ostream& os);

}  // namespace vwave
