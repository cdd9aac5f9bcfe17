#include "vwave/chartrace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "vwave/errors.hpp"
#include "vwave/io.hpp"

namespace vwave {

const Isochrone& GridProvider::at(double t) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(t);
  if (it != cache_.end()) return it->second;
  if (t < 0.0 || t > grid_->T())
    throw ProviderGap("grid has no slice at t = " + num(t) + " (T = " + num(grid_->T()) + ")");
  try {
    return cache_.emplace(t, extract_isochrone(*grid_, t)).first->second;
  } catch (const EmptyLevelSet& e) {
    throw ProviderGap(e.what());
  }
}

OracleProvider::OracleProvider(CoefficientField field, const std::vector<FDState>& snapshots)
    : field_(std::move(field)) {
  for (const FDState& s : snapshots) slices_.push_back(fd_profile(s, field_));
}

const Isochrone& OracleProvider::at(double t) const {
  for (const Isochrone& iso : slices_)
    if (std::abs(iso.t_star - t) <= 1e-12 * std::max(1.0, std::abs(t))) return iso;
  throw ProviderGap("oracle has no snapshot at t = " + num(t));
}

double x_of_energy_coordinate(const Isochrone& iso, Family family, double coord) {
  const auto& pts = iso.points;
  auto W = [family](const IsoPoint& p) {
    return p.x + (family == Family::backward ? p.mu_minus_cum : p.mu_plus_cum);
  };
  if (pts.empty() || coord < W(pts.front()) || coord > W(pts.back()))
    throw OutOfDomain("energy coordinate " + num(coord) + " outside the slice at t = " +
                      num(iso.t_star));
  std::size_t lo = 0, hi = pts.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (W(pts[mid]) <= coord ? lo : hi) = mid;
  }
  const double w0 = W(pts[lo]), w1 = W(pts[hi]);
  const double f = w1 > w0 ? (coord - w0) / (w1 - w0) : 0.0;
  return pts[lo].x + f * (pts[hi].x - pts[lo].x);
}

std::vector<double> trace_times(double T, double dt) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw std::invalid_argument("trace: need dt > 0, T >= 0");
  const auto n = static_cast<long>(std::ceil(T / dt - 1e-9));
  std::vector<double> ts;
  for (long k = 0; k < n; ++k) ts.push_back(static_cast<double>(k) * dt);
  ts.push_back(T);
  return ts;
}

namespace {

// Right-hand side of the omega / upsilon equation at time t.
struct Rate {
  double value;
  double x;
};

Rate rate(const SolutionProvider& pr, Family family, double t, double coord) {
  const Isochrone& iso = pr.at(t);
  const double x = x_of_energy_coordinate(iso, family, coord);
  const double u = sample_u(iso, x);
  const WaveSpeeds w = eval_wave_speeds(pr.field(), x, u);
  const double G = iso.G_cum_at(x);
  return family == Family::backward ? Rate{w.lambda_minus + G, x} : Rate{w.lambda_plus - G, x};
}

}  // namespace

CharPath trace_characteristic(const SolutionProvider& provider, Family family, double y_bar,
                              double T, double dt) {
  const std::vector<double> ts = trace_times(T, dt);
  CharPath path;
  path.family = family;
  path.y_bar = y_bar;
  path.source = provider.name();

  const Isochrone& start = provider.at(0.0);
  double coord = y_bar + (family == Family::backward ? start.mu_minus_at(y_bar)
                                                     : start.mu_plus_at(y_bar));
  Rate r0 = rate(provider, family, 0.0, coord);
  path.samples.push_back({0.0, coord, r0.x});
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double t0 = ts[k - 1], t1 = ts[k], h = t1 - t0;
    const double pred = coord + h * r0.value;
    const Rate r1 = rate(provider, family, t1, pred);
    coord += 0.5 * h * (r0.value + r1.value);
    r0 = rate(provider, family, t1, coord);
    path.samples.push_back({t1, coord, r0.x});
  }
  return path;
}

GridlineComparison compare_with_gridline(const CharGrid& grid, const CharPath& path) {
  const double L = grid.labels().label_of_x(path.y_bar);
  const double line = std::round(L);
  if (std::abs(L - line) > 1e-9 || line < 0 || line > grid.nX() - 1)
    throw MismatchedStart("start " + num(path.y_bar) + " has label " + num(L) +
                          ", not on a lattice line");
  const int c = static_cast<int>(line);
  // (t, x) along the lattice line, t increasing.
  std::vector<std::pair<double, double>> tx;
  if (path.family == Family::backward) {
    for (const CharNode& n : grid.column(c).nodes) tx.emplace_back(n.t, n.x);
  } else {
    const int m = grid.nX() - 1 - c;
    for (int i = c; grid.contains(i, m); ++i) tx.emplace_back(grid.at(i, m).t, grid.at(i, m).x);
  }
  GridlineComparison out;
  for (const PathSample& s : path.samples) {
    if (tx.empty() || s.t < tx.front().first || s.t > tx.back().first) continue;
    auto it = std::lower_bound(tx.begin(), tx.end(), s.t,
                               [](const auto& p, double t) { return p.first < t; });
    double x;
    if (it == tx.begin()) {
      x = it->second;
    } else {
      const auto& a = *(it - 1);
      const auto& b = *it;
      x = a.second + (s.t - a.first) / (b.first - a.first) * (b.second - a.second);
    }
    const double d = std::abs(x - s.x);
    if (d > out.sup_distance || out.compared == 0) {
      out.sup_distance = d;
      out.t_at_sup = s.t;
    }
    ++out.compared;
  }
  return out;
}

SpeedRange path_speeds(const CharPath& path) {
  SpeedRange r{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t k = 1; k < path.samples.size(); ++k) {
    const PathSample& a = path.samples[k - 1];
    const PathSample& b = path.samples[k];
    const double v = std::abs(b.x - a.x) / (b.t - a.t);
    r.min_speed = std::min(r.min_speed, v);
    r.max_speed = std::max(r.max_speed, v);
  }
  return r;
}

void write_path_csv(const CharPath& path, std::ostream& os) {
  os << "t,coord,x\n";
  for (const PathSample& s : path.samples)
    os << num(s.t) << ',' << num(s.coord) << ',' << num(s.x) << '\n';
}

}  // namespace vwave
