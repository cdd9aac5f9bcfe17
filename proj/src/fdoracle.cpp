#include "vwave/fdoracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "vwave/errors.hpp"
#include "vwave/io.hpp"

namespace vwave {

FDState fd_initial_state(const CoefficientField& field, const InitialData& data, Interval range,
                         double dx) {
  if (!(dx > 0.0) || !(range.hi > range.lo))
    throw std::invalid_argument("fd: need dx > 0 and a nonempty range");
  FDState s;
  s.x0 = range.lo;
  s.dx = dx;
  const auto n = static_cast<std::size_t>(std::ceil(range.length() / dx - 1e-9)) + 1;
  s.u.resize(n);
  s.R.resize(n);
  s.S.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = s.x(k);
    const RiemannState r = riemann_init(field, data, x);
    s.u[k] = data.u0(x);
    s.R[k] = r.R;
    s.S[k] = r.S;
  }
  return s;
}

double max_speed(const FDState& s, const CoefficientField& field) {
  double v = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const WaveSpeeds w = eval_wave_speeds(field, s.x(k), s.u[k]);
    v = std::max({v, std::abs(w.lambda_minus), std::abs(w.lambda_plus)});
  }
  return v;
}

namespace {

struct Rates {
  std::vector<double> u, R, S;
};

Rates rates(const FDState& s, const CoefficientField& field) {
  const std::size_t n = s.size();
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  auto at = [last](const std::vector<double>& v, std::ptrdiff_t k) {
    return v[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, last))];
  };
  Rates r{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  const double inv = 1.0 / (2.0 * s.dx);
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::ptrdiff_t>(k);
    const double R = s.R[k], S = s.S[k];
    const DerivedCoeffs c = derive(field, s.x(k), s.u[k]);
    // c1 < 0: information comes from the right; c2 > 0: from the left.
    const double Rx = (-3.0 * R + 4.0 * at(s.R, i + 1) - at(s.R, i + 2)) * inv;
    const double Sx = (3.0 * S - 4.0 * at(s.S, i - 1) + at(s.S, i - 2)) * inv;
    const double quad = c.a1 * R * R - (c.a1 + c.a2) * R * S + c.a2 * S * S;
    r.R[k] = (quad + c.c2 * c.b * S - c.d1 * R - c.c1 * Rx) / c.alpha;
    r.S[k] = (-quad + c.c1 * c.b * R - c.d2 * S - c.c2 * Sx) / c.alpha;
    r.u[k] = (c.c2 * S - c.c1 * R) / (c.alpha * (c.c2 - c.c1));
  }
  return r;
}

}  // namespace

FDState step(const FDState& s, const CoefficientField& field, double dt) {
  const double cfl = max_speed(s, field) * dt / s.dx;
  if (cfl > 0.5 + 1e-12)
    throw CFLViolation("CFL number " + num(cfl) + " exceeds 0.5 at t = " + num(s.t));
  const Rates k1 = rates(s, field);
  FDState mid = s;
  for (std::size_t k = 0; k < s.size(); ++k) {
    mid.u[k] += dt * k1.u[k];
    mid.R[k] += dt * k1.R[k];
    mid.S[k] += dt * k1.S[k];
  }
  mid.t += dt;
  const Rates k2 = rates(mid, field);
  FDState out = s;
  for (std::size_t k = 0; k < s.size(); ++k) {
    out.u[k] += 0.5 * dt * (k1.u[k] + k2.u[k]);
    out.R[k] += 0.5 * dt * (k1.R[k] + k2.R[k]);
    out.S[k] += 0.5 * dt * (k1.S[k] + k2.S[k]);
  }
  out.t = s.t + dt;
  return out;
}

std::vector<FDState> fd_run(const CoefficientField& field, const InitialData& data, double T,
                            double dx, const std::vector<double>& times,
                            const FDRunOptions& opt) {
  if (!(T >= 0.0)) throw std::invalid_argument("fd: T must be >= 0");
  if (!std::is_sorted(times.begin(), times.end()) ||
      (!times.empty() && (times.front() < 0.0 || times.back() > T * (1.0 + 1e-12))))
    throw std::invalid_argument("fd: snapshot times must be sorted and within [0, T]");
  const double N = field.bounds().speed_upper();
  const double pad = N * T + 1.0;
  FDState s = fd_initial_state(field, data, {data.support.lo - pad, data.support.hi + pad}, dx);
  // A bound-based step keeps the CFL number below opt.cfl for any state.
  const double dt_max = std::min(opt.cfl, 0.5) * dx / N;

  std::vector<FDState> out;
  std::size_t next = 0;
  auto record = [&]() {
    while (next < times.size() && std::abs(times[next] - s.t) <= 1e-12 * std::max(1.0, T)) {
      out.push_back(s);
      out.back().t = times[next];
      ++next;
    }
  };
  record();
  while (next < times.size()) {
    const double target = times[next];
    const double remaining = target - s.t;
    const auto n = static_cast<long>(std::ceil(remaining / dt_max - 1e-9));
    const double dt = remaining / static_cast<double>(std::max(n, 1L));
    for (long k = 0; k < n; ++k) {
      s = step(s, field, dt);
      double peak = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j)
        peak = std::max({peak, std::abs(s.R[j]), std::abs(s.S[j])});
      if (!(peak <= opt.blowup_cap))
        throw BlowupSuspected("max(|R|, |S|) = " + num(peak) + " exceeds the cap at t = " +
                                  num(s.t),
                              s.t - dt);
    }
    s.t = target;
    record();
  }
  return out;
}

double fd_energy(const FDState& s, const CoefficientField& field) {
  double E = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const DerivedCoeffs c = derive(field, s.x(k), s.u[k]);
    const double D = c.c2 - c.c1;
    const double e = (-c.c1 * s.R[k] * s.R[k] + c.c2 * s.S[k] * s.S[k]) / D;
    if (k > 0) E += 0.5 * (prev + e) * s.dx;
    prev = e;
  }
  return E;
}

Isochrone fd_profile(const FDState& s, const CoefficientField& field) {
  Isochrone iso;
  iso.t_star = s.t;
  iso.points.reserve(s.size());
  double gm = 0.0, gp = 0.0, gG = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const DerivedCoeffs c = derive(field, s.x(k), s.u[k]);
    const double D = c.c2 - c.c1;
    const double R = s.R[k], S = s.S[k];
    const SourceWeights w = source_weights(c);
    IsoPoint p;
    p.x = s.x(k);
    p.u = s.u[k];
    p.Rt2 = -c.c1 / D * R * R;
    p.St2 = c.c2 / D * S * S;
    p.sigma = 1.0 / (1.0 + p.Rt2);
    p.eta = 1.0 / (1.0 + p.St2);
    p.xi = R * p.sigma;
    p.zeta = S * p.eta;
    p.G_cum = w.A * R * R * S + w.B * R * S * S + w.C * R * S;  // density for now
    if (k > 0) {
      const IsoPoint& q = iso.points.back();
      gm += 0.5 * (q.Rt2 + p.Rt2) * s.dx;
      gp += 0.5 * (q.St2 + p.St2) * s.dx;
    }
    p.mu_minus_cum = gm;
    p.mu_plus_cum = gp;
    iso.points.push_back(p);
  }
  double prev = 0.0;
  for (std::size_t k = 0; k < iso.points.size(); ++k) {
    const double g = iso.points[k].G_cum;
    if (k > 0) gG += 0.5 * (prev + g) * s.dx;
    prev = g;
    iso.points[k].G_cum = gG;
  }
  return iso;
}

std::vector<ErrorRow> fd_compare(const std::vector<FDState>& oracle, const CharGrid& grid) {
  std::vector<ErrorRow> rows;
  for (const FDState& s : oracle) {
    if (s.t < 0.0 || s.t > grid.T())
      throw WindowMismatch("oracle time " + num(s.t) + " outside the grid's [0, " +
                           num(grid.T()) + "]");
    Isochrone iso;
    try {
      iso = extract_isochrone(grid, s.t);
    } catch (const EmptyLevelSet& e) {
      throw WindowMismatch(e.what());
    }
    const auto& pts = iso.points;
    // R and S at the isochrone points, for interpolation in x.
    std::vector<double> Rg(pts.size()), Sg(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      Rg[k] = pts[k].sigma > 0.0 ? pts[k].xi / pts[k].sigma : 0.0;
      Sg[k] = pts[k].eta > 0.0 ? pts[k].zeta / pts[k].eta : 0.0;
    }
    auto interp = [&](const std::vector<double>& v, double x) {
      auto it = std::upper_bound(pts.begin(), pts.end(), x,
                                 [](double xv, const IsoPoint& p) { return xv < p.x; });
      std::size_t k = static_cast<std::size_t>(it - pts.begin());
      k = std::clamp<std::size_t>(k, 1, pts.size() - 1);
      const double x0 = pts[k - 1].x, x1 = pts[k].x;
      const double f = x1 > x0 ? (x - x0) / (x1 - x0) : 1.0;
      return v[k - 1] + f * (v[k] - v[k - 1]);
    };

    ErrorRow r{s.t, 0, 0, 0, 0, 0, 0, 0, 0};
    const double far = s.u.front();
    double du2 = 0.0, dR2 = 0.0, dS2 = 0.0, n2 = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double x = s.x(k);
      if (x < iso.x_min() || x > iso.x_max()) continue;
      const double eu = sample_u(iso, x) - s.u[k];
      const double eR = interp(Rg, x) - s.R[k];
      const double eS = interp(Sg, x) - s.S[k];
      r.u_linf = std::max(r.u_linf, std::abs(eu));
      r.R_linf = std::max(r.R_linf, std::abs(eR));
      r.S_linf = std::max(r.S_linf, std::abs(eS));
      du2 += eu * eu;
      dR2 += eR * eR;
      dS2 += eS * eS;
      n2 += (s.u[k] - far) * (s.u[k] - far);
      ++r.points;
    }
    if (r.points == 0)
      throw WindowMismatch("no oracle node inside the isochrone at t = " + num(s.t));
    r.u_l2 = std::sqrt(du2 * s.dx);
    r.R_l2 = std::sqrt(dR2 * s.dx);
    r.S_l2 = std::sqrt(dS2 * s.dx);
    r.u_rel_l2 = n2 > 0.0 ? std::sqrt(du2 / n2) : r.u_l2;
    rows.push_back(r);
  }
  return rows;
}

void write_fd_snapshot_csv(const FDState& s, std::ostream& os) {
  os << "x,u,R,S\n";
  for (std::size_t k = 0; k < s.size(); ++k)
    os << num(s.x(k)) << ',' << num(s.u[k]) << ',' << num(s.R[k]) << ',' << num(s.S[k]) << '\n';
}

}  // namespace vwave
