#include "vwave/physmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "vwave/errors.hpp"
#include "vwave/io.hpp"

namespace vwave {

double jacobian_det(const CharNode& n, const DerivedCoeffs& c) {
  const double xX = rhs_X(n, c).x;
  const double xY = rhs_Y(n, c).x;
  return (1.0 / c.c2 - 1.0 / c.c1) * c.alpha * xX * xY;
}

Reconstructed reconstruct_riemann(const CharNode& n, const DerivedCoeffs& c, double eps_floor) {
  (void)c;
  const double inf = std::numeric_limits<double>::infinity();
  Reconstructed r;
  if (n.sigma > eps_floor) {
    r.state.R = n.xi / n.sigma;
    r.state.Rt2 = (1.0 - n.sigma) / n.sigma;
  } else {
    r.state.R = std::copysign(inf, n.xi);
    r.state.Rt2 = inf;
    r.concentrated_minus = true;
  }
  if (n.eta > eps_floor) {
    r.state.S = n.zeta / n.eta;
    r.state.St2 = (1.0 - n.eta) / n.eta;
  } else {
    r.state.S = std::copysign(inf, n.zeta);
    r.state.St2 = inf;
    r.concentrated_plus = true;
  }
  return r;
}

namespace {

struct EdgeCrossing {
  IsoPoint point;
  double f;  // position along the edge in units of h
};

// Node fields in a fixed order: the first six are governed along the edge
// direction, the last three are transported across it.
using Fields = std::array<double, 9>;

Fields pack(const CharNode& n, bool along_Y) {
  if (along_Y) return {n.t, n.x, n.u, n.p, n.sigma, n.xi, n.q, n.eta, n.zeta};
  return {n.t, n.x, n.u, n.q, n.eta, n.zeta, n.p, n.sigma, n.xi};
}

IsoPoint unpack(const Fields& v, bool along_Y) {
  IsoPoint p;
  p.x = v[1];
  p.u = v[2];
  if (along_Y) {
    p.p = v[3], p.sigma = v[4], p.xi = v[5], p.q = v[6], p.eta = v[7], p.zeta = v[8];
  } else {
    p.q = v[3], p.eta = v[4], p.zeta = v[5], p.p = v[6], p.sigma = v[7], p.xi = v[8];
  }
  return p;
}

Fields slopes(const CoefficientField& field, const CharNode& n, double scale, bool along_Y) {
  const DerivedCoeffs d = derive(field, n.x, n.u);
  Fields s{};
  if (along_Y) {
    const YDerivs f = rhs_Y(n, d);
    s = {f.t, f.x, f.u, f.p, f.sigma, f.xi, 0, 0, 0};
  } else {
    const XDerivs f = rhs_X(n, d);
    s = {f.t, f.x, f.u, f.q, f.eta, f.zeta, 0, 0, 0};
  }
  for (double& v : s) v *= scale;
  return s;
}

// Crossing of t = t_star on the edge a -> b (t_a <= t_star < t_b).
//
// Data breakpoints sit on half-integer lattice lines, so the fields
// governed along the edge may have a kink at its midpoint: they are
// interpolated through a midpoint value built from the one-sided
// derivatives at both ends. The other fields jump there when the midpoint
// lies on a breakpoint line (`knot`), in which case the value of the near
// end is used; otherwise they are interpolated linearly.
EdgeCrossing cross_edge(const CoefficientField& field, const CharNode& a, const CharNode& b,
                        double scale_a, double scale_b, bool along_Y, bool knot, double h,
                        double t_star) {
  const Fields va = pack(a, along_Y), vb = pack(b, along_Y);
  if (t_star == a.t) {
    IsoPoint p = unpack(va, along_Y);
    return {p, 0.0};
  }
  const Fields da = slopes(field, a, scale_a, along_Y);
  const Fields db = slopes(field, b, scale_b, along_Y);
  const double hh = 0.5 * h;
  Fields vm{};
  for (std::size_t k = 0; k < 6; ++k)
    vm[k] = 0.5 * ((va[k] + hh * da[k]) + (vb[k] - hh * db[k]));
  vm[0] = std::clamp(vm[0], a.t, b.t);

  Fields v{};
  double f;
  if (t_star < vm[0]) {
    const double g = (t_star - a.t) / (vm[0] - a.t);
    f = 0.5 * g;
    for (std::size_t k = 0; k < 6; ++k) v[k] = va[k] + g * (vm[k] - va[k]);
  } else {
    const double g = vm[0] < b.t ? (t_star - vm[0]) / (b.t - vm[0]) : 0.0;
    f = 0.5 + 0.5 * g;
    for (std::size_t k = 0; k < 6; ++k) v[k] = vm[k] + g * (vb[k] - vm[k]);
  }
  for (std::size_t k = 6; k < 9; ++k)
    v[k] = knot ? (f < 0.5 ? va[k] : vb[k]) : va[k] + f * (vb[k] - va[k]);
  return {unpack(v, along_Y), f};
}

// One family of lattice lines (columns or rows) parametrized by the label
// of its curve point, in units of h. The physical coordinate is taken
// piecewise linear in the label with the break on the half-line, which is
// exact across data breakpoints.
class LineFamily {
 public:
  LineFamily(const LabelMap& labels, const std::vector<char>& knot, bool columns)
      : labels_(labels), knot_(knot), columns_(columns) {}

  /// int w d(coordinate) between two labels of one cell, w linear in the
  /// label except across a breakpoint, where each side keeps its end value.
  double integral(double la, double wa, double lb, double wb) const {
    if (la > lb) {
      std::swap(la, lb);
      std::swap(wa, wb);
    }
    if (!(lb > la)) return 0.0;
    const double half = std::floor(la + 0.5) + 0.5;  // first half-line above la
    const int j = static_cast<int>(half - 0.5);
    if (half < lb && j >= 0 && j < static_cast<int>(knot_.size()) && knot_[static_cast<std::size_t>(j)]) {
      const double left = coord(j) + 0.5 * labels_.h() * scale(j);
      const double right = coord(j + 1) - 0.5 * labels_.h() * scale(j + 1);
      return wa * (left - at(la)) + wb * (at(lb) - right);
    }
    return 0.5 * (wa + wb) * (at(lb) - at(la));
  }

 private:
  double coord(int i) const {
    i = std::clamp(i, 0, labels_.columns() - 1);
    return columns_ ? labels_.X_of(i) : labels_.Y_of(i);
  }
  double scale(int i) const {
    i = std::clamp(i, 0, labels_.columns() - 1);
    return columns_ ? labels_.dX_dlabel(i) : labels_.dY_dlabel(i);
  }
  double at(double l) const {
    const double i = std::floor(l);
    const double f = l - i;
    const int k = static_cast<int>(i);
    if (f <= 0.5) return coord(k) + f * labels_.h() * scale(k);
    return coord(k + 1) - (1.0 - f) * labels_.h() * scale(k + 1);
  }

  const LabelMap& labels_;
  const std::vector<char>& knot_;
  bool columns_;
};

// Largest m in column i with t(i, m) <= t_star, or m_begin - 1.
int last_below(const CharGrid& g, int i, double t_star) {
  const auto& nodes = g.column(i).nodes;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t_star,
                             [](double t, const CharNode& n) { return t < n.t; });
  return g.column(i).m_begin + static_cast<int>(it - nodes.begin()) - 1;
}

std::size_t upper_index(const std::vector<IsoPoint>& pts, double x) {
  auto it = std::upper_bound(pts.begin(), pts.end(), x,
                             [](double v, const IsoPoint& p) { return v < p.x; });
  return static_cast<std::size_t>(it - pts.begin());
}

template <class F>
double interp_by_x(const std::vector<IsoPoint>& pts, double x, F&& field) {
  if (pts.empty()) return 0.0;
  if (x < pts.front().x) return 0.0;
  const std::size_t k = upper_index(pts, x);
  if (k >= pts.size()) return field(pts.back());
  const IsoPoint& a = pts[k - 1];
  const IsoPoint& b = pts[k];
  if (!(b.x > a.x)) return field(a);
  const double f = (x - a.x) / (b.x - a.x);
  return field(a) + f * (field(b) - field(a));
}

}  // namespace

double Isochrone::mu_minus_at(double x) const {
  return interp_by_x(points, x, [](const IsoPoint& p) { return p.mu_minus_cum; });
}
double Isochrone::mu_plus_at(double x) const {
  return interp_by_x(points, x, [](const IsoPoint& p) { return p.mu_plus_cum; });
}
double Isochrone::G_cum_at(double x) const {
  return interp_by_x(points, x, [](const IsoPoint& p) { return p.G_cum; });
}

Isochrone extract_isochrone(const CharGrid& g, double t_star, const IsochroneOptions& opt) {
  if (!(t_star >= 0.0)) throw EmptyLevelSet("isochrone time must be nonnegative");
  const int n = g.nX();
  const double h = g.h();
  std::vector<int> below(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) below[static_cast<std::size_t>(i)] = last_below(g, i, t_star);

  // Breakpoint lines: between columns i, i + 1 at label i + 1/2; between
  // rows m, m + 1 at the label of column n - 2 - m plus 1/2.
  std::vector<char> knot(static_cast<std::size_t>(n), 0);
  for (double l : g.labels().knot_labels()) {
    const long k = std::lround(l - 0.5);
    if (k >= 0 && k < n && std::abs(l - 0.5 - static_cast<double>(k)) < 1e-9)
      knot[static_cast<std::size_t>(k)] = 1;
  }
  auto col_knot = [&](int i) { return knot[static_cast<std::size_t>(i)] != 0; };
  auto row_knot = [&](int m) {
    const int i = n - 2 - m;
    return i >= 0 && knot[static_cast<std::size_t>(i)] != 0;
  };

  std::vector<IsoPoint> pts;
  for (int i = 0; i < n; ++i) {
    const auto& col = g.column(i);
    const int k = below[static_cast<std::size_t>(i)];
    // Vertical edge (i, k) - (i, k + 1).
    if (k >= col.m_begin && k + 1 < g.m_end(i)) {
      const CharNode& a = g.at(i, k);
      const CharNode& b = g.at(i, k + 1);
      const EdgeCrossing c =
          cross_edge(g.field(), a, b, g.row_scale(k), g.row_scale(k + 1), true,
                     row_knot(k), h, t_star);
      const double f = c.f;
      IsoPoint p = c.point;
      p.column = i;
      if (f == 0.0) p.row = k;
      p.X_label = g.X_label(i);
      p.Yhat_label = g.Yhat_label(k) + f * h;
      p.p_label = p.p * g.col_scale(i);
      p.q_label = p.q * g.row_scale(f < 0.5 ? k : k + 1);
      pts.push_back(p);
    }
    // Horizontal edges (i, m) - (i + 1, m).
    if (i + 1 < n) {
      const int lo = std::max({g.column(i + 1).m_begin, below[static_cast<std::size_t>(i + 1)] + 1,
                               col.m_begin});
      const int hi = std::min({k, g.m_end(i + 1) - 1, g.m_end(i) - 1});
      for (int m = lo; m <= hi; ++m) {
        const CharNode& a = g.at(i, m);
        const CharNode& b = g.at(i + 1, m);
        if (!(a.t <= t_star && t_star < b.t)) continue;
        const EdgeCrossing c =
            cross_edge(g.field(), a, b, g.col_scale(i), g.col_scale(i + 1), false,
                       col_knot(i), h, t_star);
        const double f = c.f;
        IsoPoint p = c.point;
        p.row = m;
        if (f == 0.0) p.column = i;
        p.X_label = g.X_label(i) + f * h;
        p.Yhat_label = g.Yhat_label(m);
        p.p_label = p.p * g.col_scale(f < 0.5 ? i : i + 1);
        p.q_label = p.q * g.row_scale(m);
        pts.push_back(p);
      }
    }
  }
  if (pts.empty()) throw EmptyLevelSet("no lattice edge crosses t = " + num(t_star));

  std::stable_sort(pts.begin(), pts.end(), [](const IsoPoint& a, const IsoPoint& b) {
    return a.X_label - a.Yhat_label < b.X_label - b.Yhat_label;
  });
  // Crossings found twice (exactly at a node) collapse to one point that
  // anchors both energy coordinates.
  std::vector<IsoPoint> uniq;
  for (const IsoPoint& p : pts) {
    if (!uniq.empty() && std::abs(uniq.back().X_label - p.X_label) <= 1e-12 * h &&
        std::abs(uniq.back().Yhat_label - p.Yhat_label) <= 1e-12 * h) {
      IsoPoint& q = uniq.back();
      if (p.column >= 0 && q.column < 0) {
        q.column = p.column;
        q.p_label = p.p_label;
      }
      if (p.row >= 0 && q.row < 0) {
        q.row = p.row;
        q.q_label = p.q_label;
      }
      continue;
    }
    uniq.push_back(p);
  }
  pts.swap(uniq);

  // The level set must run from the top row to the last column.
  const IsoPoint& first = pts.front();
  const IsoPoint& last = pts.back();
  const bool starts_on_top = std::abs(first.Yhat_label - g.Yhat_label(n - 1)) <= 1e-12 * h;
  const bool ends_on_right = std::abs(last.X_label - g.X_label(n - 1)) <= 1e-12 * h;
  if (!starts_on_top || !ends_on_right)
    throw EmptyLevelSet("level set t = " + num(t_star) + " leaves the computed region");

  // Both coordinate families as functions of a curve label in units of h:
  // column i has label i, row m the label n - 1 - m of its curve point.
  const LineFamily cols{g.labels(), knot, true};
  const LineFamily rows{g.labels(), knot, false};
  auto col_label = [h](const IsoPoint& p) { return p.X_label / h; };
  auto row_label = [h](const IsoPoint& p) { return -p.Yhat_label / h; };

  // Energy coordinates along the curve: d omega = p dX, d upsilon = q dY,
  // both starting at x, integrated segment by segment.
  const std::size_t N = pts.size();
  std::vector<double> omega(N), upsilon(N);
  omega[0] = upsilon[0] = pts[0].x;
  for (std::size_t k = 1; k < N; ++k) {
    const IsoPoint& a = pts[k - 1];
    const IsoPoint& b = pts[k];
    omega[k] = omega[k - 1] + cols.integral(col_label(a), a.p, col_label(b), b.p);
    upsilon[k] = upsilon[k - 1] + rows.integral(row_label(a), a.q, row_label(b), b.q);
  }

  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < N; ++k) {
    IsoPoint& p = pts[k];
    p.mu_minus_cum = omega[k] - p.x;
    p.mu_plus_cum = upsilon[k] - p.x;
    p.Rt2 = p.sigma > opt.eps_conc ? (1.0 - p.sigma) / p.sigma : inf;
    p.St2 = p.eta > opt.eps_conc ? (1.0 - p.eta) / p.eta : inf;
    p.concentrated = p.sigma < opt.eps_conc || p.eta < opt.eps_conc;
  }

  // Source integral along the curve, using whichever parametrization keeps
  // the integrand bounded: G dx per unit Y or per unit X.
  const CoefficientField& field = g.field();
  auto density = [&](const IsoPoint& p, bool by_row) {
    const DerivedCoeffs d = derive(field, p.x, p.u);
    const SourceWeights w = source_weights(d);
    const double D = d.c2 - d.c1;
    if (by_row) {
      const double k2 = d.c2 / D;
      const double R = p.xi / p.sigma;
      return (w.A * R * R * p.zeta + w.B * R * (1.0 - p.eta) / k2 + w.C * R * p.zeta) * p.q;
    }
    const double k1 = -d.c1 / D;
    const double S = p.zeta / p.eta;
    return (w.A * (1.0 - p.sigma) / k1 * S + w.B * p.xi * S * S + w.C * p.xi * S) * p.p;
  };
  pts[0].G_cum = 0.0;
  for (std::size_t k = 1; k < N; ++k) {
    const IsoPoint& a = pts[k - 1];
    const IsoPoint& b = pts[k];
    double inc = 0.0;
    if (!(a.concentrated && b.concentrated)) {
      const bool by_row = std::min(a.sigma, b.sigma) >= std::min(a.eta, b.eta);
      inc = by_row ? rows.integral(row_label(a), density(a, true), row_label(b), density(b, true))
                   : cols.integral(col_label(a), density(a, false), col_label(b),
                                   density(b, false));
    }
    pts[k].G_cum = pts[k - 1].G_cum + inc;
  }

  Isochrone iso;
  iso.t_star = t_star;
  iso.eps_conc = opt.eps_conc;
  // Runs of concentrated or stalled segments form atoms.
  bool in_run = false;
  for (std::size_t k = 1; k < N; ++k) {
    const IsoPoint& a = pts[k - 1];
    const IsoPoint& b = pts[k];
    const double dm = b.mu_minus_cum - a.mu_minus_cum;
    const double dp = b.mu_plus_cum - a.mu_plus_cum;
    const bool stalled = std::abs(b.x - a.x) <= opt.merge_tol && (dm > 0.0 || dp > 0.0);
    const bool conc = a.concentrated || b.concentrated || stalled;
    if (conc && in_run) {
      iso.atoms.back().mass_minus += dm;
      iso.atoms.back().mass_plus += dp;
    } else if (conc) {
      iso.atoms.push_back({a.x, dm, dp});
    }
    in_run = conc;
  }
  iso.points = std::move(pts);
  return iso;
}

double sample_u(const Isochrone& iso, double x_star) {
  const auto& pts = iso.points;
  if (pts.empty() || x_star < pts.front().x || x_star > pts.back().x)
    throw OutOfDomain("x = " + num(x_star) + " outside the isochrone at t = " + num(iso.t_star));
  std::size_t k = upper_index(pts, x_star);
  if (k >= pts.size()) return pts.back().u;
  if (k == 0) return pts.front().u;
  const IsoPoint& a = pts[k - 1];
  const IsoPoint& b = pts[k];
  if (!(b.x > a.x)) return a.u;
  const double f = (x_star - a.x) / (b.x - a.x);
  return a.u + f * (b.u - a.u);
}

double sample_u(const CharGrid& grid, double t_star, double x_star) {
  Isochrone iso;
  try {
    iso = extract_isochrone(grid, t_star);
  } catch (const EmptyLevelSet& e) {
    throw OutOfDomain(std::string("t outside the computed region: ") + e.what());
  }
  return sample_u(iso, x_star);
}

std::vector<CriticalNode> critical_nodes(const CharGrid& grid, double tol) {
  if (!(tol > 0.0)) tol = grid.h() * grid.h();
  std::vector<CriticalNode> out;
  for (int i = 0; i < grid.nX(); ++i) {
    const auto& col = grid.column(i);
    for (std::size_t k = 0; k < col.nodes.size(); ++k) {
      const CharNode& n = col.nodes[k];
      const double det = jacobian_det(n, derive(grid.field(), n.x, n.u));
      if (std::abs(det) < tol) out.push_back({i, col.m_begin + static_cast<int>(k), det});
    }
  }
  return out;
}

void write_isochrone_csv(const Isochrone& iso, std::ostream& os) {
  os << "x,u,sigma,eta,Rt2,St2,mu_minus_cum,mu_plus_cum,concentrated\n";
  for (const IsoPoint& p : iso.points)
    os << num(p.x) << ',' << num(p.u) << ',' << num(p.sigma) << ',' << num(p.eta) << ','
       << num(p.Rt2) << ',' << num(p.St2) << ',' << num(p.mu_minus_cum) << ','
       << num(p.mu_plus_cum) << ',' << (p.concentrated ? 1 : 0) << '\n';
}

void write_grid_dump(const CharGrid& grid, const std::string& csv_path,
                     const std::string& sidecar_path, const std::string& scenario_hash) {
  std::ofstream os(csv_path);
  if (!os) throw std::runtime_error("cannot write " + csv_path);
  os << "i,m,X,Y,t,x,u,p,q,sigma,eta,xi,zeta,residual\n";
  for (int i = 0; i < grid.nX(); ++i) {
    const auto& col = grid.column(i);
    for (std::size_t k = 0; k < col.nodes.size(); ++k) {
      const int m = col.m_begin + static_cast<int>(k);
      const CharNode& n = col.nodes[k];
      os << i << ',' << m << ',' << num(grid.X(i)) << ',' << num(grid.Y(m)) << ',' << num(n.t)
         << ',' << num(n.x) << ',' << num(n.u) << ',' << num(n.p) << ',' << num(n.q) << ','
         << num(n.sigma) << ',' << num(n.eta) << ',' << num(n.xi) << ',' << num(n.zeta) << ','
         << num(col.residual[k]) << '\n';
    }
  }
  nlohmann::ordered_json j;
  j["h"] = grid.h();
  j["X0"] = grid.X(0);
  j["Y0"] = grid.Y(0);
  j["nX"] = grid.nX();
  j["nY"] = grid.nY();
  j["orientation"] = grid.orientation();
  j["scenario_hash"] = scenario_hash;
  j["layout"] = "long format, one node per line; rows of column i start at m = nX - 1 - i";
  std::ofstream sc(sidecar_path);
  if (!sc) throw std::runtime_error("cannot write " + sidecar_path);
  sc << j.dump(2) << '\n';
}

}  // namespace vwave
