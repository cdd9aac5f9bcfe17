#include "vwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "vwave/errors.hpp"
#include "vwave/io.hpp"

namespace vwave {

EnergyReport total_energy(const Isochrone& iso, double E0) {
  EnergyReport r;
  r.t = iso.t_star;
  const auto& pts = iso.points;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const IsoPoint& a = pts[k - 1];
    const IsoPoint& b = pts[k];
    const double dm = b.mu_minus_cum - a.mu_minus_cum;
    const double dp = b.mu_plus_cum - a.mu_plus_cum;
    const bool stalled = std::abs(b.x - a.x) <= 1e-12 && (dm > 0.0 || dp > 0.0);
    if (a.concentrated || b.concentrated || stalled) continue;
    r.E_ac_minus += dm;
    r.E_ac_plus += dp;
  }
  for (const Atom& at : iso.atoms) r.E_atoms += at.mass_minus + at.mass_plus;
  r.E_total = r.E_ac_minus + r.E_ac_plus + r.E_atoms;
  r.Q = interaction_potential(iso);
  r.rel_drift = (r.E_total - E0) / std::max(E0, 1.0);
  return r;
}

double interaction_potential(const Isochrone& iso) {
  // Increments of both measures live on the segments between consecutive
  // points; segment order is x order.
  const auto& pts = iso.points;
  double below_plus = 0.0;  // mu_+ mass of earlier segments
  double Q = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double dm = pts[k].mu_minus_cum - pts[k - 1].mu_minus_cum;
    const double dp = pts[k].mu_plus_cum - pts[k - 1].mu_plus_cum;
    Q += dm * (below_plus + 0.5 * dp);
    below_plus += dp;
  }
  return Q;
}

namespace {

// Integrand of the mu_- source in lattice variables: G |det| per unit label
// area. Bounded through concentration.
double source_density(const CharNode& n, const DerivedCoeffs& d, double col_scale,
                      double row_scale) {
  const double c1 = d.c1, c2 = d.c2, D = c2 - c1;
  const double g = -2.0 * c2 * d.a1 / (c1 * D) * (1.0 - n.sigma) * n.zeta -
                   2.0 * c1 * d.a2 / (c2 * D) * n.xi * (1.0 - n.eta) -
                   2.0 * c1 * c2 * d.b / (D * D) * n.xi * n.zeta;
  return n.p * n.q * g * col_scale * row_scale;
}

struct Vertex {
  double a, b;  // label coordinates inside the cell, units of h
  double t, x;
};

using Polygon = std::vector<Vertex>;

// Keeps the part with phi >= 0, phi linear in the vertex values.
template <class Phi>
Polygon clip(const Polygon& poly, Phi phi) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vertex& P = poly[k];
    const Vertex& Q = poly[(k + 1) % n];
    const double fp = phi(P), fq = phi(Q);
    if (fp >= 0.0) out.push_back(P);
    if ((fp >= 0.0) != (fq >= 0.0)) {
      const double s = fp / (fp - fq);
      out.push_back({P.a + s * (Q.a - P.a), P.b + s * (Q.b - P.b), P.t + s * (Q.t - P.t),
                     P.x + s * (Q.x - P.x)});
    }
  }
  return out;
}

double area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vertex& P = poly[k];
    const Vertex& Q = poly[(k + 1) % poly.size()];
    s += P.a * Q.b - Q.a * P.b;
  }
  return 0.5 * std::abs(s);
}

// int int G dx dt over {t1 <= t <= t2, x <= x_probe}. Each cell is split
// into four quadrants, each carrying the integrand of its corner; t and x
// are bilinear over the cell and the quadrants are clipped against the box.
double source_integral(const CharGrid& g, double t1, double t2, double x_probe) {
  const int n = g.nX();
  const double h = g.h();
  double total = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const auto& col = g.column(i);
    for (int m = col.m_begin; m + 1 < g.m_end(i); ++m) {
      const CharNode* nw = g.find(i, m + 1);
      const CharNode* se = g.find(i + 1, m);
      const CharNode* ne = g.find(i + 1, m + 1);
      if (!nw || !se || !ne) continue;
      const CharNode* sw = g.find(i, m);
      // Below the initial curve the south-west corner is extrapolated.
      const double sw_t = sw ? sw->t : nw->t + se->t - ne->t;
      const double sw_x = sw ? sw->x : nw->x + se->x - ne->x;
      const double tmin = std::min({sw_t, nw->t, se->t, ne->t});
      const double tmax = std::max({sw_t, nw->t, se->t, ne->t});
      const double xmin = std::min({sw_x, nw->x, se->x, ne->x});
      if (tmin > t2 || tmax < t1 || xmin > x_probe) continue;

      auto bil = [&](double a, double b) {
        const double t = (1 - a) * (1 - b) * sw_t + a * (1 - b) * se->t + (1 - a) * b * nw->t +
                         a * b * ne->t;
        const double x = (1 - a) * (1 - b) * sw_x + a * (1 - b) * se->x + (1 - a) * b * nw->x +
                         a * b * ne->x;
        return Vertex{a, b, t, x};
      };
      struct Corner {
        const CharNode* node;
        int ci, cm;
        double a, b;
      };
      const Corner corners[4] = {{sw, i, m, 0, 0},
                                 {se, i + 1, m, 1, 0},
                                 {nw, i, m + 1, 0, 1},
                                 {ne, i + 1, m + 1, 1, 1}};
      for (const Corner& c : corners) {
        if (!c.node) continue;
        const double a0 = c.a == 0 ? 0.0 : 0.5, b0 = c.b == 0 ? 0.0 : 0.5;
        Polygon quad{bil(a0, b0), bil(a0 + 0.5, b0), bil(a0 + 0.5, b0 + 0.5), bil(a0, b0 + 0.5)};
        quad = clip(quad, [t1](const Vertex& v) { return v.t - t1; });
        quad = clip(quad, [t2](const Vertex& v) { return t2 - v.t; });
        quad = clip(quad, [x_probe](const Vertex& v) { return x_probe - v.x; });
        if (quad.size() < 3) continue;
        const double A = area(quad) * h * h;
        if (A == 0.0) continue;
        const DerivedCoeffs d = derive(g.field(), c.node->x, c.node->u);
        total += A * source_density(*c.node, d, g.col_scale(c.ci), g.row_scale(c.cm));
      }
    }
  }
  return total;
}

// int -(c1 / alpha) Rt2 dt along x = x_probe for t1 <= t <= t2. Along that
// curve the integrand equals (1 - sigma) p dX, and it meets every column at
// most once since x decreases along columns.
double inflow(const CharGrid& g, double t1, double t2, double x_probe) {
  struct Sample {
    double label, t, f;
  };
  std::vector<Sample> s;
  const int n = g.nX();
  const double h = g.h();
  bool started = false;
  for (int i = 0; i < n; ++i) {
    const auto& col = g.column(i);
    const auto& nodes = col.nodes;
    if (nodes.empty()) continue;
    const double fs = g.col_scale(i);
    if (nodes.front().x < x_probe) {
      if (started) break;
      continue;
    }
    if (!started) {
      // Where x = x_probe meets the initial curve.
      const CharNode& c0 = nodes.front();
      s.push_back({g.labels().label_of_x(x_probe) * h, 0.0, (1.0 - c0.sigma) * c0.p * fs});
      started = true;
    }
    // Last node with x >= x_probe.
    const auto it = std::partition_point(nodes.begin(), nodes.end(),
                                         [x_probe](const CharNode& c) { return c.x >= x_probe; });
    if (it == nodes.end()) break;
    const CharNode& a = *(it - 1);
    const CharNode& b = *it;
    const double f = (a.x - x_probe) / (a.x - b.x);
    const double t = a.t + f * (b.t - a.t);
    const double sigma = a.sigma + f * (b.sigma - a.sigma);
    const double p = a.p + f * (b.p - a.p);
    s.push_back({g.X_label(i), t, (1.0 - sigma) * p * fs});
  }
  double total = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const Sample& A = s[k - 1];
    const Sample& B = s[k];
    const double lo = std::max(A.t, t1), hi = std::min(B.t, t2);
    if (!(hi > lo) || !(B.t > A.t)) continue;
    auto at = [&](double t) {
      const double w = (t - A.t) / (B.t - A.t);
      return std::pair{A.label + w * (B.label - A.label), A.f + w * (B.f - A.f)};
    };
    const auto [l0, f0] = at(lo);
    const auto [l1, f1] = at(hi);
    total += 0.5 * (f0 + f1) * (l1 - l0);
  }
  return total;
}

}  // namespace

double balance_residual(const CharGrid& grid, double t1, double t2, double x_probe) {
  if (!(t1 < t2) || t1 < 0.0 || t2 > grid.T())
    throw OutOfDomain("balance window [" + num(t1) + ", " + num(t2) + "] outside [0, " +
                      num(grid.T()) + "]");
  Isochrone i1, i2;
  try {
    i1 = extract_isochrone(grid, t1);
    i2 = extract_isochrone(grid, t2);
  } catch (const EmptyLevelSet& e) {
    throw OutOfDomain(e.what());
  }
  if (x_probe < std::max(i1.x_min(), i2.x_min()) || x_probe > std::min(i1.x_max(), i2.x_max()))
    throw OutOfDomain("probe x = " + num(x_probe) + " outside the computed region");
  const double dmass = i2.mu_minus_at(x_probe) - i1.mu_minus_at(x_probe);
  return dmass - inflow(grid, t1, t2, x_probe) - source_integral(grid, t1, t2, x_probe);
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t k) {
    while (parent[k] != k) k = parent[k] = parent[parent[k]];
    return k;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::uint64_t key(int i, int m) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
         static_cast<std::uint32_t>(m);
}

}  // namespace

std::vector<ConcentrationEvent> detect_concentration(const CharGrid& g, double eps) {
  const int n = g.nX();
  std::vector<std::pair<int, int>> flagged;
  std::unordered_map<std::uint64_t, std::size_t> index;
  auto flag = [&](int i, int m) {
    if (index.emplace(key(i, m), flagged.size()).second) flagged.emplace_back(i, m);
  };
  for (int i = 0; i < n; ++i) {
    const auto& col = g.column(i);
    for (std::size_t k = 0; k < col.nodes.size(); ++k) {
      const int m = col.m_begin + static_cast<int>(k);
      const CharNode& c = col.nodes[k];
      if (std::min(c.sigma, c.eta) < eps) flag(i, m);
      if (k + 1 < col.nodes.size()) {
        const CharNode& up = col.nodes[k + 1];
        if (c.xi * up.xi < 0.0 && std::min(c.sigma, up.sigma) < 0.5)
          flag(i, c.sigma <= up.sigma ? m : m + 1);
      }
      if (const CharNode* right = g.find(i + 1, m)) {
        if (c.zeta * right->zeta < 0.0 && std::min(c.eta, right->eta) < 0.5)
          flag(c.eta <= right->eta ? i : i + 1, m);
      }
    }
  }
  std::sort(flagged.begin(), flagged.end());
  index.clear();
  for (std::size_t k = 0; k < flagged.size(); ++k)
    index.emplace(key(flagged[k].first, flagged[k].second), k);

  DisjointSets sets(flagged.size());
  for (std::size_t k = 0; k < flagged.size(); ++k) {
    const auto [i, m] = flagged[k];
    for (int di = -1; di <= 1; ++di)
      for (int dm = -1; dm <= 1; ++dm) {
        const auto it = index.find(key(i + di, m + dm));
        if (it != index.end()) sets.unite(k, it->second);
      }
  }

  std::vector<ConcentrationEvent> events;
  std::unordered_map<std::size_t, std::size_t> event_of_root;
  for (std::size_t k = 0; k < flagged.size(); ++k) {
    const auto [i, m] = flagged[k];
    const CharNode& c = g.at(i, m);
    const std::size_t root = sets.find(k);
    auto [it, fresh] = event_of_root.emplace(root, events.size());
    if (fresh) {
      ConcentrationEvent e;
      e.t_min = e.t_max = c.t;
      e.x_min = e.x_max = c.x;
      e.sigma = e.eta = 2.0;
      events.push_back(e);
    }
    ConcentrationEvent& e = events[it->second];
    ++e.nodes;
    e.t_min = std::min(e.t_min, c.t);
    e.t_max = std::max(e.t_max, c.t);
    e.x_min = std::min(e.x_min, c.x);
    e.x_max = std::max(e.x_max, c.x);
    if (std::min(c.sigma, c.eta) < std::min(e.sigma, e.eta)) {
      e.X = g.X(i);
      e.Y = g.Y(m);
      e.t = c.t;
      e.x = c.x;
      e.sigma = c.sigma;
      e.eta = c.eta;
      const FieldSample f = g.field()(c.x, c.u);
      const DerivedCoeffs d = derive(g.field(), c.x, c.u);
      e.dlambda_minus_du = (d.c1_u * f.alpha - d.c1 * f.alpha_u) / (f.alpha * f.alpha);
      e.dlambda_plus_du = (d.c2_u * f.alpha - d.c2 * f.alpha_u) / (f.alpha * f.alpha);
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const ConcentrationEvent& a, const ConcentrationEvent& b) {
                     return a.t_min < b.t_min;
                   });
  return events;
}

double holder_estimate_column(const CharGrid& g, int column) {
  if (column < 0 || column >= g.nX())
    throw InsufficientSamples("column " + std::to_string(column) + " outside the lattice");
  const auto& nodes = g.column(column).nodes;
  const std::size_t n = nodes.size();
  if (n < 16)
    throw InsufficientSamples("column " + std::to_string(column) + " crosses " +
                              std::to_string(n) + " time levels, need 16");
  std::vector<double> lx, ly;
  for (std::size_t k = 1; 4 * k <= n; k *= 2) {
    double dx = 0.0, dt = 0.0;
    for (std::size_t m = 0; m + k < n; ++m) {
      dx = std::max(dx, std::abs(nodes[m + k].x - nodes[m].x));
      dt = std::max(dt, std::abs(nodes[m + k].t - nodes[m].t));
    }
    if (dx > 0.0 && dt > 0.0) {
      lx.push_back(std::log(dt));
      ly.push_back(std::log(dx));
    }
  }
  if (lx.size() < 2)
    throw InsufficientSamples("column " + std::to_string(column) + " does not move");
  const double N = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / N;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / N;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  return sxy / sxx;
}

double holder_estimate(const CharGrid& g, double X_fixed) {
  int best = 0;
  for (int i = 1; i < g.nX(); ++i)
    if (std::abs(g.X(i) - X_fixed) < std::abs(g.X(best) - X_fixed)) best = i;
  return holder_estimate_column(g, best);
}

SpaceTimeBound space_time_bound(const CharGrid& g, double E0, double C_hat) {
  // Rt2 St2 |det| = alpha (1 - sigma)(1 - eta) p q / (c2 - c1); each node
  // carries its dual cell, halved on the initial curve.
  SpaceTimeBound r;
  const double h = g.h();
  for (int i = 0; i < g.nX(); ++i) {
    const auto& col = g.column(i);
    for (std::size_t k = 0; k < col.nodes.size(); ++k) {
      const CharNode& c = col.nodes[k];
      if (c.t > g.T()) break;
      const int m = col.m_begin + static_cast<int>(k);
      const DerivedCoeffs d = derive(g.field(), c.x, c.u);
      const double w = (m == g.m0(i) ? 0.5 : 1.0) * h * h * g.col_scale(i) * g.row_scale(m);
      r.lhs += w * d.alpha * (1.0 - c.sigma) * (1.0 - c.eta) * c.p * c.q / (d.c2 - d.c1);
    }
  }
  const CoefficientBounds& b = g.field().bounds();
  const double a2 = b.alpha2, g1 = b.gamma1, M = b.m_under();
  r.C_hat = C_hat;
  r.rhs = 2.0 * a2 * E0 * E0 / g1 +
          a2 / g1 * C_hat * E0 * E0 * g.T() * (1.0 + a2 * M * C_hat * E0 / (2.0 * g1));
  return r;
}

nlohmann::json to_json(const DiagnosticsReport& r) {
  using nlohmann::json;
  json j;
  j["scenario"] = r.scenario;
  j["h"] = r.h;
  j["T"] = r.T;
  j["E0"] = r.E0;
  json es = json::array();
  for (const EnergyReport& e : r.energy_series)
    es.push_back({{"t", e.t},
                  {"E", e.E_total},
                  {"E_ac_minus", e.E_ac_minus},
                  {"E_ac_plus", e.E_ac_plus},
                  {"E_atoms", e.E_atoms},
                  {"Q", e.Q},
                  {"drift", e.rel_drift}});
  j["energy_series"] = es;
  json ev = json::array();
  for (const ConcentrationEvent& e : r.events)
    ev.push_back({{"nodes", e.nodes},
                  {"X", e.X},
                  {"Y", e.Y},
                  {"t", e.t},
                  {"x", e.x},
                  {"sigma", e.sigma},
                  {"eta", e.eta},
                  {"t_min", e.t_min},
                  {"t_max", e.t_max},
                  {"x_min", e.x_min},
                  {"x_max", e.x_max},
                  {"dlambda_minus_du", e.dlambda_minus_du},
                  {"dlambda_plus_du", e.dlambda_plus_du}});
  j["events"] = ev;
  json ho = json::array();
  for (const HolderProbe& p : r.holder) ho.push_back({{"X", p.X}, {"exponent", p.exponent}});
  j["holder"] = ho;
  json ba = json::array();
  for (const BalanceProbe& p : r.balance)
    ba.push_back(
        {{"t1", p.t1}, {"t2", p.t2}, {"x_probe", p.x_probe}, {"residual", p.residual}});
  j["balance"] = ba;
  return j;
}

DiagnosticsReport report_from_json(const nlohmann::json& j) {
  DiagnosticsReport r;
  r.scenario = j.at("scenario").get<std::string>();
  r.h = j.at("h").get<double>();
  r.T = j.at("T").get<double>();
  r.E0 = j.at("E0").get<double>();
  for (const auto& e : j.at("energy_series")) {
    EnergyReport x;
    x.t = e.at("t");
    x.E_total = e.at("E");
    x.E_ac_minus = e.value("E_ac_minus", 0.0);
    x.E_ac_plus = e.value("E_ac_plus", 0.0);
    x.E_atoms = e.value("E_atoms", 0.0);
    x.Q = e.at("Q");
    x.rel_drift = e.at("drift");
    r.energy_series.push_back(x);
  }
  for (const auto& e : j.at("events")) {
    ConcentrationEvent c;
    c.nodes = e.at("nodes");
    c.X = e.at("X");
    c.Y = e.at("Y");
    c.t = e.at("t");
    c.x = e.at("x");
    c.sigma = e.at("sigma");
    c.eta = e.at("eta");
    c.t_min = e.at("t_min");
    c.t_max = e.at("t_max");
    c.x_min = e.at("x_min");
    c.x_max = e.at("x_max");
    c.dlambda_minus_du = e.at("dlambda_minus_du");
    c.dlambda_plus_du = e.at("dlambda_plus_du");
    r.events.push_back(c);
  }
  for (const auto& p : j.at("holder")) r.holder.push_back({p.at("X"), p.at("exponent")});
  for (const auto& p : j.at("balance"))
    r.balance.push_back({p.at("t1"), p.at("t2"), p.at("x_probe"), p.at("residual")});
  return r;
}

}  // namespace vwave
