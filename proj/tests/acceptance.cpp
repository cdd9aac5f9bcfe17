// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
// below. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vwave/chartrace.hpp"
#include "vwave/diagnostics.hpp"
#include "vwave/errors.hpp"
#include "vwave/pipeline.hpp"

using namespace vwave;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances ----------------------------------------------------
constexpr double kEigenRel = 1e-12;
constexpr double kSourceRel = 1e-6;
constexpr double kClosedForm = 1e-10;
constexpr double kLinearCoeff = 5.0;  // L_inf <= 5 h^2
constexpr double kMinOrder = 1.8;
constexpr double kRoundoffFloor = 1e-12;
constexpr double kDriftTol = 1e-3;
constexpr double kHolderExp = 0.4;
constexpr double kOracleRel = 1e-2;
constexpr double kOracleOrder = 1.0;
constexpr double kExactTrace = 1e-12;
constexpr double kPulseTraceCoeff = 1.0;  // sup <= (h^2 + dt^2)
constexpr double kTraceOrder = 1.0;
constexpr double kQSlack = 1e-10;
constexpr double kSpeedSlack = 1e-2;
constexpr double kProportionOrder = 1.8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Least-squares slope of log(err) against log(h).
double loglog_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(hs.size());
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const double x = std::log(hs[k]), y = std::log(errs[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::shared_ptr<const CharGrid> make_grid(const CoefficientField& f, const InitialData& d, double T,
                                          double h) {
  BoundaryCurve c = build_boundary_curve(f, d, 64, light_cone_range(f, d, T));
  return std::make_shared<const CharGrid>(solve(c, T, h));
}

InitialData steep_hat() { return InitialData::hat(-0.0125, 0.0, 0.0125, 0.1, 0.7); }
InitialData smooth_bump() { return InitialData::gauss_like(0.0, 0.1, 0.3, 0.7, 256); }

double energy0(const CoefficientField& f, const InitialData& d) {
  return InitialState(f, d).energy_riemann();
}

// A field where every partial of alpha, beta, gamma is active.
CoefficientField mixed_field() {
  CoefficientBounds b{0.8, 1.2, 0.3, 1.1, 1.9, 1.0};
  auto eval = [](double x, double u) {
    FieldSample s;
    s.alpha = 1.0 + 0.2 * std::sin(x + u);
    s.alpha_x = s.alpha_u = 0.2 * std::cos(x + u);
    s.beta = 0.3 * std::cos(2 * x - u);
    s.beta_x = -0.6 * std::sin(2 * x - u);
    s.beta_u = 0.3 * std::sin(2 * x - u);
    s.gamma = 1.5 + 0.4 * std::sin(u) * std::cos(x);
    s.gamma_x = -0.4 * std::sin(u) * std::sin(x);
    s.gamma_u = 0.4 * std::cos(u) * std::cos(x);
    return s;
  };
  return CoefficientField("mixed", eval, b);
}

std::vector<CoefficientField> presets() {
  return {CoefficientField::linear(1, 0, 1), CoefficientField::linear(2, 3, 1),
          CoefficientField::liquid_crystal(1, 4), CoefficientField::x_heterogeneous(1, 0.2, 6.0),
          mixed_field()};
}

// ---- 1 -----------------------------------------------------------------------
Outcome eigenvalue_identity() {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> X(-5, 5), U(-2 * M_PI, 2 * M_PI);
  double worst = 0.0;
  bool ordered = true;
  std::size_t n = 0;
  for (const CoefficientField& f : presets()) {
    for (int k = 0; k < 100000; ++k) {
      const double x = X(rng), u = U(rng);
      const FieldSample s = f(x, u);
      const WaveSpeeds w = eval_wave_speeds(f, x, u);
      for (double l : {w.lambda_minus, w.lambda_plus}) {
        const double a2l2 = s.alpha * s.alpha * l * l, bl = 2 * s.beta * l, g2 = s.gamma * s.gamma;
        worst = std::max(worst, std::abs(a2l2 - bl - g2) / std::max({a2l2, std::abs(bl), g2}));
      }
      ordered = ordered && w.lambda_minus < 0.0 && w.lambda_plus > 0.0;
      ++n;
    }
  }
  return {worst <= kEigenRel && ordered,
          std::to_string(n) + " samples, max rel residual " + fmt(worst) +
              (ordered ? ", lambda- < 0 < lambda+" : ", ORDER VIOLATED")};
}

// ---- 2 -----------------------------------------------------------------------
// Source coefficients rebuilt from finite differences of c1, c2, alpha.
SourceCoeffs fd_source(const CoefficientField& f, double x, double u) {
  const double e = 1e-5;
  auto cs = [&](double xx, double uu) {
    const FieldSample s = f(xx, uu);
    const double r = std::sqrt(s.beta * s.beta + s.alpha * s.alpha * s.gamma * s.gamma);
    return std::array<double, 3>{(s.beta - r) / s.alpha, (s.beta + r) / s.alpha, s.alpha};
  };
  const auto c = cs(x, u);
  const auto xp = cs(x + e, u), xm = cs(x - e, u), up = cs(x, u + e), um = cs(x, u - e);
  auto dx = [&](int k) { return (xp[k] - xm[k]) / (2 * e); };
  auto du = [&](int k) { return (up[k] - um[k]) / (2 * e); };
  const double c1 = c[0], c2 = c[1], a = c[2], D = c2 - c1;
  SourceCoeffs s;
  s.a1 = (c1 * du(2) - a * du(0)) / (2 * a * D);
  s.a2 = (c2 * du(2) - a * du(1)) / (2 * a * D);
  s.b = (a * (dx(0) - dx(1)) + (c1 - c2) * dx(2)) / (2 * a * D);
  const double common = (c2 * dx(0) - c1 * dx(1)) / (2 * D);
  s.d1 = common + (a * dx(0) - c1 * dx(2)) / (2 * a);
  s.d2 = common + (a * dx(1) - c2 * dx(2)) / (2 * a);
  return s;
}

Outcome coefficient_oracle() {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> X(-3, 3), U(-M_PI, M_PI);
  double worst = 0.0;
  std::size_t n = 0;
  for (const CoefficientField& f : presets()) {
    for (int k = 0; k < 10000 / 5 + 1; ++k, ++n) {
      const double x = X(rng), u = U(rng);
      const SourceCoeffs a = eval_source_coeffs(f, x, u), b = fd_source(f, x, u);
      const double scale = std::max({1.0, std::abs(a.a1), std::abs(a.a2), std::abs(a.b),
                                     std::abs(a.d1), std::abs(a.d2)});
      for (auto [p, q] : {std::pair{a.a1, b.a1}, {a.a2, b.a2}, {a.b, b.b}, {a.d1, b.d1},
                          {a.d2, b.d2}})
        worst = std::max(worst, std::abs(p - q) / scale);
    }
  }
  // Closed forms for alpha = 1, beta = 0, gamma = c(u).
  const double K1 = 1.0, K2 = 4.0;
  const CoefficientField lc = CoefficientField::liquid_crystal(K1, K2);
  double closed = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double u = -M_PI + 2 * M_PI * k / 1000.0;
    const double c = std::sqrt(K1 * std::cos(u) * std::cos(u) + K2 * std::sin(u) * std::sin(u));
    const double cp = (K2 - K1) * std::sin(u) * std::cos(u) / c;
    const SourceCoeffs s = eval_source_coeffs(lc, 0.3, u);
    closed = std::max({closed, std::abs(s.a1 - cp / (4 * c)), std::abs(s.a2 + cp / (4 * c)),
                       std::abs(s.b), std::abs(s.d1), std::abs(s.d2)});
  }
  return {worst <= kSourceRel && closed <= kClosedForm,
          std::to_string(n) + " samples, max rel diff vs FD " + fmt(worst) +
              ", closed-form error " + fmt(closed)};
}

// ---- 3 -----------------------------------------------------------------------
double pulse_u(double x, double t) {
  const double lo = std::max(x - t, 0.0), hi = std::min(x + t, 1.0);
  return 0.5 * std::max(hi - lo, 0.0);
}

Outcome linear_exactness() {
  const auto f = CoefficientField::linear(1, 0, 1);
  const double T = 1.0;
  std::vector<double> hs{1.0 / 128, 1.0 / 256, 1.0 / 512}, errs;
  bool bound = true;
  std::string detail;
  for (double h : hs) {
    const auto g = make_grid(f, InitialData::pulse(), T, h);
    double e = 0.0;
    for (int i = 0; i < g->nX(); ++i)
      for (const CharNode& n : g->column(i).nodes)
        if (n.t <= T) e = std::max(e, std::abs(n.u - pulse_u(n.x, n.t)));
    bound = bound && e <= kLinearCoeff * h * h;
    errs.push_back(std::max(e, std::numeric_limits<double>::min()));
    detail += "h=1/" + std::to_string(static_cast<int>(1 / h)) + ": " + fmt(e) + "; ";
  }
  const double order = loglog_slope(hs, errs);
  const bool exact = *std::max_element(errs.begin(), errs.end()) <= kRoundoffFloor;
  detail += "order " + fmt(order);
  if (exact) detail += " (errors at roundoff: scheme exact, order not meaningful)";
  return {bound && (order >= kMinOrder || exact), detail};
}

// ---- 4 -----------------------------------------------------------------------
Outcome conservation_through_blowup() {
  const auto f = CoefficientField::liquid_crystal(1, 4);
  const InitialData d = steep_hat();
  const double T = 0.6, E0 = energy0(f, d);
  std::vector<double> hs{1.0 / 256, 1.0 / 512, 1.0 / 1024}, drifts;
  std::shared_ptr<const CharGrid> finest;
  for (double h : hs) {
    finest.reset();
    auto g = make_grid(f, d, T, h);
    double drift = 0.0;
    for (int k = 0; k <= 60; ++k) {
      const EnergyReport e = total_energy(extract_isochrone(*g, T * k / 60), E0);
      drift = std::max(drift, std::abs(e.E_total - E0) / E0);
    }
    drifts.push_back(drift);
    finest = std::move(g);
  }
  const double order = loglog_slope(hs, drifts);
  const auto events = detect_concentration(*finest);

  // Modulus of continuity on the first event window. The energy bounds
  // int u_x^2 <= E0 / gamma_1^2, so |u(x+d) - u(x)| <= C d^(1/2) <= C d^0.4
  // for d <= 1 with C = sqrt(E0) / gamma_1.
  const double C = std::sqrt(E0) / f.bounds().gamma1;
  bool finite = true, holder = !events.empty();
  double ratio = 0.0;
  if (!events.empty()) {
    const ConcentrationEvent& ev = events.front();
    for (int k = 0; k <= 4; ++k) {
      const double t = ev.t_min + (ev.t_max - ev.t_min) * k / 4;
      const Isochrone iso = extract_isochrone(*finest, t);
      const double a = std::max(iso.x_min(), ev.x - 0.5), b = std::min(iso.x_max(), ev.x + 0.5);
      const int n = 1 << 14;
      std::vector<double> us(n + 1);
      for (int j = 0; j <= n; ++j) {
        us[j] = sample_u(iso, a + (b - a) * j / n);
        finite = finite && std::isfinite(us[j]);
      }
      for (int step = 1; step <= n / 2; step *= 2) {
        const double delta = (b - a) * step / n;
        double osc = 0.0;
        for (int j = 0; j + step <= n; ++j) osc = std::max(osc, std::abs(us[j + step] - us[j]));
        ratio = std::max(ratio, osc / std::pow(delta, kHolderExp));
      }
    }
    holder = ratio <= C;
  }
  std::string detail = "drift";
  for (double v : drifts) detail += " " + fmt(v);
  detail += ", order " + fmt(order) + ", events " + std::to_string(events.size());
  if (!events.empty()) detail += " (first at t=" + fmt(events.front().t_min) + ")";
  detail += ", max osc/d^0.4 " + fmt(ratio) + " <= C=" + fmt(C);
  return {drifts.back() <= kDriftTol && order >= kMinOrder && !events.empty() && finite && holder,
          detail};
}

// ---- 5 -----------------------------------------------------------------------
Outcome oracle_equivalence() {
  const auto f = CoefficientField::liquid_crystal(1, 4);
  const InitialData d = smooth_bump();
  // FD blowup time, or the first grid concentration time when the FD
  // gradients stay below the cap.
  double t_blow = 0.0;
  std::string how;
  try {
    fd_run(f, d, 2.0, 1.0 / 512, {2.0});
    const auto events = detect_concentration(*make_grid(f, d, 2.0, 1.0 / 128));
    if (events.empty()) return {false, "no blowup within t <= 2"};
    t_blow = events.front().t_min;
    how = "FD below cap; grid event";
  } catch (const BlowupSuspected& e) {
    t_blow = e.time();
    how = "FD cap";
  }
  const double T = 0.5 * t_blow;
  std::vector<double> hs{1.0 / 128, 1.0 / 256, 1.0 / 512}, errs;
  for (double h : hs) {
    const auto g = make_grid(f, d, T, h);
    const auto rows = fd_compare(fd_run(f, d, T, h, {0.5 * T, T}), *g);
    double e = 0.0;
    for (const ErrorRow& r : rows) e = std::max(e, r.u_rel_l2);
    errs.push_back(e);
  }
  const double order = loglog_slope(hs, errs);
  const bool decreasing = errs[1] < errs[0] && errs[2] < errs[1];
  return {errs.back() <= kOracleRel && decreasing && order >= kOracleOrder,
          "blowup t=" + fmt(t_blow) + " (" + how + "), window T=" + fmt(T) + ", rel L2 " +
              fmt(errs[0]) + " " + fmt(errs[1]) + " " + fmt(errs[2]) + ", order " + fmt(order)};
}

// ---- 6 and 7 share traced paths ----------------------------------------------
struct TraceStudy {
  double zero_sup = 0.0;
  double pulse_sup = 0.0, pulse_bound = 0.0;
  std::vector<double> lc_hs, lc_sups;
  double speed_lo = std::numeric_limits<double>::infinity(), speed_hi = 0.0;
  bool speeds_ok = true;
};

double trace_lines(const std::shared_ptr<const CharGrid>& g, const std::vector<double>& xs,
                   double T, double dt, TraceStudy& st) {
  GridProvider pr(g);
  const double lo = g->field().bounds().speed_lower(), hi = g->field().bounds().speed_upper();
  double sup = 0.0;
  for (double x : xs) {
    const int i = static_cast<int>(std::lround(g->labels().label_of_x(x)));
    const double y = g->labels().x_of(i);
    for (Family fam : {Family::backward, Family::forward}) {
      const CharPath p = trace_characteristic(pr, fam, y, T, dt);
      sup = std::max(sup, compare_with_gridline(*g, p).sup_distance);
      const SpeedRange v = path_speeds(p);
      st.speed_lo = std::min(st.speed_lo, v.min_speed / lo);
      st.speed_hi = std::max(st.speed_hi, v.max_speed / hi);
      st.speeds_ok = st.speeds_ok && v.min_speed >= lo * (1 - kSpeedSlack) &&
                     v.max_speed <= hi * (1 + kSpeedSlack);
    }
  }
  return sup;
}

const TraceStudy& trace_study() {
  static const TraceStudy study = [] {
    TraceStudy st;
    for (const CoefficientField& f :
         {CoefficientField::linear(1, 0, 1), CoefficientField::liquid_crystal(1, 4)}) {
      const auto g = make_grid(f, InitialData::zero(), 0.5, 1.0 / 64);
      st.zero_sup = std::max(st.zero_sup, trace_lines(g, {0.0}, 0.5, 1.0 / 64, st));
    }
    const double h = 1.0 / 64, dt = 1.0 / 64;
    const auto gp = make_grid(CoefficientField::linear(1, 0, 1), InitialData::pulse(), 0.5, h);
    st.pulse_sup = trace_lines(gp, {0.2, 0.5, 0.8}, 0.5, dt, st);
    st.pulse_bound = kPulseTraceCoeff * (h * h + dt * dt);
    const auto lc = CoefficientField::liquid_crystal(1, 4);
    for (double hh : {1.0 / 64, 1.0 / 128, 1.0 / 256}) {
      const auto g = make_grid(lc, steep_hat(), 0.4, hh);
      st.lc_hs.push_back(hh);
      st.lc_sups.push_back(trace_lines(g, {-0.01, 0.0, 0.01}, 0.4, hh, st));
    }
    return st;
  }();
  return study;
}

Outcome characteristic_consistency() {
  const TraceStudy& st = trace_study();
  const double order = loglog_slope(st.lc_hs, st.lc_sups);
  return {st.zero_sup <= kExactTrace && st.pulse_sup <= st.pulse_bound && order >= kTraceOrder,
          "zero data " + fmt(st.zero_sup) + ", pulse " + fmt(st.pulse_sup) + " <= " +
              fmt(st.pulse_bound) + ", liquid crystal " + fmt(st.lc_sups[0]) + " " +
              fmt(st.lc_sups[1]) + " " + fmt(st.lc_sups[2]) + " order " + fmt(order)};
}

// ---- 7 -----------------------------------------------------------------------
Outcome structural_bounds() {
  const auto f = CoefficientField::liquid_crystal(1, 4);
  const InitialData d = steep_hat();
  const double T = 0.6, E0 = energy0(f, d);
  const auto g = make_grid(f, d, T, 1.0 / 256);
  double q_excess = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 60; ++k)
    q_excess = std::max(q_excess, interaction_potential(extract_isochrone(*g, T * k / 60)) - E0 * E0);
  const Interval r = light_cone_range(f, d, T);
  const double C_hat = source_bound_constant(f, {r.lo, r.hi, -0.5, 2.0}, 10000);
  const SpaceTimeBound b = space_time_bound(*g, E0, C_hat);
  const TraceStudy& st = trace_study();
  return {q_excess <= kQSlack && b.holds() && st.speeds_ok,
          "max Q - E0^2 = " + fmt(q_excess) + ", space-time " + fmt(b.lhs) + " <= " +
              fmt(b.rhs) + " (C_hat " + fmt(C_hat) + "), path speeds in [" + fmt(st.speed_lo) +
              ", " + fmt(st.speed_hi) + "] x [N_lower, N_upper]"};
}

// ---- 8 -----------------------------------------------------------------------
// x_X alpha - c2 t_X and x_Y alpha - c1 t_Y by second-order differences. The
// derivatives jump across the data's knot lines, so stencils never straddle
// one: next to a knot line the one-sided formula on the smooth side is used.
double proportionality_residual(const CharGrid& g) {
  const CoefficientField& f = g.field();
  std::vector<char> col_knot(static_cast<std::size_t>(g.nX()), 0);  // between i and i + 1
  for (double L : g.labels().knot_labels()) {
    const long i = std::lround(L - 0.5);
    if (i >= 0 && i < g.nX()) col_knot[static_cast<std::size_t>(i)] = 1;
  }
  auto col_gap = [&](int i) { return i < 0 || i + 1 >= g.nX() || col_knot[static_cast<std::size_t>(i)]; };
  // Row m and m + 1 sit on curve labels n - 1 - m and n - 2 - m.
  auto row_gap = [&](int m) { return col_gap(g.nX() - 2 - m); };

  // d/dlabel of (alpha x - c t) along one line; nullopt when no clean stencil.
  auto derivative = [&](auto node, auto gap, int k, double alpha, double c) -> std::optional<double> {
    auto val = [&](int j) -> std::optional<double> {
      const CharNode* n = node(j);
      if (!n) return std::nullopt;
      return alpha * n->x - c * n->t;
    };
    const double h = g.h();
    if (!gap(k - 1) && !gap(k)) {
      auto a = val(k - 1), b = val(k + 1);
      if (a && b) return (*b - *a) / (2 * h);
    }
    if (!gap(k) && !gap(k + 1)) {
      auto a = val(k), b = val(k + 1), e = val(k + 2);
      if (a && b && e) return (-3 * *a + 4 * *b - *e) / (2 * h);
    }
    if (!gap(k - 1) && !gap(k - 2)) {
      auto a = val(k), b = val(k - 1), e = val(k - 2);
      if (a && b && e) return (3 * *a - 4 * *b + *e) / (2 * h);
    }
    return std::nullopt;
  };

  double worst = 0.0;
  for (int i = 0; i < g.nX(); ++i) {
    const auto& col = g.column(i);
    for (std::size_t k = 0; k < col.nodes.size(); ++k) {
      const int m = col.m_begin + static_cast<int>(k);
      const CharNode& c = col.nodes[k];
      // Interior: all four neighbours present.
      if (!g.find(i + 1, m) || !g.find(i - 1, m) || !g.find(i, m + 1) || !g.find(i, m - 1)) continue;
      const DerivedCoeffs dc = derive(f, c.x, c.u);
      const auto rx = derivative([&](int j) { return g.find(j, m); }, col_gap, i, dc.alpha, dc.c2);
      const auto ry = derivative([&](int j) { return g.find(i, j); }, row_gap, m, dc.alpha, dc.c1);
      if (rx) worst = std::max(worst, std::abs(*rx));
      if (ry) worst = std::max(worst, std::abs(*ry));
    }
  }
  return worst;
}

Outcome jacobian_and_proportionality() {
  const auto f = CoefficientField::liquid_crystal(1, 4);
  std::vector<double> hs{1.0 / 64, 1.0 / 128, 1.0 / 256}, res;
  bool zero_iff = true;
  std::size_t checked = 0;
  for (double h : hs) {
    const auto g = make_grid(f, steep_hat(), 0.6, h);
    res.push_back(proportionality_residual(*g));
    for (int i = 0; i < g->nX(); ++i)
      for (const CharNode& n : g->column(i).nodes) {
        const double det = jacobian_det(n, derive(f, n.x, n.u));
        zero_iff = zero_iff && ((det == 0.0) == (n.sigma * n.eta * n.p * n.q == 0.0));
        ++checked;
      }
  }
  // Degenerate states: each factor vanishing on its own.
  CharNode base;
  base.x = 0.1;
  base.u = 0.7;
  base.p = 1.3;
  base.q = 0.8;
  base.sigma = 0.4;
  base.eta = 0.6;
  const DerivedCoeffs dc = derive(f, base.x, base.u);
  zero_iff = zero_iff && jacobian_det(base, dc) != 0.0;
  for (double CharNode::*field : {&CharNode::sigma, &CharNode::eta, &CharNode::p, &CharNode::q}) {
    CharNode n = base;
    n.*field = 0.0;
    zero_iff = zero_iff && jacobian_det(n, dc) == 0.0;
    ++checked;
  }
  const double order = loglog_slope(hs, res);
  return {order >= kProportionOrder && zero_iff,
          "residual " + fmt(res[0]) + " " + fmt(res[1]) + " " + fmt(res[2]) + ", order " +
              fmt(order) + "; det == 0 iff sigma eta p q == 0 on " + std::to_string(checked) +
              " states" + (zero_iff ? "" : " (VIOLATED)")};
}

// ---- 9 -----------------------------------------------------------------------
std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "vwave_acceptance_determinism";
  fs::remove_all(base);
  RunConfig cfg;
  cfg.scenario.name = "liquid-crystal";
  cfg.data.source = "hat-steep";
  cfg.T = 0.6;
  cfg.h = 1.0 / 128;
  cfg.output_dir = (base / "a").string();
  run_pipeline(cfg);
  cfg.output_dir = (base / "b").string();
  run_pipeline(cfg);
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    const auto name = entry.path().filename();
    if (name == "config.json") continue;  // records output_dir
    ++files;
    if (read(entry.path()) != read(base / "b" / name)) ++differing;
  }

  const auto f = CoefficientField::liquid_crystal(1, 4);
  const InitialData d = steep_hat();
  BoundaryCurve c = build_boundary_curve(f, d, 64, light_cone_range(f, d, 0.6));
  SolveOptions seq, par;
  par.num_threads = 4;
  const CharGrid g1 = solve(c, 0.6, 1.0 / 256, seq), g4 = solve(c, 0.6, 1.0 / 256, par);
  bool same = g1.nX() == g4.nX();
  for (int i = 0; same && i < g1.nX(); ++i) {
    const auto& a = g1.column(i);
    const auto& b = g4.column(i);
    same = a.m_begin == b.m_begin && a.nodes.size() == b.nodes.size() &&
           std::memcmp(a.nodes.data(), b.nodes.data(), a.nodes.size() * sizeof(CharNode)) == 0 &&
           std::memcmp(a.residual.data(), b.residual.data(), a.residual.size() * sizeof(double)) ==
               0;
  }
  fs::remove_all(base);
  return {differing == 0 && files > 0 && same,
          std::to_string(files) + " artifacts, " + std::to_string(differing) +
              " differ; 1 vs 4 threads " + (same ? "bit-identical" : "DIFFER") + " over " +
              std::to_string(g1.node_count()) + " nodes"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: no runtime requirement
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> suite{
      {1, "eigenvalue identity", 1.0, eigenvalue_identity},
      {2, "coefficient oracle", 1.0, coefficient_oracle},
      {3, "linear exactness", 30.0, linear_exactness},
      {4, "conservation through blowup", 300.0, conservation_through_blowup},
      {5, "oracle equivalence", 120.0, oracle_equivalence},
      {6, "characteristic consistency", 0.0, characteristic_consistency},
      {7, "structural bounds", 0.0, structural_bounds},
      {8, "jacobian and proportionality", 0.0, jacobian_and_proportionality},
      {9, "determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const Criterion& c : suite) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = seconds_since(t0);
    const bool in_time = c.budget_s <= 0.0 || s <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << " (" << fmt(s) << " s" << (in_time ? "" : ", OVER BUDGET") << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
