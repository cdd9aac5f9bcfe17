#include "vwave/goursat.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

#include "vwave/errors.hpp"

#ifdef VWAVE_HAVE_OPENMP
#include <omp.h>
#endif

namespace vwave {

YDerivs rhs_Y(const CharNode& n, const DerivedCoeffs& c) {
  const double c1 = c.c1, c2 = c.c2, a1 = c.a1, a2 = c.a2, b = c.b;
  const double D = c2 - c1;
  const double s = n.sigma, e = n.eta, xi = n.xi, ze = n.zeta, p = n.p, q = n.q;
  const double A1 = (c.alpha * c.c1_x - c1 * c.alpha_x) / (c.alpha * D);
  const double B = 2.0 * c1 * c2 * b / (D * D);
  const double k12 = 2.0 * (c1 * a2 - c2 * a1) / (c2 * D);
  const double ka1 = 2.0 * a1 * (c1 + c2) / (c1 * D);
  const double kc2a1 = 2.0 * c2 * a1 / (c1 * D);
  const double kc1a2 = 2.0 * c1 * a2 / (c2 * D);

  YDerivs r;
  r.u = ze * q / D;
  r.x = c1 * e * q / D;
  r.t = c.alpha * e * q / D;
  r.p = p * q *
        (A1 * e * s + k12 * xi * e + ka1 * ze * s - kc2a1 * ze - kc1a2 * xi - B * xi * ze);
  r.sigma = q * (A1 * e * s * (1.0 - s) + ka1 * ze * s * (1.0 - s) + kc1a2 * xi * s * (1.0 - e) +
                 2.0 * a1 / D * xi * e * (s - 1.0) + B * ze * xi * s);
  r.xi = q * (a1 / c1 * (e - s * e) + a2 / c2 * (s - s * e) +
              (a1 - a2 + 2.0 * c2 * a1 / c1) * xi * ze / D + c2 * b / D * s * ze +
              (c.d1 + (c1 * c.c2_x - c2 * c.c1_x) / D) * e * xi / D - A1 * e * xi * s -
              ka1 * xi * s * ze - k12 * xi * xi * e + kc1a2 * xi * xi + B * xi * xi * ze);
  return r;
}

XDerivs rhs_X(const CharNode& n, const DerivedCoeffs& c) {
  const double c1 = c.c1, c2 = c.c2, a1 = c.a1, a2 = c.a2, b = c.b;
  const double D = c2 - c1;
  const double s = n.sigma, e = n.eta, xi = n.xi, ze = n.zeta, p = n.p, q = n.q;
  const double A2 = (c.alpha * c.c2_x - c2 * c.alpha_x) / (c.alpha * D);
  const double B = 2.0 * c1 * c2 * b / (D * D);
  const double k12 = 2.0 * (c1 * a2 - c2 * a1) / (c1 * D);
  const double ka2 = 2.0 * a2 * (c1 + c2) / (c2 * D);
  const double kc2a1 = 2.0 * c2 * a1 / (c1 * D);
  const double kc1a2 = 2.0 * c1 * a2 / (c2 * D);

  XDerivs r;
  r.u = xi * p / D;
  r.x = c2 * s * p / D;
  r.t = c.alpha * s * p / D;
  r.q = p * q *
        (A2 * e * s + k12 * s * ze - ka2 * xi * e + kc2a1 * ze + kc1a2 * xi + B * xi * ze);
  r.eta = p * (A2 * e * s * (1.0 - e) + ka2 * xi * e * (e - 1.0) + kc2a1 * ze * e * (s - 1.0) +
               2.0 * a2 / D * ze * s * (1.0 - e) - B * ze * xi * e);
  r.zeta = p * (a1 / c1 * (e - s * e) + a2 / c2 * (s - s * e) +
                (a1 - a2 - 2.0 * c1 * a2 / c2) * xi * ze / D + c1 * b / D * xi * e +
                (c.d2 + (c1 * c.c2_x - c2 * c.c1_x) / D) * s * ze / D - A2 * e * ze * s +
                ka2 * xi * e * ze - k12 * ze * ze * s - kc2a1 * ze * ze - B * ze * ze * xi);
  return r;
}

namespace {

XDerivs scaled(XDerivs g, double k) {
  g.u *= k;
  g.x *= k;
  g.t *= k;
  g.q *= k;
  g.eta *= k;
  g.zeta *= k;
  return g;
}

YDerivs scaled(YDerivs f, double k) {
  f.u *= k;
  f.x *= k;
  f.t *= k;
  f.p *= k;
  f.sigma *= k;
  f.xi *= k;
  return f;
}

double rel_change(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

CellResult advance_cell_impl(const CellInput& in, const CharNode* guess,
                             const CoefficientField& field, double h, const CellOptions& opt,
                             int i, int m) {
  const CharNode& W = in.west;
  const CharNode& S = in.south;
  const XDerivs gW = scaled(rhs_X(W, derive(field, W.x, W.u)), in.west_col_scale);
  const YDerivs fS = scaled(rhs_Y(S, derive(field, S.x, S.u)), in.south_row_scale);
  const double hh = 0.5 * h;

  CharNode ne;
  if (guess) {
    ne = *guess;
  } else {
    ne.q = W.q + h * gW.q;
    ne.eta = W.eta + h * gW.eta;
    ne.zeta = W.zeta + h * gW.zeta;
    ne.p = S.p + h * fS.p;
    ne.sigma = S.sigma + h * fS.sigma;
    ne.xi = S.xi + h * fS.xi;
    ne.t = 0.5 * ((W.t + h * gW.t) + (S.t + h * fS.t));
    ne.x = 0.5 * ((W.x + h * gW.x) + (S.x + h * fS.x));
    ne.u = 0.5 * ((W.u + h * gW.u) + (S.u + h * fS.u));
  }

  CellResult res;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const DerivedCoeffs cN = derive(field, ne.x, ne.u);
    const XDerivs gN = scaled(rhs_X(ne, cN), in.ne_col_scale);
    const YDerivs fN = scaled(rhs_Y(ne, cN), in.ne_row_scale);

    CharNode next;
    next.q = W.q + hh * (gW.q + gN.q);
    next.eta = W.eta + hh * (gW.eta + gN.eta);
    next.zeta = W.zeta + hh * (gW.zeta + gN.zeta);
    next.p = S.p + hh * (fS.p + fN.p);
    next.sigma = S.sigma + hh * (fS.sigma + fN.sigma);
    next.xi = S.xi + hh * (fS.xi + fN.xi);
    const double tX = W.t + hh * (gW.t + gN.t), tY = S.t + hh * (fS.t + fN.t);
    const double xX = W.x + hh * (gW.x + gN.x), xY = S.x + hh * (fS.x + fN.x);
    const double uX = W.u + hh * (gW.u + gN.u), uY = S.u + hh * (fS.u + fN.u);
    const double wX = in.x_route_weight, wY = 1.0 - wX;
    next.t = wX * tX + wY * tY;
    next.x = wX * xX + wY * xY;
    next.u = wX * uX + wY * uY;
    res.residual = std::max({std::abs(tX - tY), std::abs(xX - xY), std::abs(uX - uY)});

    const double delta = std::max(
        {rel_change(next.t, ne.t), rel_change(next.x, ne.x), rel_change(next.u, ne.u),
         rel_change(next.p, ne.p), rel_change(next.q, ne.q), rel_change(next.sigma, ne.sigma),
         rel_change(next.eta, ne.eta), rel_change(next.xi, ne.xi),
         rel_change(next.zeta, ne.zeta)});
    ne = next;
    res.iterations = it;
    if (!std::isfinite(delta)) break;
    if (delta <= opt.tol) {
      if (ne.t < 0.0)
        throw DomainExit("cell (" + std::to_string(i) + ", " + std::to_string(m) +
                         ") produced t < 0");
      ne.sigma = std::clamp(ne.sigma, 0.0, 1.0);
      ne.eta = std::clamp(ne.eta, 0.0, 1.0);
      ne.p = std::max(ne.p, 1e-14);
      ne.q = std::max(ne.q, 1e-14);
      res.node = ne;
      return res;
    }
  }
  throw NoConvergence("cell (" + std::to_string(i) + ", " + std::to_string(m) +
                          ") did not converge in " + std::to_string(opt.max_iter) +
                          " iterations",
                      i, m);
}

}  // namespace

CellResult advance_cell(const CellInput& in, const CoefficientField& field, double h,
                        const CellOptions& opt, int i, int m) {
  return advance_cell_impl(in, nullptr, field, h, opt, i, m);
}

CellResult advance_cell(const CharNode& west, const CharNode& south, const CharNode& southwest,
                        const CoefficientField& field, double h, const CellOptions& opt) {
  CharNode guess;
  guess.t = west.t + south.t - southwest.t;
  guess.x = west.x + south.x - southwest.x;
  guess.u = west.u + south.u - southwest.u;
  guess.p = west.p + south.p - southwest.p;
  guess.q = west.q + south.q - southwest.q;
  guess.sigma = west.sigma + south.sigma - southwest.sigma;
  guess.eta = west.eta + south.eta - southwest.eta;
  guess.xi = west.xi + south.xi - southwest.xi;
  guess.zeta = west.zeta + south.zeta - southwest.zeta;
  CellInput in{west, south};
  return advance_cell_impl(in, &guess, field, h, opt, 0, 0);
}

// ---------------------------------------------------------------------------

LabelMap::LabelMap(std::shared_ptr<const InitialState> state, Interval range, double h)
    : state_(std::move(state)), h_(h) {
  if (!(h > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
  if (!(range.hi > range.lo)) throw std::invalid_argument("empty curve range");
  const InitialState& st = *state_;
  auto Z = [&](double x) { return 0.5 * (st.X(x) + st.Y(x)); };
  z0_ = Z(range.lo);
  const double zR = Z(range.hi);

  lz_.push_back(0.0);
  z_.push_back(z0_);
  for (double k : st.knots()) {
    if (!(k > range.lo && k < range.hi)) continue;
    const double zk = Z(k);
    const double raw = (zk - z_.back()) / h;
    double l;
    if (knot_labels_.empty())
      l = std::floor(raw) + 0.5;
    else
      l = lz_.back() + std::max(1.0, std::round(raw));
    lz_.push_back(l);
    z_.push_back(zk);
    knot_labels_.push_back(l);
  }
  const double last = lz_.back() + (zR - z_.back()) / h;
  n_ = static_cast<int>(std::floor(last)) + 1;
  if (n_ < 3) throw std::invalid_argument("curve range shorter than three lattice cells");

  const std::size_t n = static_cast<std::size_t>(n_);
  xs_.resize(n);
  X_.resize(n);
  Y_.resize(n);
  dX_.resize(n);
  dY_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = static_cast<double>(i);
    // Slope dZ/dlabel of the piece containing l (labels in units of h).
    auto it = std::upper_bound(lz_.begin(), lz_.end(), l);
    double slope = 1.0;
    if (it != lz_.end() && it != lz_.begin()) {
      const std::size_t k = static_cast<std::size_t>(it - lz_.begin());
      slope = (z_[k] - z_[k - 1]) / ((lz_[k] - lz_[k - 1]) * h);
    }
    const double x = st.x_of_sum(2.0 * z_of_label(l));
    const RiemannState r = st.riemann(x);
    const double mean = 1.0 + 0.5 * (r.Rt2 + r.St2);
    xs_[i] = x;
    X_[i] = st.X(x);
    Y_[i] = st.Y(x);
    dX_[i] = slope * (1.0 + r.Rt2) / mean;
    dY_[i] = slope * (1.0 + r.St2) / mean;
  }
}

double LabelMap::z_of_label(double l) const {
  if (l >= lz_.back()) return z_.back() + (l - lz_.back()) * h_;
  auto it = std::upper_bound(lz_.begin(), lz_.end(), l);
  const std::size_t k = static_cast<std::size_t>(it - lz_.begin());
  const double s = (l - lz_[k - 1]) / (lz_[k] - lz_[k - 1]);
  return z_[k - 1] + s * (z_[k] - z_[k - 1]);
}

double LabelMap::label_of_x(double x) const {
  const double z = 0.5 * (state_->X(x) + state_->Y(x));
  if (z >= z_.back()) return lz_.back() + (z - z_.back()) / h_;
  if (z <= z_.front()) return (z - z_.front()) / h_;
  auto it = std::upper_bound(z_.begin(), z_.end(), z);
  const std::size_t k = static_cast<std::size_t>(it - z_.begin());
  const double s = (z - z_[k - 1]) / (z_[k] - z_[k - 1]);
  return lz_[k - 1] + s * (lz_[k] - lz_[k - 1]);
}

// ---------------------------------------------------------------------------

CharGrid::CharGrid(CoefficientField field, std::shared_ptr<const LabelMap> labels,
                   int orientation, double T)
    : field_(std::move(field)),
      labels_(std::move(labels)),
      orientation_(orientation),
      T_(T),
      cols_(static_cast<std::size_t>(labels_->columns())) {
  for (int i = 0; i < nX(); ++i) cols_[static_cast<std::size_t>(i)].m_begin = m0(i);
}

bool CharGrid::contains(int i, int m) const {
  if (i < 0 || i >= nX()) return false;
  const Column& c = column(i);
  return m >= c.m_begin && m < c.m_begin + static_cast<int>(c.nodes.size());
}

const CharNode* CharGrid::find(int i, int m) const {
  if (!contains(i, m)) return nullptr;
  const Column& c = column(i);
  return &c.nodes[static_cast<std::size_t>(m - c.m_begin)];
}

const CharNode& CharGrid::at(int i, int m) const {
  const CharNode* n = find(i, m);
  if (!n)
    throw std::out_of_range("no lattice node (" + std::to_string(i) + ", " + std::to_string(m) +
                            ")");
  return *n;
}

double CharGrid::residual(int i, int m) const {
  if (!contains(i, m)) throw std::out_of_range("no lattice node");
  const Column& c = column(i);
  return c.residual[static_cast<std::size_t>(m - c.m_begin)];
}

int CharGrid::m_end(int i) const {
  const Column& c = column(i);
  return c.m_begin + static_cast<int>(c.nodes.size());
}

std::size_t CharGrid::node_count() const {
  std::size_t n = 0;
  for (const Column& c : cols_) n += c.nodes.size();
  return n;
}

double CharGrid::max_t() const {
  double t = 0.0;
  for (const Column& c : cols_)
    for (const CharNode& n : c.nodes) t = std::max(t, n.t);
  return t;
}

// ---------------------------------------------------------------------------

int detect_orientation(const BoundaryCurve& curve, double h) {
  const InitialState& st = curve.state();
  const Interval r = curve.range();
  const double xa = 0.5 * (r.lo + r.hi);
  const BoundaryRecord A = boundary_record(st, xa);
  const BoundaryRecord B = boundary_record(st, st.x_of_sum(A.X + A.Y + 2.0 * h));
  const double dX = B.X - A.X;
  const double dY = B.Y - A.Y;
  auto node = [](const BoundaryRecord& b) {
    CharNode n;
    n.x = b.x;
    n.u = b.u;
    n.sigma = b.sigma;
    n.eta = b.eta;
    n.xi = b.xi;
    n.zeta = b.zeta;
    return n;
  };
  const CoefficientField& f = st.field();
  // The trial node N = (X_B, Y_A) is reached from A by a step +dX and from B
  // by a step -dY of the curve's forward coordinate.
  const double tX = dX * rhs_X(node(A), derive(f, A.x, A.u)).t;
  for (int s : {-1, 1}) {
    const double tY = s * (-dY) * rhs_Y(node(B), derive(f, B.x, B.u)).t;
    if (tX > 0.0 && tY > 0.0) return s;
  }
  throw std::logic_error("orientation test failed: no marching direction gives t > 0");
}

Interval light_cone_range(const CoefficientField& field, const InitialData& data, double T) {
  const double N = field.bounds().speed_upper();
  const double margin = 2.0 * N * T * 1.05 + 0.05;
  return {data.support.lo - margin, data.support.hi + margin};
}

CharGrid solve(const BoundaryCurve& curve, double T, double h, const SolveOptions& opt) {
  if (!(T > 0.0)) throw std::invalid_argument("final time must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
  const int orientation = detect_orientation(curve, h);
  if (orientation != -1)
    throw std::logic_error("unsupported marching orientation");

  auto labels = std::make_shared<const LabelMap>(curve.state_ptr(), curve.range(), h);
  CharGrid grid(curve.state().field(), labels, orientation, T);
  const int n = grid.nX();
  const InitialState& st = curve.state();

  for (int i = 0; i < n; ++i) {
    const BoundaryRecord b = boundary_record(st, labels->x_of(i));
    CharNode node;
    node.t = 0.0;
    node.x = b.x;
    node.u = b.u;
    node.sigma = b.sigma;
    node.eta = b.eta;
    node.xi = b.xi;
    node.zeta = b.zeta;
    grid.column(i).nodes.push_back(node);
    grid.column(i).residual.push_back(0.0);
  }
  SolveStats& stats = grid.stats();
  stats.nodes = static_cast<std::size_t>(n);

  // kink[j]: a data knot line lies between curve labels j and j + 1.
  std::vector<char> kink(static_cast<std::size_t>(n), 0);
  for (double L : grid.labels().knot_labels()) {
    const long j = std::lround(L - 0.5);
    if (j >= 0 && j + 1 < n) kink[static_cast<std::size_t>(j)] = 1;
  }

  struct Task {
    int i;
    int m;
  };
  std::vector<Task> tasks;
  std::vector<CellResult> results;
  std::vector<std::exception_ptr> errors;

  for (int d = n;; ++d) {
    tasks.clear();
    for (int i = std::max(1, d - (n - 1)); i <= n - 1; ++i) {
      const int m = d - i;
      if (grid.m_end(i) != m) continue;  // south neighbour missing
      const CharNode* w = grid.find(i - 1, m);
      if (!w) continue;
      const CharNode& s = grid.column(i).nodes.back();
      if (std::min(w->t, s.t) > T) continue;
      tasks.push_back({i, m});
    }
    if (tasks.empty()) break;
    if (stats.nodes + tasks.size() > opt.max_nodes)
      throw Error("lattice exceeds the node limit of " + std::to_string(opt.max_nodes));

    results.assign(tasks.size(), CellResult{});
    errors.assign(tasks.size(), nullptr);
    const auto ntask = static_cast<std::ptrdiff_t>(tasks.size());
    auto work = [&](std::ptrdiff_t k) {
      const Task& tk = tasks[static_cast<std::size_t>(k)];
      try {
        CellInput in{grid.at(tk.i - 1, tk.m), grid.column(tk.i).nodes.back(),
                     grid.col_scale(tk.i - 1), grid.col_scale(tk.i), grid.row_scale(tk.m - 1),
                     grid.row_scale(tk.m)};
        const bool west_kink = kink[static_cast<std::size_t>(tk.i - 1)];
        const bool south_kink = kink[static_cast<std::size_t>(n - 1 - tk.m)];
        if (west_kink != south_kink) in.x_route_weight = west_kink ? 0.0 : 1.0;
        results[static_cast<std::size_t>(k)] =
            advance_cell(in, grid.field(), h, opt.cell, tk.i, tk.m);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    };
#ifdef VWAVE_HAVE_OPENMP
    if (opt.num_threads > 1 && ntask > 64) {
#pragma omp parallel for schedule(static) num_threads(opt.num_threads)
      for (std::ptrdiff_t k = 0; k < ntask; ++k) work(k);
    } else {
      for (std::ptrdiff_t k = 0; k < ntask; ++k) work(k);
    }
#else
    for (std::ptrdiff_t k = 0; k < ntask; ++k) work(k);
#endif
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);

    for (std::size_t k = 0; k < tasks.size(); ++k) {
      CharGrid::Column& col = grid.column(tasks[k].i);
      col.nodes.push_back(results[k].node);
      col.residual.push_back(results[k].residual);
      stats.max_iterations = std::max(stats.max_iterations, results[k].iterations);
      stats.max_residual = std::max(stats.max_residual, results[k].residual);
    }
    stats.nodes += tasks.size();
    stats.cells += tasks.size();
    ++stats.wavefronts;
  }
  return grid;
}

}  // namespace vwave
