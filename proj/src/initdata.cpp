#include "vwave/initdata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace vwave {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 8> kGLNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGLWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
auto gauss_legendre(double a, double b, F&& f) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto acc = f(mid + half * kGLNodes[0]);
  for (auto& v : acc) v *= kGLWeights[0];
  for (std::size_t k = 1; k < kGLNodes.size(); ++k) {
    const auto v = f(mid + half * kGLNodes[k]);
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += kGLWeights[k] * v[c];
  }
  for (auto& v : acc) v *= half;
  return acc;
}

// Length of the sub-intervals used for quadrature of non-constant fields.
constexpr double kSubLength = 1.0 / 128.0;

void require_increasing(const std::vector<double>& xs, const char* what) {
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (!(xs[k] > xs[k - 1]))
      throw std::invalid_argument(std::string(what) + ": breakpoints must be strictly increasing");
}

RiemannState riemann_from(const FieldSample& s, double u1, double u0x) {
  const DerivedCoeffs d = derive(s);
  RiemannState r;
  r.R = d.alpha * u1 + d.c2 * u0x;
  r.S = d.alpha * u1 + d.c1 * u0x;
  const double D = d.c2 - d.c1;
  r.Rt2 = (-d.c1 / D) * r.R * r.R;
  r.St2 = (d.c2 / D) * r.S * r.S;
  return r;
}

}  // namespace

PiecewiseLinear::PiecewiseLinear(std::vector<double> xs, std::vector<double> values)
    : xs_(std::move(xs)), vs_(std::move(values)) {
  if (xs_.empty() || xs_.size() != vs_.size())
    throw std::invalid_argument("u0: need matching, nonempty breakpoints and values");
  require_increasing(xs_, "u0");
}

double PiecewiseLinear::operator()(double x) const {
  if (x <= xs_.front()) return vs_.front();
  if (x >= xs_.back()) return vs_.back();
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double s = (x - xs_[k]) / (xs_[k + 1] - xs_[k]);
  return vs_[k] + s * (vs_[k + 1] - vs_[k]);
}

double PiecewiseLinear::slope(double x) const {
  if (x < xs_.front() || x >= xs_.back()) return 0.0;
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs_.begin()) - 1;
  return (vs_[k + 1] - vs_[k]) / (xs_[k + 1] - xs_[k]);
}

PiecewiseConstant::PiecewiseConstant(std::vector<double> xs, std::vector<double> values)
    : xs_(std::move(xs)), vs_(std::move(values)) {
  if (xs_.empty() ? !vs_.empty() : xs_.size() != vs_.size() + 1)
    throw std::invalid_argument("u1: need one more breakpoint than values");
  require_increasing(xs_, "u1");
}

double PiecewiseConstant::operator()(double x) const {
  if (xs_.empty() || x < xs_.front() || x >= xs_.back()) return 0.0;
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  return vs_[static_cast<std::size_t>(it - xs_.begin()) - 1];
}

void InitialData::validate() const {
  if (!(support.hi >= support.lo)) throw std::invalid_argument("initial data: empty support");
  auto inside = [&](const std::vector<double>& xs, const char* what) {
    for (double x : xs)
      if (x < support.lo || x > support.hi)
        throw std::invalid_argument(std::string(what) + " breakpoint outside the support");
  };
  inside(u0.breakpoints(), "u0");
  inside(u1.breakpoints(), "u1");
}

InitialData InitialData::zero() {
  InitialData d;
  d.u0 = PiecewiseLinear({0.0}, {0.0});
  d.support = {0.0, 0.0};
  return d;
}

InitialData InitialData::pulse(double a, double b, double amp) {
  InitialData d;
  d.u0 = PiecewiseLinear({a, b}, {0.0, 0.0});
  d.u1 = PiecewiseConstant({a, b}, {amp});
  d.support = {a, b};
  return d;
}

InitialData InitialData::hat(double a, double peak, double b, double height, double base) {
  InitialData d;
  d.u0 = PiecewiseLinear({a, peak, b}, {base, base + height, base});
  d.support = {a, b};
  return d;
}

InitialData InitialData::gauss_like(double center, double width, double amp, double base,
                                    int resolution) {
  if (resolution < 2) throw std::invalid_argument("gauss-like: resolution must be >= 2");
  const double a = center - 3.0 * width;
  const double b = center + 3.0 * width;
  const double tail = std::exp(-9.0);
  std::vector<double> xs, vs;
  for (int k = 0; k <= resolution; ++k) {
    const double x = a + (b - a) * k / resolution;
    const double z = (x - center) / width;
    xs.push_back(x);
    vs.push_back(base + amp * (std::exp(-z * z) - tail) / (1.0 - tail));
  }
  vs.front() = vs.back() = base;
  InitialData d;
  d.u0 = PiecewiseLinear(std::move(xs), std::move(vs));
  d.support = {a, b};
  return d;
}

InitialData initial_data_from_json(const nlohmann::json& j) {
  InitialData d;
  d.u0 = PiecewiseLinear(j.at("u0_breakpoints").get<std::vector<double>>(),
                         j.at("u0_values").get<std::vector<double>>());
  d.u1 = PiecewiseConstant(j.value("u1_breakpoints", std::vector<double>{}),
                           j.value("u1_values", std::vector<double>{}));
  const auto sup = j.at("support").get<std::vector<double>>();
  if (sup.size() != 2) throw std::invalid_argument("support must be [a, b]");
  d.support = {sup[0], sup[1]};
  d.validate();
  return d;
}

nlohmann::json to_json(const InitialData& d) {
  return {{"u0_breakpoints", d.u0.breakpoints()},
          {"u0_values", d.u0.values()},
          {"u1_breakpoints", d.u1.breakpoints()},
          {"u1_values", d.u1.values()},
          {"support", {d.support.lo, d.support.hi}}};
}

RiemannState riemann_init(const CoefficientField& field, const InitialData& data, double x) {
  const double u = data.u0(x);
  const FieldSample s = field(x, u);
  if (!(s.alpha > 0.0) || !(s.gamma > 0.0)) (void)eval_wave_speeds(field, x, u);  // throws
  return riemann_from(s, data.u1(x), data.u0.slope(x));
}

InitialState::InitialState(CoefficientField field, InitialData data)
    : field_(std::move(field)), data_(std::move(data)) {
  data_.validate();
  knots_ = data_.u0.breakpoints();
  knots_.insert(knots_.end(), data_.u1.breakpoints().begin(), data_.u1.breakpoints().end());
  std::sort(knots_.begin(), knots_.end());
  knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());

  cum_minus_.assign(1, 0.0);
  cum_plus_.assign(1, 0.0);
  double classical = 0.0;
  symmetric_ = true;
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
    const double lo = knots_[k];
    const double hi = knots_[k + 1];
    const double mid = 0.5 * (lo + hi);
    Piece piece{lo, hi, data_.u0.slope(mid), data_.u1(mid)};
    pieces_.push_back(piece);

    std::array<double, 3> acc{0.0, 0.0, 0.0};
    auto integrand = [&](double x) {
      const double u = data_.u0(x);
      const FieldSample s = field_(x, u);
      const RiemannState r = riemann_from(s, piece.u1, piece.slope);
      if (std::abs(r.Rt2 - r.St2) > 1e-13 * (1.0 + r.Rt2 + r.St2)) symmetric_ = false;
      return std::array<double, 3>{
          r.Rt2, r.St2,
          s.alpha * s.alpha * piece.u1 * piece.u1 + s.gamma * s.gamma * piece.slope * piece.slope};
    };
    if (field_.is_constant()) {
      const auto v = integrand(mid);
      for (int c = 0; c < 3; ++c) acc[c] = v[c] * (hi - lo);
    } else {
      const int nsub = std::max(1, static_cast<int>(std::ceil((hi - lo) / kSubLength)));
      for (int s = 0; s < nsub; ++s) {
        const double a = lo + (hi - lo) * s / nsub;
        const double b = lo + (hi - lo) * (s + 1) / nsub;
        const auto v = gauss_legendre(a, b, integrand);
        for (int c = 0; c < 3; ++c) acc[c] += v[c];
      }
    }
    cum_minus_.push_back(cum_minus_.back() + acc[0]);
    cum_plus_.push_back(cum_plus_.back() + acc[1]);
    classical += acc[2];
  }
  energy_classical_ = classical;
  const double riemann = energy_riemann();
  if (std::abs(riemann - classical) > 1e-10 * std::max(1.0, classical))
    throw std::logic_error("initial energy: classical and Riemann-variable integrals disagree");
}

RiemannState InitialState::density(const Piece& piece, double x) const {
  return riemann_from(field_(x, data_.u0(x)), piece.u1, piece.slope);
}

RiemannState InitialState::riemann(double x) const {
  return riemann_init(field_, data_, x);
}

std::size_t InitialState::piece_of(double x) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto k = static_cast<std::size_t>(it - knots_.begin());
  return std::min(k == 0 ? 0 : k - 1, pieces_.size() - 1);
}

std::pair<double, double> InitialState::partial(std::size_t k, double x) const {
  const Piece& piece = pieces_[k];
  if (x <= piece.lo) return {0.0, 0.0};
  auto integrand = [&](double y) {
    const RiemannState r = density(piece, y);
    return std::array<double, 2>{r.Rt2, r.St2};
  };
  if (field_.is_constant()) {
    const auto v = integrand(0.5 * (piece.lo + piece.hi));
    return {v[0] * (x - piece.lo), v[1] * (x - piece.lo)};
  }
  const double len = piece.hi - piece.lo;
  const int nsub = std::max(1, static_cast<int>(std::ceil(len / kSubLength)));
  const double sub = len / nsub;
  const int full = std::min(nsub, static_cast<int>(std::floor((x - piece.lo) / sub)));
  std::array<double, 2> acc{0.0, 0.0};
  for (int s = 0; s < full; ++s) {
    const auto v = gauss_legendre(piece.lo + len * s / nsub, piece.lo + len * (s + 1) / nsub,
                                  integrand);
    acc[0] += v[0];
    acc[1] += v[1];
  }
  const double a = piece.lo + len * full / nsub;
  if (x > a) {
    const auto v = gauss_legendre(a, x, integrand);
    acc[0] += v[0];
    acc[1] += v[1];
  }
  return {acc[0], acc[1]};
}

double InitialState::coordinate(double x, int which) const {
  auto pick = [which](double m, double p) {
    return which == 0 ? m : which == 1 ? p : m + p;
  };
  const double scale = which == 2 ? 2.0 : 1.0;
  if (pieces_.empty() || x <= knots_.front()) return scale * x;
  if (x >= knots_.back()) return scale * x + pick(cum_minus_.back(), cum_plus_.back());
  const std::size_t k = piece_of(x);
  const auto [m, p] = partial(k, x);
  return scale * x + pick(cum_minus_[k] + m, cum_plus_[k] + p);
}

double InitialState::X(double x) const { return coordinate(x, 0); }
double InitialState::Y(double x) const { return coordinate(x, 1); }

double InitialState::invert(double target, int which) const {
  const double scale = which == 2 ? 2.0 : 1.0;
  auto total = [&]() {
    return which == 0 ? cum_minus_.back() : which == 1 ? cum_plus_.back()
                                                        : cum_minus_.back() + cum_plus_.back();
  };
  if (pieces_.empty() || target <= scale * knots_.front()) return target / scale;
  if (target >= scale * knots_.back() + total()) return (target - total()) / scale;
  // Bracket by knots.
  std::size_t lo = 0, hi = knots_.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    const double cm = which == 0 ? cum_minus_[mid]
                      : which == 1 ? cum_plus_[mid]
                                   : cum_minus_[mid] + cum_plus_[mid];
    if (scale * knots_[mid] + cm <= target)
      lo = mid;
    else
      hi = mid;
  }
  double a = knots_[lo];
  double b = knots_[hi];
  double x = 0.5 * (a + b);
  // Safeguarded Newton; the derivative scale + density is >= 1.
  for (int it = 0; it < 100; ++it) {
    const double f = coordinate(x, which) - target;
    if (f > 0.0)
      b = x;
    else
      a = x;
    const RiemannState r = density(pieces_[lo], x);
    const double df = scale + (which == 0 ? r.Rt2 : which == 1 ? r.St2 : r.Rt2 + r.St2);
    double next = x - f / df;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x)) || b - a <= 1e-15 * (1.0 + std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double InitialState::x_of_X(double X) const { return invert(X, 0); }
double InitialState::x_of_Y(double Y) const { return invert(Y, 1); }
double InitialState::x_of_sum(double s) const { return invert(s, 2); }

std::pair<double, double> cumulative_coords(const CoefficientField& field,
                                            const InitialData& data, double x) {
  const InitialState st(field, data);
  return {st.X(x), st.Y(x)};
}

double total_initial_energy(const CoefficientField& field, const InitialData& data) {
  return InitialState(field, data).energy_classical();
}

BoundaryRecord boundary_record(const InitialState& state, double x) {
  const RiemannState r = state.riemann(x);
  BoundaryRecord rec;
  rec.x = x;
  rec.X = state.X(x);
  rec.Y = state.Y(x);
  rec.u = state.data().u0(x);
  rec.sigma = 1.0 / (1.0 + r.Rt2);
  rec.eta = 1.0 / (1.0 + r.St2);
  rec.xi = r.R * rec.sigma;
  rec.zeta = r.S * rec.eta;
  return rec;
}

BoundaryCurve::BoundaryCurve(std::shared_ptr<const InitialState> state, Interval range,
                             std::vector<BoundaryRecord> records)
    : state_(std::move(state)), range_(range), records_(std::move(records)) {}

BoundaryRecord BoundaryCurve::at_x(double x) const { return boundary_record(*state_, x); }

BoundaryCurve build_boundary_curve(const CoefficientField& field, const InitialData& data,
                                   std::size_t resolution, Interval range) {
  if (resolution < 2) throw std::invalid_argument("boundary curve: resolution must be >= 2");
  if (!(range.hi > range.lo)) throw std::invalid_argument("boundary curve: empty range");
  auto state = std::make_shared<const InitialState>(field, data);
  std::vector<double> xs;
  for (std::size_t k = 0; k < resolution; ++k)
    xs.push_back(range.lo + range.length() * static_cast<double>(k) /
                                static_cast<double>(resolution - 1));
  for (double k : state->knots())
    if (k > range.lo && k < range.hi) xs.push_back(k);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<BoundaryRecord> recs;
  recs.reserve(xs.size());
  for (double x : xs) recs.push_back(boundary_record(*state, x));
  for (std::size_t k = 1; k < recs.size(); ++k)
    if (!(recs[k].X > recs[k - 1].X) || !(recs[k].Y > recs[k - 1].Y))
      throw std::logic_error("boundary curve: X or Y not strictly increasing");
  return BoundaryCurve(std::move(state), range, std::move(recs));
}

BoundaryCurve build_boundary_curve(const CoefficientField& field, const InitialData& data,
                                   std::size_t resolution) {
  Interval r = data.support;
  const double pad = std::max(1.0, 0.5 * r.length());
  return build_boundary_curve(field, data, resolution, {r.lo - pad, r.hi + pad});
}

}  // namespace vwave
