#include "vwave/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace vwave {

namespace {

double sup_root(const CoefficientBounds& b) {
  return b.beta2 + std::sqrt(b.beta2 * b.beta2 + b.alpha2 * b.alpha2 * b.gamma2 * b.gamma2);
}

// Catmull-Rom weights for a sample at fractional offset s in [0, 1] between
// the second and third of four equally spaced knots.
std::array<double, 4> catmull_rom(double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return {0.5 * (-s3 + 2.0 * s2 - s), 0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
          0.5 * (-3.0 * s3 + 4.0 * s2 + s), 0.5 * (s3 - s2)};
}

// Locates the cell of `v` in a uniform or non-uniform knot vector; returns the
// left knot index and the local parameter. Values outside are clamped.
std::pair<std::size_t, double> locate(const std::vector<double>& knots, double v) {
  if (v <= knots.front()) return {0, 0.0};
  if (v >= knots.back()) return {knots.size() - 2, 1.0};
  auto it = std::upper_bound(knots.begin(), knots.end(), v);
  std::size_t k = static_cast<std::size_t>(it - knots.begin()) - 1;
  return {k, (v - knots[k]) / (knots[k + 1] - knots[k])};
}

double interpolate(const TabulatedField& t, const std::vector<double>& table, double x,
                   double u) {
  const auto nx = t.xs.size();
  const auto nu = t.us.size();
  auto [ix, sx] = locate(t.xs, x);
  auto [iu, su] = locate(t.us, u);
  const auto wx = catmull_rom(sx);
  const auto wu = catmull_rom(su);
  auto clampi = [](long k, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(n) - 1));
  };
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    const std::size_t kx = clampi(static_cast<long>(ix) + a - 1, nx);
    double row = 0.0;
    for (int b = 0; b < 4; ++b) {
      const std::size_t ku = clampi(static_cast<long>(iu) + b - 1, nu);
      row += wu[b] * table[kx * nu + ku];
    }
    acc += wx[a] * row;
  }
  return acc;
}

}  // namespace

double CoefficientBounds::speed_lower() const { return gamma1 * gamma1 / sup_root(*this); }

double CoefficientBounds::speed_upper() const { return sup_root(*this) / (alpha1 * alpha1); }

double CoefficientBounds::ratio_lower() const {
  const double r = std::sqrt(beta2 * beta2 + alpha2 * alpha2 * gamma2 * gamma2);
  return alpha1 * alpha1 * gamma1 * gamma1 /
         (2.0 * (beta2 * beta2 + alpha2 * alpha2 * gamma2 * gamma2 + beta2 * r));
}

double CoefficientBounds::ratio_upper() const {
  return sup_root(*this) / (2.0 * alpha1 * gamma1);
}

CoefficientField::CoefficientField(std::string name, Evaluator eval,
                                   CoefficientBounds bounds, bool constant)
    : name_(std::move(name)), eval_(std::move(eval)), bounds_(bounds), constant_(constant) {}

CoefficientField CoefficientField::with_fd_partials(std::string name, ValueFn values,
                                                    CoefficientBounds bounds, double step) {
  auto eval = [values = std::move(values), step](double x, double u) {
    const auto v = values(x, u);
    const auto xp = values(x + step, u);
    const auto xm = values(x - step, u);
    const auto up = values(x, u + step);
    const auto um = values(x, u - step);
    const double inv = 0.5 / step;
    FieldSample s;
    s.alpha = v[0];
    s.beta = v[1];
    s.gamma = v[2];
    s.alpha_x = (xp[0] - xm[0]) * inv;
    s.beta_x = (xp[1] - xm[1]) * inv;
    s.gamma_x = (xp[2] - xm[2]) * inv;
    s.alpha_u = (up[0] - um[0]) * inv;
    s.beta_u = (up[1] - um[1]) * inv;
    s.gamma_u = (up[2] - um[2]) * inv;
    return s;
  };
  return CoefficientField(std::move(name), std::move(eval), bounds);
}

CoefficientField CoefficientField::linear(double alpha, double beta, double gamma) {
  CoefficientBounds b{alpha, alpha, std::abs(beta), gamma, gamma, 0.0};
  auto eval = [alpha, beta, gamma](double, double) {
    FieldSample s;
    s.alpha = alpha;
    s.beta = beta;
    s.gamma = gamma;
    return s;
  };
  return CoefficientField("linear", eval, b, true);
}

CoefficientField CoefficientField::liquid_crystal(double K1, double K2) {
  if (!(K1 > 0.0) || !(K2 > 0.0))
    throw std::invalid_argument("liquid-crystal: K1 and K2 must be positive");
  const double cmin = std::sqrt(std::min(K1, K2));
  const double cmax = std::sqrt(std::max(K1, K2));
  CoefficientBounds b{1.0, 1.0, 0.0, cmin, cmax, std::abs(K2 - K1) / (2.0 * cmin)};
  auto eval = [K1, K2](double, double u) {
    const double cu = std::cos(u);
    const double su = std::sin(u);
    const double c = std::sqrt(K1 * cu * cu + K2 * su * su);
    FieldSample s;
    s.gamma = c;
    s.gamma_u = (K2 - K1) * su * cu / c;
    return s;
  };
  return CoefficientField("liquid-crystal", eval, b);
}

CoefficientField CoefficientField::x_heterogeneous(double g0, double eps, double k) {
  if (!(g0 > 0.0) || !(std::abs(eps) < 1.0))
    throw std::invalid_argument("x-heterogeneous: need g0 > 0 and |eps| < 1");
  CoefficientBounds b{1.0, 1.0, 0.0, g0 * (1.0 - std::abs(eps)), g0 * (1.0 + std::abs(eps)),
                      g0 * std::abs(eps * k)};
  auto eval = [g0, eps, k](double x, double) {
    FieldSample s;
    s.gamma = g0 * (1.0 + eps * std::sin(k * x));
    s.gamma_x = g0 * eps * k * std::cos(k * x);
    return s;
  };
  return CoefficientField("x-heterogeneous", eval, b);
}

CoefficientField CoefficientField::custom(TabulatedField table) {
  auto check = [&](const std::vector<double>& v, const char* what) {
    if (v.size() != table.xs.size() * table.us.size())
      throw std::invalid_argument(std::string("custom field: table size mismatch for ") + what);
  };
  if (table.xs.size() < 2 || table.us.size() < 2)
    throw std::invalid_argument("custom field: need at least 2 knots per axis");
  check(table.alpha, "alpha");
  check(table.beta, "beta");
  check(table.gamma, "gamma");
  auto [amin, amax] = std::minmax_element(table.alpha.begin(), table.alpha.end());
  auto [gmin, gmax] = std::minmax_element(table.gamma.begin(), table.gamma.end());
  double bmax = 0.0;
  for (double v : table.beta) bmax = std::max(bmax, std::abs(v));
  CoefficientBounds b{0.95 * *amin, 1.05 * *amax, 1.05 * bmax, 0.95 * *gmin, 1.05 * *gmax, 0.0};
  return custom(std::move(table), b);
}

CoefficientField CoefficientField::custom(TabulatedField table, CoefficientBounds bounds) {
  auto values = [t = std::move(table)](double x, double u) {
    return std::array<double, 3>{interpolate(t, t.alpha, x, u), interpolate(t, t.beta, x, u),
                                 interpolate(t, t.gamma, x, u)};
  };
  auto f = with_fd_partials("custom", std::move(values), bounds);
  return f;
}

namespace {

void require_admissible(double alpha, double gamma, double x, double u) {
  if (!(alpha > 0.0) || !(gamma > 0.0)) {
    std::ostringstream os;
    os << "coefficient field not admissible at (x=" << x << ", u=" << u
       << "): alpha=" << alpha << ", gamma=" << gamma;
    throw std::domain_error(os.str());
  }
}

struct Roots {
  double minus;
  double plus;
  double root;  // sqrt(beta^2 + alpha^2 gamma^2)
};

Roots speeds(double alpha, double beta, double gamma) {
  const double a2 = alpha * alpha;
  const double r = std::sqrt(beta * beta + a2 * gamma * gamma);
  // Product of the roots is -gamma^2 / alpha^2; use it to avoid cancellation.
  Roots out{};
  out.root = r;
  if (beta == 0.0) {
    out.plus = gamma / alpha;
    out.minus = -out.plus;
  } else if (beta > 0.0) {
    out.plus = (beta + r) / a2;
    out.minus = -gamma * gamma / (beta + r);
  } else {
    out.minus = (beta - r) / a2;
    out.plus = gamma * gamma / (r - beta);
  }
  return out;
}

}  // namespace

WaveSpeeds eval_wave_speeds(const CoefficientField& field, double x, double u) {
  const FieldSample s = field(x, u);
  require_admissible(s.alpha, s.gamma, x, u);
  const Roots r = speeds(s.alpha, s.beta, s.gamma);
  return {r.minus, r.plus, s.alpha * r.minus, s.alpha * r.plus};
}

DerivedCoeffs derive(const FieldSample& s) {
  const Roots r = speeds(s.alpha, s.beta, s.gamma);
  const double a = s.alpha;
  const double a2 = a * a;
  // Implicit differentiation of alpha^2 l^2 - 2 beta l - gamma^2 = 0.
  auto dlambda = [&](double lam, double da, double db, double dg) {
    return (db * lam + s.gamma * dg - a * da * lam * lam) / (a2 * lam - s.beta);
  };
  const double lm_x = dlambda(r.minus, s.alpha_x, s.beta_x, s.gamma_x);
  const double lm_u = dlambda(r.minus, s.alpha_u, s.beta_u, s.gamma_u);
  const double lp_x = dlambda(r.plus, s.alpha_x, s.beta_x, s.gamma_x);
  const double lp_u = dlambda(r.plus, s.alpha_u, s.beta_u, s.gamma_u);

  DerivedCoeffs d{};
  d.alpha = a;
  d.alpha_x = s.alpha_x;
  d.lambda_minus = r.minus;
  d.lambda_plus = r.plus;
  d.c1 = a * r.minus;
  d.c2 = a * r.plus;
  d.c1_x = s.alpha_x * r.minus + a * lm_x;
  d.c1_u = s.alpha_u * r.minus + a * lm_u;
  d.c2_x = s.alpha_x * r.plus + a * lp_x;
  d.c2_u = s.alpha_u * r.plus + a * lp_u;

  const double c1 = d.c1;
  const double c2 = d.c2;
  const double D = c2 - c1;
  d.a1 = (c1 * s.alpha_u - a * d.c1_u) / (2.0 * a * D);
  d.a2 = (c2 * s.alpha_u - a * d.c2_u) / (2.0 * a * D);
  d.b = (a * (d.c1_x - d.c2_x) + (c1 - c2) * s.alpha_x) / (2.0 * a * D);
  const double common = (c2 * d.c1_x - c1 * d.c2_x) / (2.0 * D);
  d.d1 = common + (a * d.c1_x - c1 * s.alpha_x) / (2.0 * a);
  d.d2 = common + (a * d.c2_x - c2 * s.alpha_x) / (2.0 * a);
  return d;
}

DerivedCoeffs derive(const CoefficientField& field, double x, double u) {
  const FieldSample s = field(x, u);
  require_admissible(s.alpha, s.gamma, x, u);
  return derive(s);
}

SourceCoeffs eval_source_coeffs(const CoefficientField& field, double x, double u) {
  const DerivedCoeffs d = derive(field, x, u);
  return {d.a1, d.a2, d.b, d.d1, d.d2};
}

SourceWeights source_weights(const DerivedCoeffs& d) {
  const double k = 2.0 / (d.alpha * (d.c2 - d.c1));
  return {k * d.c2 * d.a1, -k * d.c1 * d.a2, -k * d.c1 * d.c2 * d.b};
}

namespace {

template <class F>
void for_each_sample(const Rect& domain, std::size_t samples, F&& f) {
  if (!(domain.x_max >= domain.x_min) || !(domain.u_max >= domain.u_min))
    throw std::invalid_argument("validate_bounds: empty domain");
  if (samples == 0) throw std::invalid_argument("validate_bounds: need at least one sample");
  std::size_t n = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(samples))));
  const std::size_t nx = domain.x_max > domain.x_min ? std::max<std::size_t>(n, 1) : 1;
  const std::size_t nu = domain.u_max > domain.u_min ? std::max<std::size_t>(n, 1) : 1;
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = nx == 1 ? domain.x_min
                             : domain.x_min + (domain.x_max - domain.x_min) * static_cast<double>(i) /
                                                  static_cast<double>(nx - 1);
    for (std::size_t j = 0; j < nu; ++j) {
      const double u = nu == 1 ? domain.u_min
                               : domain.u_min + (domain.u_max - domain.u_min) *
                                                    static_cast<double>(j) /
                                                    static_cast<double>(nu - 1);
      f(x, u);
    }
  }
}

}  // namespace

BoundsReport validate_bounds(const CoefficientField& field, const Rect& domain,
                             std::size_t samples) {
  const auto& B = field.bounds();
  BoundsReport rep{};
  const double inf = std::numeric_limits<double>::infinity();
  rep.alpha_min = rep.gamma_min = rep.lambda_minus_min = rep.lambda_plus_min = rep.ratio_min = inf;
  rep.alpha_max = rep.gamma_max = rep.lambda_minus_max = rep.lambda_plus_max = rep.ratio_max = -inf;
  rep.beta_abs_max = rep.grad_max = 0.0;
  rep.N_lower = B.speed_lower();
  rep.N_upper = B.speed_upper();
  rep.ratio_lower = B.ratio_lower();
  rep.ratio_upper = B.ratio_upper();
  // Relative slack for comparisons against closed-form bounds.
  constexpr double slack = 1e-12;

  for_each_sample(domain, samples, [&](double x, double u) {
    ++rep.samples;
    const FieldSample s = field(x, u);
    auto flag = [&](const std::string& what) { rep.violations.push_back({x, u, what}); };
    rep.alpha_min = std::min(rep.alpha_min, s.alpha);
    rep.alpha_max = std::max(rep.alpha_max, s.alpha);
    rep.beta_abs_max = std::max(rep.beta_abs_max, std::abs(s.beta));
    rep.gamma_min = std::min(rep.gamma_min, s.gamma);
    rep.gamma_max = std::max(rep.gamma_max, s.gamma);
    rep.grad_max = std::max({rep.grad_max, std::hypot(s.alpha_x, s.alpha_u),
                             std::hypot(s.beta_x, s.beta_u), std::hypot(s.gamma_x, s.gamma_u)});
    if (s.alpha < B.alpha1 * (1 - slack) || s.alpha > B.alpha2 * (1 + slack))
      flag("alpha outside [alpha1, alpha2]");
    if (std::abs(s.beta) > B.beta2 * (1 + slack) + slack) flag("|beta| exceeds beta2");
    if (s.gamma < B.gamma1 * (1 - slack) || s.gamma > B.gamma2 * (1 + slack))
      flag("gamma outside [gamma1, gamma2]");
    if (!(s.alpha > 0.0) || !(s.gamma > 0.0)) {
      flag("alpha or gamma not positive");
      return;
    }
    const DerivedCoeffs d = derive(s);
    rep.lambda_minus_min = std::min(rep.lambda_minus_min, d.lambda_minus);
    rep.lambda_minus_max = std::max(rep.lambda_minus_max, d.lambda_minus);
    rep.lambda_plus_min = std::min(rep.lambda_plus_min, d.lambda_plus);
    rep.lambda_plus_max = std::max(rep.lambda_plus_max, d.lambda_plus);
    if (!(d.lambda_minus < 0.0 && d.lambda_plus > 0.0)) flag("strict hyperbolicity lost");
    for (double lam : {-d.lambda_minus, d.lambda_plus}) {
      if (lam < rep.N_lower * (1 - slack) || lam > rep.N_upper * (1 + slack))
        flag("|lambda| outside [N_lower, N_upper]");
    }
    const double D = d.c2 - d.c1;
    if (D / d.alpha < 2.0 * B.gamma1 / B.alpha2 * (1 - slack))
      flag("lambda_plus - lambda_minus below 2 gamma1 / alpha2");
    for (double c : {d.c1, d.c2}) {
      const double ratio = std::abs(c / D);
      rep.ratio_min = std::min(rep.ratio_min, ratio);
      rep.ratio_max = std::max(rep.ratio_max, ratio);
      if (ratio < rep.ratio_lower * (1 - slack) || ratio > rep.ratio_upper * (1 + slack))
        flag("|c_i / (c2 - c1)| outside its closed-form bounds");
    }
  });
  return rep;
}

double source_bound_constant(const CoefficientField& field, const Rect& domain,
                             std::size_t samples) {
  double chat = 0.0;
  for_each_sample(domain, samples, [&](double x, double u) {
    const DerivedCoeffs d = derive(field, x, u);
    const SourceWeights w = source_weights(d);
    const double D = d.c2 - d.c1;
    const double k1 = -d.c1 / D;
    const double k2 = d.c2 / D;
    // R^2 S = Rt2 S / k1, R S^2 = R St2 / k2, |R S| <= (Rt2 / k1 + St2 / k2) / 2.
    chat = std::max({chat, std::abs(w.A) / k1, std::abs(w.B) / k2, std::abs(w.C) / (2.0 * k1),
                     std::abs(w.C) / (2.0 * k2)});
  });
  return chat;
}

}  // namespace vwave
