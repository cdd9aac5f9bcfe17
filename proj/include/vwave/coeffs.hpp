#pragma once

// Coefficient fields alpha, beta, gamma of the quasilinear variational wave
// equation
//
//   (alpha^2 u_t + beta u_x)_t + (beta u_t - gamma^2 u_x)_x
//       = alpha alpha_u u_t^2 + beta_u u_t u_x - gamma gamma_u u_x^2
//
// and the quantities derived from them pointwise: characteristic speeds,
// signed wave speeds c1 < 0 < c2 and the source coefficients a1, a2, b, d1, d2
// of the Riemann-variable system.

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace vwave {

/// Values and first partials of (alpha, beta, gamma) at one (x, u).
struct FieldSample {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 1.0;
  double alpha_x = 0.0;
  double alpha_u = 0.0;
  double beta_x = 0.0;
  double beta_u = 0.0;
  double gamma_x = 0.0;
  double gamma_u = 0.0;
};

/// Declared admissibility constants: alpha1 <= alpha <= alpha2, |beta| <= beta2,
/// gamma1 <= gamma <= gamma2, and a bound on the gradients.
struct CoefficientBounds {
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta2 = 0.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double grad_sup = 0.0;

  /// Lower bound of |lambda_pm|.
  double speed_lower() const;
  /// Upper bound of |lambda_pm|.
  double speed_upper() const;
  /// Lower bound of |c_i / (c2 - c1)|, i.e. 1 / M_under.
  double ratio_lower() const;
  /// Upper bound of |c_i / (c2 - c1)|.
  double ratio_upper() const;
  /// The constant M_under itself (reciprocal of ratio_lower()).
  double m_under() const { return 1.0 / ratio_lower(); }
};

/// Tabulated coefficients on a tensor (x, u) grid, interpolated with
/// Catmull-Rom cubics in each direction (C1 across cells).
struct TabulatedField {
  std::vector<double> xs;
  std::vector<double> us;
  // Row-major [ix * us.size() + iu].
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
};

class CoefficientField {
 public:
  using Evaluator = std::function<FieldSample(double x, double u)>;
  using ValueFn = std::function<std::array<double, 3>(double x, double u)>;

  CoefficientField(std::string name, Evaluator eval, CoefficientBounds bounds,
                   bool constant = false);

  /// Field given only by values; partials come from centered differences.
  static CoefficientField with_fd_partials(std::string name, ValueFn values,
                                           CoefficientBounds bounds,
                                           double step = 1e-5);

  static CoefficientField linear(double alpha, double beta, double gamma);
  /// alpha = 1, beta = 0, gamma = c(u), c^2 = K1 cos^2 u + K2 sin^2 u.
  static CoefficientField liquid_crystal(double K1, double K2);
  /// alpha = 1, beta = 0, gamma = g0 (1 + eps sin(k x)).
  static CoefficientField x_heterogeneous(double g0, double eps, double k);
  /// Bounds default to the table extrema widened by 5%.
  static CoefficientField custom(TabulatedField table);
  static CoefficientField custom(TabulatedField table, CoefficientBounds bounds);

  FieldSample operator()(double x, double u) const { return eval_(x, u); }

  const CoefficientBounds& bounds() const { return bounds_; }
  const std::string& name() const { return name_; }
  /// True when all partials vanish identically.
  bool is_constant() const { return constant_; }

 private:
  std::string name_;
  Evaluator eval_;
  CoefficientBounds bounds_;
  bool constant_ = false;
};

struct WaveSpeeds {
  double lambda_minus;
  double lambda_plus;
  double c1;
  double c2;
};

struct SourceCoeffs {
  double a1;
  double a2;
  double b;
  double d1;
  double d2;
};

/// Everything the semilinear right-hand sides need at one (x, u).
struct DerivedCoeffs {
  double alpha;
  double alpha_x;
  double lambda_minus;
  double lambda_plus;
  double c1;
  double c2;
  double c1_x;
  double c2_x;
  double c1_u;
  double c2_u;
  double a1;
  double a2;
  double b;
  double d1;
  double d2;
};

/// Throws std::domain_error when alpha <= 0 or gamma <= 0 at (x, u).
WaveSpeeds eval_wave_speeds(const CoefficientField& field, double x, double u);
SourceCoeffs eval_source_coeffs(const CoefficientField& field, double x, double u);
DerivedCoeffs derive(const CoefficientField& field, double x, double u);
DerivedCoeffs derive(const FieldSample& s);

/// Source G of the energy balance laws, G = A R^2 S + B R S^2 + C R S.
struct SourceWeights {
  double A;
  double B;
  double C;
};
SourceWeights source_weights(const DerivedCoeffs& d);

struct Rect {
  double x_min;
  double x_max;
  double u_min;
  double u_max;
};

struct BoundsViolation {
  double x;
  double u;
  std::string what;
};

struct BoundsReport {
  std::size_t samples = 0;
  double alpha_min, alpha_max;
  double beta_abs_max;
  double gamma_min, gamma_max;
  double lambda_minus_min, lambda_minus_max;
  double lambda_plus_min, lambda_plus_max;
  double ratio_min, ratio_max;  // |c_i / (c2 - c1)| over both i
  double grad_max;
  // Analytic bounds from the declared constants.
  double N_lower, N_upper;
  double ratio_lower, ratio_upper;
  std::vector<BoundsViolation> violations;

  bool ok() const { return violations.empty(); }
};

/// Samples the field on a tensor grid of about `samples` points covering
/// `domain` (endpoints included), compares against the declared bounds and
/// reports every violation. Throws std::invalid_argument for an empty domain.
BoundsReport validate_bounds(const CoefficientField& field, const Rect& domain,
                             std::size_t samples);

/// Sup over `domain` of the constant C_hat in
/// |G| <= C_hat (|Rt2 S| + |R St2| + Rt2 + St2).
double source_bound_constant(const CoefficientField& field, const Rect& domain,
                             std::size_t samples);

}  // namespace vwave
