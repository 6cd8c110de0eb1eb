#pragma once

#include <optional>

#include "scpnum/network.hpp"

namespace scpnum {

/// S-curve utility of a streaming source:
///
///   U(x) = (1 - exp(-c1 (x/r)^c2)) / (1 - exp(-c1))
///
/// with encoding rate r (Kbps), shape parameters c1 > 0 and c2 >= 1, and the
/// admissible rate interval [m, M].
struct SCurveUtility {
  double r;
  double c1;
  double c2;
  double m;
  double M;

  /// Validating constructor. Missing bounds default to m = 1 Kbps, M = r.
  /// Throws InvalidParameter.
  static SCurveUtility make(double r, double c1, double c2, std::optional<double> m = {},
                            std::optional<double> M = {});

  RateBounds bounds() const noexcept { return {m, M}; }
};

/// Sigmoidal logistic utility 1 / (1 + exp(-alpha (x - beta))).
struct LogisticUtility {
  double alpha;
  double beta;
};

double eval_scurve(const SCurveUtility& u, double x);
/// dU/dx in utility per Kbps.
double scurve_derivative(const SCurveUtility& u, double x);
/// Supremum of U as x grows without bound.
double scurve_limit(const SCurveUtility& u);
/// Rate at which U changes from convex to concave; 0 when c2 == 1.
double inflection_point(const SCurveUtility& u);

double eval_logistic(const LogisticUtility& u, double x);
double inflection_point(const LogisticUtility& u);

/// x~ = (x / r)^c2.
double transform(const SCurveUtility& u, double x);
/// x = r x~^(1/c2), without projection onto [m, M]. Throws NegativeTransformedRate.
double inverse_transform(const SCurveUtility& u, double x_tilde);

/// Image of [m, M] under the transform.
double transformed_lower(const SCurveUtility& u);
double transformed_upper(const SCurveUtility& u);

struct TransformedUtility {
  double value;
  double first;   // > 0
  double second;  // < 0
};

/// U~(x~) = (1 - exp(-c1 x~)) / (1 - exp(-c1)) and its first two derivatives.
TransformedUtility transformed_utility(const SCurveUtility& u, double x_tilde);

}  // namespace scpnum
