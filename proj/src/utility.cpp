#include "scpnum/utility.hpp"

#include <cmath>
#include <string>

#include "scpnum/errors.hpp"

namespace scpnum {

namespace {

// 1 - exp(-c1), evaluated without cancellation for small c1.
double normalizer(const SCurveUtility& u) { return -std::expm1(-u.c1); }

}  // namespace

SCurveUtility SCurveUtility::make(double r, double c1, double c2, std::optional<double> m,
                                  std::optional<double> M) {
  SCurveUtility u{r, c1, c2, m.value_or(1.0), M.value_or(r)};
  if (!(r > 0.0)) throw InvalidParameter("encoding rate r must be > 0");
  if (!(c1 > 0.0)) throw InvalidParameter("c1 must be > 0");
  if (!(c2 >= 1.0) || !std::isfinite(c2)) throw InvalidParameter("c2 must be >= 1");
  if (!(u.m > 0.0)) throw InvalidParameter("minimum rate m must be > 0");
  if (!(u.M > u.m) || !std::isfinite(u.M)) {
    throw InvalidParameter("maximum rate M must exceed m (m=" + std::to_string(u.m) +
                           ", M=" + std::to_string(u.M) + ")");
  }
  return u;
}

double eval_scurve(const SCurveUtility& u, double x) {
  return -std::expm1(-u.c1 * std::pow(x / u.r, u.c2)) / normalizer(u);
}

double scurve_derivative(const SCurveUtility& u, double x) {
  const double ratio = x / u.r;
  return u.c1 * u.c2 * std::pow(ratio, u.c2 - 1.0) / u.r *
         std::exp(-u.c1 * std::pow(ratio, u.c2)) / normalizer(u);
}

double scurve_limit(const SCurveUtility& u) { return 1.0 / normalizer(u); }

double inflection_point(const SCurveUtility& u) {
  if (u.c2 == 1.0) return 0.0;
  return u.r * std::pow((u.c2 - 1.0) / (u.c1 * u.c2), 1.0 / u.c2);
}

double eval_logistic(const LogisticUtility& u, double x) {
  return 1.0 / (1.0 + std::exp(-u.alpha * (x - u.beta)));
}

double inflection_point(const LogisticUtility& u) { return u.beta; }

double transform(const SCurveUtility& u, double x) { return std::pow(x / u.r, u.c2); }

double inverse_transform(const SCurveUtility& u, double x_tilde) {
  if (x_tilde < 0.0) {
    throw NegativeTransformedRate("transformed rate " + std::to_string(x_tilde) +
                                  " is negative; clamp to the transformed domain first");
  }
  return u.r * std::pow(x_tilde, 1.0 / u.c2);
}

double transformed_lower(const SCurveUtility& u) { return transform(u, u.m); }
double transformed_upper(const SCurveUtility& u) { return transform(u, u.M); }

TransformedUtility transformed_utility(const SCurveUtility& u, double x_tilde) {
  const double norm = normalizer(u);
  const double decay = std::exp(-u.c1 * x_tilde);
  return {-std::expm1(-u.c1 * x_tilde) / norm, u.c1 * decay / norm,
          -u.c1 * u.c1 * decay / norm};
}

}  // namespace scpnum
