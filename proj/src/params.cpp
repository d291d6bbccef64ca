#include "choq/params.hpp"

#include <cmath>

#include "choq/errors.hpp"

namespace choq {

ProblemParams make_params(int n, const Rational& mu) {
  if (n < 3) {
    throw validation_error("make_params: dimension n must be >= 3, got " +
                           std::to_string(n));
  }
  if (!(mu > 0 && mu < n)) {
    throw validation_error("make_params: mu must lie in the open interval (0, " +
                           std::to_string(n) + "), got " + to_string(mu));
  }
  ProblemParams p;
  p.n = n;
  p.mu = mu;
  p.two_star_mu = (Rational(2 * n) - mu) / Rational(n - 2);
  p.two_star = Rational(2 * n, n - 2);
  return p;
}

ProblemParams make_params(int n, double mu) {
  // A double is a dyadic rational; conversion is exact.
  Rational r;
  if (std::isfinite(mu)) {
    r = Rational(mu);
  } else {
    throw validation_error("make_params: mu must be finite");
  }
  return make_params(n, r);
}

double bubble_cn(int n) {
  return std::pow(static_cast<double>(n) * (n - 2), (n - 2) / 4.0);
}

double bubble_eval(const Bubble& b, const ProblemParams& params,
                   const std::vector<double>& x) {
  const int n = params.n;
  if (static_cast<int>(x.size()) != n ||
      static_cast<int>(b.x0.size()) != n) {
    throw validation_error("bubble_eval: point dimension mismatch");
  }
  if (!(b.lambda > 0)) {
    throw validation_error("bubble_eval: lambda must be positive");
  }
  double r2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = x[i] - b.x0[i];
    r2 += d * d;
  }
  const double lam2 = b.lambda * b.lambda;
  const double expo = (n - 2) / 2.0;
  return std::pow(b.lambda, -expo) * bubble_cn(n) *
         std::pow(1.0 + r2 / lam2, -expo);
}

}  // namespace choq
