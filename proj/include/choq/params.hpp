#pragma once

#include <vector>

#include "choq/rational.hpp"

namespace choq {

// Problem data for the critically nonlinear nonlocal equation on R^n and its
// lift to S^n: dimension n >= 3, nonlocality mu in (0, n), and the two
// exponents
//   two_star_mu = (2n - mu)/(n - 2),   two_star = 2n/(n - 2).
// Exponents are kept as exact rationals whenever mu is rational so that the
// regularity ledger can do strict open-interval comparisons without rounding.
struct ProblemParams {
  int n = 0;
  Rational mu;
  Rational two_star_mu;
  Rational two_star;

  double mu_d() const { return to_double(mu); }
  double two_star_mu_d() const { return to_double(two_star_mu); }
  double two_star_d() const { return to_double(two_star); }
};

// Validates and derives the exponents. Rejects n < 3 and mu outside the open
// interval (0, n); the bounds are strict with no tolerance.
ProblemParams make_params(int n, const Rational& mu);
ProblemParams make_params(int n, double mu);

// Scale/translate family of entire positive solutions on R^n.
// Evaluates to lambda^{-(n-2)/2} c_n at the center x0, with
// c_n = (n(n-2))^{(n-2)/4}, and decays radially about x0.
struct Bubble {
  std::vector<double> x0;
  double lambda = 1.0;
};

double bubble_cn(int n);
double bubble_eval(const Bubble& b, const ProblemParams& params,
                   const std::vector<double>& x);

// The sharp constant of the diagonal Hardy-Littlewood-Sobolev inequality is
// carried around symbolically only; nothing in this codebase evaluates it.
struct SharpHlsConstant {
  int n = 0;
  Rational mu;
  Rational p;
};

}  // namespace choq
