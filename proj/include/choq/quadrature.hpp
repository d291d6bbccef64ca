#pragma once

#include <functional>
#include <vector>

namespace choq {

// Nodes/weights for integrals of the form
//   int_{-1}^{1} f(x) (1-x)^alpha (1+x)^beta dx,
// exact for polynomials f of degree <= 2*size - 1. alpha, beta > -1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch on the symmetric Jacobi matrix of the three-term recurrence.
QuadratureRule gauss_jacobi(int size, double alpha, double beta);

// alpha = beta = 0 case, cached per order.
const QuadratureRule& gauss_legendre(int size);

// sum of w_i f(a + (b-a)*(x_i+1)/2) scaled to [a, b] with unit weight.
double panel_integrate(const QuadratureRule& rule, double a, double b,
                       const std::function<double(double)>& f);

// Integrates f over [a, b] with panels geometrically graded toward the
// endpoint `toward` (which must be a or b), shrinking by `ratio` each level
// until the innermost panel is smaller than min_panel. The integrand may blow
// up at `toward` as long as it is integrable; the leftover sliver of width
// min_panel is dropped, so min_panel has to be chosen against the known
// strength of the singularity.
double graded_integrate(const std::function<double(double)>& f, double a,
                        double b, double toward, double ratio,
                        double min_panel, int order);

double total_mass_jacobi(double alpha, double beta);  // mu_0 of the weight

// Surface measure of the unit sphere S^{k-1} in R^k.
double sphere_surface(int k);

}  // namespace choq
