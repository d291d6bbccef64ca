#pragma once

#include <functional>
#include <vector>

#include "choq/params.hpp"

namespace choq {

// Point on S^n stored as a unit vector in R^{n+1}; constructor normalizes and
// rejects inputs that are too short to normalize meaningfully.
struct SpherePoint {
  std::vector<double> xi;

  explicit SpherePoint(std::vector<double> coords);
  int ambient_dim() const { return static_cast<int>(xi.size()); }
  double last() const { return xi.back(); }
};

// Projection through the south pole S = (0,...,0,-1):
//   pi(xi) = (xi_1, ..., xi_n) / (1 + xi_{n+1}).
// Inputs with 1 + xi_{n+1} < 1e-13 are rejected rather than extrapolated.
std::vector<double> stereo_project(const SpherePoint& xi);

// pi^{-1}(x) = (2x, 1 - |x|^2) / (1 + |x|^2); always a unit vector.
SpherePoint stereo_inverse(const std::vector<double>& x);

// Conformal weights of the function-space map P and its inverse:
//   (2 / (1+|x|^2))^{(n-2)/2}   on the plane,
//   (1 / (1+xi_{n+1}))^{(n-2)/2} on the sphere.
// Their product along pi is 1.
double conformal_factor_plane(int n, const std::vector<double>& x);
double conformal_factor_sphere(int n, const SpherePoint& xi);

// | |pi(xi) - pi(zeta)|  -  |xi - zeta| / (sqrt(1+xi_{n+1}) sqrt(1+zeta_{n+1})) |
double chordal_identity_residual(const SpherePoint& xi, const SpherePoint& zeta);

using SphereFunction = std::function<double(const SpherePoint&)>;
using FlatFunction = std::function<double(const std::vector<double>&)>;

// (Pv)(x) = factor(x) * v(pi^{-1}(x))
double push_forward(const SphereFunction& v, const ProblemParams& params,
                    const std::vector<double>& x);

// (P^{-1}u)(xi) = factor(xi) * u(pi(xi)); rejects the south pole.
double pull_back(const FlatFunction& u, const ProblemParams& params,
                 const SpherePoint& xi);

// L^p norm of Pv over R^n for a radial sphere function v = v(xi_{n+1}),
// by adaptive radial quadrature on [0, R_max] where R_max is chosen from the
// conformal decay bound so the dropped tail is below 1e-10 of the integral.
double flat_lp_norm_radial(const std::function<double(double)>& v_of_last,
                           const ProblemParams& params, double p);

// Same for a biaxial-invariant function on S^3 (blocks (2,2)), given as a
// profile in theta with cos(theta) = |xi-block-1|. Two-dimensional (r, angle)
// quadrature on the flat side.
double flat_lp_norm_biaxial3(const std::function<double(double)>& v_of_theta,
                             const ProblemParams& params, double p);

}  // namespace choq
