#include "choq/stereographic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "choq/errors.hpp"
#include "choq/quadrature.hpp"

namespace choq {

namespace {
constexpr double kSouthPoleGap = 1e-13;

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}
}  // namespace

SpherePoint::SpherePoint(std::vector<double> coords) : xi(std::move(coords)) {
  if (xi.size() < 2) {
    throw validation_error("SpherePoint: need at least 2 coordinates");
  }
  const double r = std::sqrt(norm2(xi));
  if (!(r > 1e-300)) {
    throw validation_error("SpherePoint: cannot normalize the zero vector");
  }
  for (double& v : xi) v /= r;
}

std::vector<double> stereo_project(const SpherePoint& xi) {
  const double denom = 1.0 + xi.last();
  if (denom < kSouthPoleGap) {
    throw validation_error("stereo_project: input is (numerically) the south pole");
  }
  std::vector<double> x(xi.xi.begin(), xi.xi.end() - 1);
  for (double& v : x) v /= denom;
  return x;
}

SpherePoint stereo_inverse(const std::vector<double>& x) {
  const double r2 = norm2(x);
  const double denom = 1.0 + r2;
  std::vector<double> xi(x.size() + 1);
  for (std::size_t i = 0; i < x.size(); ++i) xi[i] = 2.0 * x[i] / denom;
  xi.back() = (1.0 - r2) / denom;
  return SpherePoint(std::move(xi));
}

double conformal_factor_plane(int n, const std::vector<double>& x) {
  return std::pow(2.0 / (1.0 + norm2(x)), (n - 2) / 2.0);
}

double conformal_factor_sphere(int n, const SpherePoint& xi) {
  const double denom = 1.0 + xi.last();
  if (denom < kSouthPoleGap) {
    throw validation_error("conformal_factor_sphere: south pole");
  }
  return std::pow(1.0 / denom, (n - 2) / 2.0);
}

double chordal_identity_residual(const SpherePoint& xi, const SpherePoint& zeta) {
  if (xi.ambient_dim() != zeta.ambient_dim()) {
    throw validation_error("chordal_identity_residual: dimension mismatch");
  }
  const std::vector<double> px = stereo_project(xi);
  const std::vector<double> pz = stereo_project(zeta);
  double flat2 = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double d = px[i] - pz[i];
    flat2 += d * d;
  }
  double chord2 = 0.0;
  for (int i = 0; i < xi.ambient_dim(); ++i) {
    const double d = xi.xi[i] - zeta.xi[i];
    chord2 += d * d;
  }
  const double rhs = std::sqrt(chord2) /
                     (std::sqrt(1.0 + xi.last()) * std::sqrt(1.0 + zeta.last()));
  return std::abs(std::sqrt(flat2) - rhs);
}

double push_forward(const SphereFunction& v, const ProblemParams& params,
                    const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != params.n) {
    throw validation_error("push_forward: point dimension mismatch");
  }
  return conformal_factor_plane(params.n, x) * v(stereo_inverse(x));
}

double pull_back(const FlatFunction& u, const ProblemParams& params,
                 const SpherePoint& xi) {
  if (xi.ambient_dim() != params.n + 1) {
    throw validation_error("pull_back: point dimension mismatch");
  }
  const double factor = conformal_factor_sphere(params.n, xi);  // rejects S
  return factor * u(stereo_project(xi));
}

namespace {

// Shared radial panel layout: resolve [0, 2] finely (the conformal factor
// turns over at r ~ 1), then geometrically expanding panels out to r_max.
double radial_panels(const std::function<double(double)>& g, double r_max) {
  const QuadratureRule& rule = gauss_legendre(32);
  double acc = 0.0;
  const int inner = 8;
  for (int i = 0; i < inner; ++i) {
    acc += panel_integrate(rule, 2.0 * i / inner, 2.0 * (i + 1) / inner, g);
  }
  double lo = 2.0;
  while (lo < r_max) {
    const double hi = std::min(2.0 * lo, r_max);
    acc += panel_integrate(rule, lo, hi, g);
    lo = hi;
  }
  return acc;
}

double tail_cutoff(int n, double p, double vmax, double current_scale) {
  // |Pv|^p <= vmax^p (2/r^2)^{p(n-2)/2} for r >= 1, so the tail beyond R is
  // below surface(n) vmax^p 2^{p(n-2)/2} R^{n - p(n-2)} / (p(n-2) - n).
  const double decay = p * (n - 2) - n;
  if (decay <= 0) {
    throw validation_error("flat norm: p too small for an integrable tail");
  }
  const double c = sphere_surface(n) * std::pow(vmax, p) *
                   std::pow(2.0, p * (n - 2) / 2.0) / decay;
  double r = 8.0;
  while (c * std::pow(r, -decay) > 1e-10 * std::max(current_scale, 1e-30) &&
         r < 1e12) {
    r *= 2.0;
  }
  return r;
}

}  // namespace

double flat_lp_norm_radial(const std::function<double(double)>& v_of_last,
                           const ProblemParams& params, double p) {
  const int n = params.n;
  double vmax = 0.0;
  for (int i = 0; i <= 64; ++i) {
    vmax = std::max(vmax, std::abs(v_of_last(-1.0 + 2.0 * i / 64.0)));
  }
  auto integrand = [&](double r) {
    const double r2 = r * r;
    const double last = (1.0 - r2) / (1.0 + r2);
    const double pv = std::pow(2.0 / (1.0 + r2), (n - 2) / 2.0) * v_of_last(last);
    return std::pow(std::abs(pv), p) * sphere_surface(n) * std::pow(r, n - 1);
  };
  double total = radial_panels(integrand, 8.0);
  const double r_max = tail_cutoff(n, p, vmax, total);
  if (r_max > 8.0) {
    const QuadratureRule& rule = gauss_legendre(32);
    double lo = 8.0;
    while (lo < r_max) {
      const double hi = std::min(2.0 * lo, r_max);
      total += panel_integrate(rule, lo, hi, integrand);
      lo = hi;
    }
  }
  return std::pow(total, 1.0 / p);
}

double flat_lp_norm_biaxial3(const std::function<double(double)>& v_of_theta,
                             const ProblemParams& params, double p) {
  if (params.n != 3) {
    throw validation_error("flat_lp_norm_biaxial3: only n = 3 is supported");
  }
  double vmax = 0.0;
  for (int i = 0; i <= 64; ++i) {
    vmax = std::max(vmax,
                    std::abs(v_of_theta(0.5 * std::numbers::pi * i / 64.0)));
  }
  const QuadratureRule& phi_rule = gauss_legendre(32);
  // Angle phi is measured from the x3 axis; the first block of the lifted
  // point has norm 2 r sin(phi) / (1 + r^2).
  auto integrand_r = [&](double r) {
    const double r2 = r * r;
    auto f_phi = [&](double phi) {
      double c = 2.0 * r * std::sin(phi) / (1.0 + r2);
      c = std::clamp(c, 0.0, 1.0);
      const double theta = std::acos(c);
      const double pv = std::sqrt(2.0 / (1.0 + r2)) * v_of_theta(theta);
      return std::pow(std::abs(pv), p) * std::sin(phi);
    };
    const double ang =
        panel_integrate(phi_rule, 0.0, std::numbers::pi, f_phi);
    return 2.0 * std::numbers::pi * r2 * ang;
  };
  double total = radial_panels(integrand_r, 8.0);
  const double r_max = tail_cutoff(3, p, vmax, total);
  if (r_max > 8.0) {
    const QuadratureRule& rule = gauss_legendre(32);
    double lo = 8.0;
    while (lo < r_max) {
      const double hi = std::min(2.0 * lo, r_max);
      total += panel_integrate(rule, lo, hi, integrand_r);
      lo = hi;
    }
  }
  return std::pow(total, 1.0 / p);
}

}  // namespace choq
