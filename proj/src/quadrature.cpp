#include "choq/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "choq/errors.hpp"

namespace choq {

double total_mass_jacobi(double alpha, double beta) {
  // 2^{a+b+1} B(a+1, b+1)
  return std::exp((alpha + beta + 1) * std::numbers::ln2 +
                  std::lgamma(alpha + 1) + std::lgamma(beta + 1) -
                  std::lgamma(alpha + beta + 2));
}

QuadratureRule gauss_jacobi(int size, double alpha, double beta) {
  if (size < 1) throw validation_error("gauss_jacobi: size must be >= 1");
  if (alpha <= -1 || beta <= -1) {
    throw validation_error("gauss_jacobi: exponents must be > -1");
  }
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(size, size);
  const double ab = alpha + beta;
  for (int k = 0; k < size; ++k) {
    double a_k;
    if (k == 0) {
      a_k = (beta - alpha) / (ab + 2.0);
    } else {
      const double den = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
      a_k = (beta * beta - alpha * alpha) / den;
    }
    J(k, k) = a_k;
    if (k + 1 < size) {
      double b_k1;
      if (k == 0) {
        b_k1 = 4.0 * (alpha + 1.0) * (beta + 1.0) /
               ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
      } else {
        const double m = k + 1.0;
        const double den = (2.0 * m + ab) * (2.0 * m + ab) *
                           (2.0 * m + ab + 1.0) * (2.0 * m + ab - 1.0);
        b_k1 = 4.0 * m * (m + alpha) * (m + beta) * (m + ab) / den;
      }
      J(k, k + 1) = J(k + 1, k) = std::sqrt(b_k1);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) {
    throw numeric_error("gauss_jacobi: tridiagonal eigensolve failed");
  }
  QuadratureRule rule;
  rule.nodes.resize(size);
  rule.weights.resize(size);
  const double mu0 = total_mass_jacobi(alpha, beta);
  for (int i = 0; i < size; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

const QuadratureRule& gauss_legendre(int size) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(size);
  if (it == cache.end()) {
    it = cache.emplace(size, gauss_jacobi(size, 0.0, 0.0)).first;
  }
  return it->second;
}

double panel_integrate(const QuadratureRule& rule, double a, double b,
                       const std::function<double(double)>& f) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(c + h * rule.nodes[i]);
  }
  return acc * h;
}

double graded_integrate(const std::function<double(double)>& f, double a,
                        double b, double toward, double ratio,
                        double min_panel, int order) {
  if (!(b > a)) return 0.0;
  const QuadratureRule& rule = gauss_legendre(order);
  const double len = b - a;
  if (toward != a && toward != b) {
    throw validation_error("graded_integrate: toward must be an endpoint");
  }
  double acc = 0.0;
  double d = len;  // distance of the current cut from `toward`
  while (d > min_panel) {
    const double d_next = std::max(d * ratio, 0.0);
    const double lo = (toward == a) ? a + d_next : b - d;
    const double hi = (toward == a) ? a + d : b - d_next;
    acc += panel_integrate(rule, lo, hi, f);
    if (d_next <= min_panel) break;
    d = d_next;
  }
  return acc;
}

double sphere_surface(int k) {
  if (k < 1) throw validation_error("sphere_surface: k must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k);
}

}  // namespace choq
