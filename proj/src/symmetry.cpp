#include "choq/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "choq/errors.hpp"
#include "choq/quadrature.hpp"

namespace choq {

int GroupDescriptor::ambient_dim() const {
  return std::accumulate(parts.begin(), parts.end(), 0);
}

int GroupDescriptor::sphere_dim() const { return ambient_dim() - 1; }

std::vector<GroupDescriptor> enumerate_descriptors(int n) {
  if (n < 3) {
    throw validation_error("enumerate_descriptors: n must be >= 3");
  }
  std::vector<GroupDescriptor> out;
  std::vector<int> current;
  // Partitions in non-increasing order, every part >= 2.
  auto recurse = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      if (current.size() >= 2) {
        GroupDescriptor g;
        g.parts = current;
        for (std::size_t i = 0; i + 1 < current.size() && !g.swap; ++i) {
          for (std::size_t j = i + 1; j < current.size() && !g.swap; ++j) {
            if (current[i] == current[j]) {
              g.swap = std::make_pair(static_cast<int>(i), static_cast<int>(j));
            }
          }
        }
        out.push_back(std::move(g));
      }
      return;
    }
    for (int part = std::min(remaining, max_part); part >= 2; --part) {
      if (remaining - part == 1) continue;  // would strand a part of size 1
      current.push_back(part);
      self(self, remaining - part, part);
      current.pop_back();
    }
  };
  recurse(recurse, n + 1, n - 1);  // a part of size n would strand size 1
  return out;
}

bool has_property_P(const GroupDescriptor& g) {
  for (std::size_t i = 0; i + 1 < g.parts.size(); ++i) {
    for (std::size_t j = i + 1; j < g.parts.size(); ++j) {
      if (g.parts[i] == g.parts[j]) return true;
    }
  }
  return false;
}

Eigen::MatrixXd build_tau(const GroupDescriptor& g) {
  if (!has_property_P(g)) {
    throw validation_error("build_tau: no two parts coincide");
  }
  std::pair<int, int> swap;
  if (g.swap) {
    swap = *g.swap;
    if (swap.first == swap.second ||
        swap.first >= static_cast<int>(g.parts.size()) ||
        swap.second >= static_cast<int>(g.parts.size()) ||
        g.parts[swap.first] != g.parts[swap.second]) {
      throw validation_error("build_tau: designated swap pair is invalid");
    }
  } else {
    bool found = false;
    for (std::size_t i = 0; i + 1 < g.parts.size() && !found; ++i) {
      for (std::size_t j = i + 1; j < g.parts.size() && !found; ++j) {
        if (g.parts[i] == g.parts[j]) {
          swap = {static_cast<int>(i), static_cast<int>(j)};
          found = true;
        }
      }
    }
  }
  const int dim = g.ambient_dim();
  std::vector<int> offsets(g.parts.size() + 1, 0);
  for (std::size_t i = 0; i < g.parts.size(); ++i) {
    offsets[i + 1] = offsets[i] + g.parts[i];
  }
  Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(dim, dim);
  const int a = offsets[swap.first], b = offsets[swap.second];
  const int block = g.parts[swap.first];
  for (int k = 0; k < block; ++k) {
    tau(a + k, a + k) = 0.0;
    tau(b + k, b + k) = 0.0;
    tau(a + k, b + k) = 1.0;
    tau(b + k, a + k) = 1.0;
  }
  return tau;
}

int min_orbit_dimension(const GroupDescriptor& g) {
  int min_part = std::numeric_limits<int>::max();
  for (int p : g.parts) min_part = std::min(min_part, p);
  if (min_part < 2) {
    throw validation_error(
        "min_orbit_dimension: parts below 2 admit finite orbits");
  }
  return min_part - 1;
}

double improved_embedding_exponent(const GroupDescriptor& g, int n) {
  if (g.ambient_dim() != n + 1) {
    throw validation_error("improved_embedding_exponent: parts do not sum to n+1");
  }
  const int d = min_orbit_dimension(g);
  if (n - d <= 2) return std::numeric_limits<double>::infinity();
  return 2.0 * (n - d) / (n - d - 2.0);
}

namespace {

// Coefficients of the Gegenbauer polynomial C_i^{lam} in the monomial basis.
std::vector<double> gegenbauer_coeffs(int degree, double lam) {
  std::vector<double> cm2 = {1.0};
  if (degree == 0) return cm2;
  std::vector<double> cm1 = {0.0, 2.0 * lam};
  if (degree == 1) return cm1;
  for (int k = 2; k <= degree; ++k) {
    std::vector<double> c(k + 1, 0.0);
    for (std::size_t m = 0; m < cm1.size(); ++m) {
      c[m + 1] += 2.0 * (k - 1 + lam) * cm1[m] / k;
    }
    for (std::size_t m = 0; m < cm2.size(); ++m) {
      c[m] -= (k - 2 + 2.0 * lam) * cm2[m] / k;
    }
    cm2 = std::move(cm1);
    cm1 = std::move(c);
  }
  return cm1;
}

// Moments int u^r dsigma over the normalized projection measure of S^{k-1},
// via the exact Gauss-Jacobi orbit rule at exponent (k-3)/2.
std::vector<double> projection_moments(int k, int max_r) {
  const double e = 0.5 * (k - 3);
  QuadratureRule rule = gauss_jacobi(max_r / 2 + 2, e, e);
  const double mass = total_mass_jacobi(e, e);
  std::vector<double> m(max_r + 1, 0.0);
  for (int r = 0; r <= max_r; ++r) {
    if (r % 2 == 1) continue;  // odd moments vanish by symmetry
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      acc += rule.weights[q] * std::pow(rule.nodes[q], r);
    }
    m[r] = acc / mass;
  }
  return m;
}

struct AveragedKernel {
  // avg over G of kernel(<h x, y>) where kernel has the given monomial
  // coefficients; the O(n1) x O(n2) average factorizes into per-block
  // moments of the two inner products.
  int n1 = 0, n2 = 0;
  std::vector<double> coeffs;
  std::vector<double> m1, m2;
  std::vector<std::vector<double>> binom;

  AveragedKernel(int n1_in, int n2_in, std::vector<double> c)
      : n1(n1_in), n2(n2_in), coeffs(std::move(c)) {
    const int deg = static_cast<int>(coeffs.size()) - 1;
    m1 = projection_moments(n1, deg);
    m2 = projection_moments(n2, deg);
    binom.assign(deg + 1, std::vector<double>(deg + 1, 0.0));
    for (int a = 0; a <= deg; ++a) {
      binom[a][0] = 1.0;
      for (int b = 1; b <= a; ++b) {
        binom[a][b] = binom[a - 1][b - 1] + (b <= a - 1 ? binom[a - 1][b] : 0.0);
      }
    }
  }

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const double ax = x.head(n1).norm(), bx = x.tail(n2).norm();
    const double ay = y.head(n1).norm(), by = y.tail(n2).norm();
    const int deg = static_cast<int>(coeffs.size()) - 1;
    // t1-moments: avg <h1 x1, y1>^r = (|x1||y1|)^r m_{n1}(r), same per block.
    std::vector<double> t1(deg + 1), t2(deg + 1);
    for (int r = 0; r <= deg; ++r) {
      t1[r] = std::pow(ax * ay, r) * m1[r];
      t2[r] = std::pow(bx * by, r) * m2[r];
    }
    double acc = 0.0;
    for (int m = 0; m <= deg; ++m) {
      if (coeffs[m] == 0.0) continue;
      double s = 0.0;
      for (int r = 0; r <= m; ++r) {
        s += binom[m][r] * t1[r] * t2[m - r];
      }
      acc += coeffs[m] * s;
    }
    return acc;
  }
};

int kernel_rank(const GroupDescriptor& g, const std::vector<double>& coeffs,
                bool antisymmetric, int sample_points) {
  if (g.parts.size() != 2) {
    throw validation_error(
        "invariant_harmonic_dim: only biaxial (m = 2) descriptors are "
        "supported");
  }
  const int n1 = g.parts[0], n2 = g.parts[1];
  if (antisymmetric && n1 != n2) {
    throw validation_error(
        "invariant_harmonic_dim: the antisymmetric class needs equal parts");
  }
  const int dim = n1 + n2;
  AveragedKernel avg(n1, n2, coeffs);

  std::mt19937_64 rng(0xc0ffee);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(sample_points);
  for (int p = 0; p < sample_points; ++p) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = gauss(rng);
    x.normalize();
    pts.push_back(std::move(x));
  }
  auto swap_blocks = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(dim);
    y.head(n2) = x.tail(n2);
    y.tail(n1) = x.head(n1);
    return y;
  };

  Eigen::MatrixXd gram(sample_points, sample_points);
  for (int p = 0; p < sample_points; ++p) {
    for (int q = p; q < sample_points; ++q) {
      double v = avg(pts[p], pts[q]);
      if (antisymmetric) {
        v = 0.5 * (v - avg(swap_blocks(pts[p]), pts[q]));
      }
      gram(p, q) = v;
      gram(q, p) = v;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-8 * sv(0)) ++rank;
  }
  return rank;
}

}  // namespace

int invariant_harmonic_dim(const GroupDescriptor& g, int degree,
                           bool antisymmetric) {
  if (degree < 0) {
    throw validation_error("invariant_harmonic_dim: degree must be >= 0");
  }
  const double lam = 0.5 * (g.sphere_dim() - 1);
  const int pts = std::min(64, 2 * degree + 16);
  return kernel_rank(g, gegenbauer_coeffs(degree, lam), antisymmetric, pts);
}

int invariant_span_rank(const GroupDescriptor& g, int max_degree,
                        bool antisymmetric) {
  if (max_degree < 0) {
    throw validation_error("invariant_span_rank: max_degree must be >= 0");
  }
  const double lam = 0.5 * (g.sphere_dim() - 1);
  // Reproducing kernel of the direct sum: degree blocks just add. Weights
  // per block keep every degree visible above the rank cutoff.
  std::vector<double> coeffs(max_degree + 1, 0.0);
  for (int d = 0; d <= max_degree; ++d) {
    const std::vector<double> c = gegenbauer_coeffs(d, lam);
    double peak = 0.0;
    for (double x : c) peak = std::max(peak, std::abs(x));
    for (std::size_t m = 0; m < c.size(); ++m) {
      coeffs[m] += c[m] / peak;
    }
  }
  const int pts = std::min(96, 2 * max_degree + 24);
  return kernel_rank(g, coeffs, antisymmetric, pts);
}

}  // namespace choq
