#include "choq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "choq/errors.hpp"
#include "choq/quadrature.hpp"

namespace choq {

namespace {

// Barycentric weights as sign/log pairs; only ratios are ever used, so a
// common scale is irrelevant and overflow is not a concern.
void barycentric_logweights(const Eigen::VectorXd& x, Eigen::VectorXd& logw,
                            Eigen::VectorXd& sign) {
  const int n = static_cast<int>(x.size());
  logw.resize(n);
  sign.resize(n);
  for (int j = 0; j < n; ++j) {
    double lw = 0.0;
    double sg = 1.0;
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      const double d = x[j] - x[k];
      lw -= std::log(std::abs(d));
      if (d < 0) sg = -sg;
    }
    logw[j] = lw;
    sign[j] = sg;
  }
}

Eigen::MatrixXd diff_matrix(const Eigen::VectorXd& x,
                            const Eigen::VectorXd& logw,
                            const Eigen::VectorXd& sign) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double ratio =
          sign[j] * sign[i] * std::exp(logw[j] - logw[i]);
      d(i, j) = ratio / (x[i] - x[j]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

// Welfert's second-derivative formula with the negative-sum diagonal.
Eigen::MatrixXd diff2_matrix(const Eigen::VectorXd& x,
                             const Eigen::MatrixXd& d1) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd d2(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d2(i, j) = 2.0 * d1(i, j) * (d1(i, i) - 1.0 / (x[i] - x[j]));
      diag -= d2(i, j);
    }
    d2(i, i) = diag;
  }
  return d2;
}

}  // namespace

ReducedGrid::ReducedGrid(const ProblemParams& params, std::pair<int, int> parts,
                         int size)
    : params_(params), n1_(parts.first), n2_(parts.second) {
  if (size < 8) {
    throw validation_error("ReducedGrid: size must be >= 8");
  }
  if (n1_ < 2 || n2_ < 2 || n1_ + n2_ != params_.n + 1) {
    throw validation_error(
        "ReducedGrid: parts must be >= 2 each and sum to n + 1");
  }
  const double alpha = 0.5 * (n2_ - 2);
  const double beta = 0.5 * (n1_ - 2);
  QuadratureRule rule = gauss_jacobi(size, alpha, beta);

  // dV restricted to invariants: |S^{n1-1}||S^{n2-1}| cos^{n1-1} sin^{n2-1} dtheta
  //   = measure_const * (1-s)^alpha (1+s)^beta ds.
  measure_const_ = sphere_surface(n1_) * sphere_surface(n2_) /
                   std::pow(2.0, alpha + beta + 2.0);

  // Gauss nodes come out ascending in s; theta = acosient... flip to make
  // theta ascending.
  std::vector<int> order(size);
  for (int i = 0; i < size; ++i) order[i] = size - 1 - i;
  s_.resize(size);
  w_.resize(size);
  for (int i = 0; i < size; ++i) {
    s_[i] = rule.nodes[order[i]];
    w_[i] = measure_const_ * rule.weights[order[i]];
  }
  if (n1_ == n2_) {
    // Make the node set exactly symmetric under s -> -s so that the
    // reflection theta -> pi/2 - theta is a node permutation.
    for (int i = 0; i < size / 2; ++i) {
      const int j = size - 1 - i;
      const double sym = 0.5 * (s_[i] - s_[j]);
      s_[i] = sym;
      s_[j] = -sym;
      const double wm = 0.5 * (w_[i] + w_[j]);
      w_[i] = wm;
      w_[j] = wm;
    }
    if (size % 2 == 1) s_[size / 2] = 0.0;
  }
  theta_.resize(size);
  for (int i = 0; i < size; ++i) {
    theta_[i] = 0.5 * std::acos(std::clamp(s_[i], -1.0, 1.0));
  }

  barycentric_logweights(s_, bary_logw_, bary_sign_);
  const Eigen::MatrixXd ds = diff_matrix(s_, bary_logw_, bary_sign_);
  const Eigen::MatrixXd ds2 = diff2_matrix(s_, ds);

  // Chain rule for s = cos 2theta.
  Eigen::VectorXd sp(size), spp(size);
  for (int i = 0; i < size; ++i) {
    sp[i] = -2.0 * std::sin(2.0 * theta_[i]);
    spp[i] = -4.0 * std::cos(2.0 * theta_[i]);
  }
  d1_theta_ = sp.asDiagonal() * ds;
  d2_theta_ = sp.cwiseProduct(sp).asDiagonal() * ds2 + spp.asDiagonal() * ds;

  Eigen::VectorXd coef(size);
  for (int i = 0; i < size; ++i) {
    coef[i] = (n2_ - 1) / std::tan(theta_[i]) - (n1_ - 1) * std::tan(theta_[i]);
  }
  lap_ = d2_theta_ + coef.asDiagonal() * d1_theta_;

  grad_gram_ = d1_theta_.transpose() * w_.asDiagonal() * d1_theta_;
  grad_gram_ = 0.5 * (grad_gram_ + grad_gram_.transpose()).eval();
  const double mass = params_.n * (params_.n - 2) / 4.0;
  h1_ = grad_gram_ + mass * Eigen::MatrixXd(w_.asDiagonal());

  // Orthonormal basis of L^2(dV) polynomials in s via the Jacobi recurrence.
  const double ab = alpha + beta;
  rec_a_.resize(size);
  rec_sqrtb_.resize(size);
  for (int k = 0; k < size; ++k) {
    if (k == 0) {
      rec_a_[k] = (beta - alpha) / (ab + 2.0);
      rec_sqrtb_[k] = 0.0;  // unused slot
    } else {
      rec_a_[k] = (beta * beta - alpha * alpha) /
                  ((2.0 * k + ab) * (2.0 * k + ab + 2.0));
    }
  }
  for (int k = 1; k < size; ++k) {
    double b_k;
    if (k == 1) {
      b_k = 4.0 * (alpha + 1.0) * (beta + 1.0) /
            ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
    } else {
      const double m = k;
      b_k = 4.0 * m * (m + alpha) * (m + beta) * (m + ab) /
            ((2.0 * m + ab) * (2.0 * m + ab) * (2.0 * m + ab + 1.0) *
             (2.0 * m + ab - 1.0));
    }
    rec_sqrtb_[k] = std::sqrt(b_k);
  }
  phi0_ = 1.0 / std::sqrt(total_mass_jacobi(alpha, beta) * measure_const_);
  phi_.resize(size, size);
  for (int i = 0; i < size; ++i) {
    phi_.row(i) = basis_at(s_[i]).transpose();
  }
}

Eigen::VectorXd ReducedGrid::basis_at(double s) const {
  const int n = size();
  Eigen::VectorXd vals(n);
  vals[0] = phi0_;
  if (n == 1) return vals;
  double prev = 0.0, cur = phi0_;
  for (int k = 0; k + 1 < n; ++k) {
    const double next =
        ((s - rec_a_[k]) * cur - (k > 0 ? rec_sqrtb_[k] : 0.0) * prev) /
        rec_sqrtb_[k + 1];
    vals[k + 1] = next;
    prev = cur;
    cur = next;
  }
  return vals;
}

double ReducedGrid::l2_inner(const Eigen::VectorXd& u,
                             const Eigen::VectorXd& v) const {
  return u.dot(w_.asDiagonal() * v);
}

double ReducedGrid::h1_inner(const FieldFunction& u,
                             const FieldFunction& v) const {
  if (u.values.size() != size() || v.values.size() != size()) {
    throw validation_error("h1_inner: field does not live on this grid");
  }
  return u.values.dot(h1_ * v.values);
}

double ReducedGrid::h1_norm(const FieldFunction& v) const {
  return std::sqrt(std::max(0.0, h1_inner(v, v)));
}

FieldFunction ReducedGrid::apply_laplacian(const FieldFunction& v) const {
  if (v.values.size() != size()) {
    throw validation_error("apply_laplacian: field does not live on this grid");
  }
  return FieldFunction{lap_ * v.values, v.tag};
}

std::optional<ReducedGrid::Harmonic> ReducedGrid::invariant_harmonic(
    int degree) const {
  if (degree < 0 || degree > design_degree()) {
    throw validation_error("invariant_harmonic: degree outside grid design");
  }
  if (degree % 2 == 1) return std::nullopt;  // no odd invariant harmonics
  const int m = degree / 2;
  const int nb = m + 1;
  const int n = size();

  // Gram-Schmidt of the monomials 1, s, s^2, ... in L^2(dV); run twice for
  // orthogonality at roundoff level.
  Eigen::MatrixXd basis(n, nb);
  for (int k = 0; k < nb; ++k) {
    basis.col(k) = s_.array().pow(k);
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < nb; ++k) {
      for (int j = 0; j < k; ++j) {
        basis.col(k) -= l2_inner(basis.col(j), basis.col(k)) * basis.col(j);
      }
      const double nrm = std::sqrt(l2_inner(basis.col(k), basis.col(k)));
      basis.col(k) /= nrm;
    }
  }

  // Eigen-refinement: generalized eigensolve of the weak Laplacian on the
  // Gram-Schmidt span; the top eigenpair is the degree we want.
  const Eigen::MatrixXd a = basis.transpose() * grad_gram_ * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) {
    throw numeric_error("invariant_harmonic: eigen-refinement failed");
  }
  Eigen::VectorXd field = basis * es.eigenvectors().col(nb - 1);
  const double lambda = es.eigenvalues()(nb - 1);
  const double nrm = std::sqrt(l2_inner(field, field));
  field /= nrm;
  if (field[0] < 0) field = -field;
  return Harmonic{FieldFunction{field, SymmetryClass::G}, lambda};
}

double ReducedGrid::interpolate(const Eigen::VectorXd& v, double theta) const {
  if (v.size() != size()) {
    throw validation_error("interpolate: field does not live on this grid");
  }
  const double sx = std::cos(2.0 * theta);
  // Normalize the barycentric weights by the largest log to avoid overflow.
  const double lmax = bary_logw_.maxCoeff();
  double num = 0.0, den = 0.0;
  for (int j = 0; j < size(); ++j) {
    const double d = sx - s_[j];
    if (std::abs(d) < 1e-300) return v[j];
    const double wb = bary_sign_[j] * std::exp(bary_logw_[j] - lmax) / d;
    num += wb * v[j];
    den += wb;
  }
  return num / den;
}

int ReducedGrid::reflected_index(int j) const {
  if (!reflection_symmetric()) {
    throw validation_error("reflected_index: requires n1 = n2");
  }
  return size() - 1 - j;
}

Eigen::VectorXd ReducedGrid::reflect(const Eigen::VectorXd& v) const {
  if (!reflection_symmetric()) {
    throw validation_error("reflect: requires n1 = n2");
  }
  return v.reverse();
}

Eigen::VectorXd ReducedGrid::project_gamma(const Eigen::VectorXd& v) const {
  return 0.5 * (v - reflect(v));
}

bool ReducedGrid::is_gamma(const Eigen::VectorXd& v, double tol) const {
  if (!reflection_symmetric()) return false;
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  return (v + reflect(v)).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace choq
