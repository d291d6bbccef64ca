#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>

#include "choq/params.hpp"

namespace choq {

enum class SymmetryClass { G, Gamma };

// Nodal values of an invariant function on the reduced domain
// theta in (0, pi/2). Gamma-tagged fields are odd under the reflection
// theta -> pi/2 - theta, which realizes the block swap when n1 = n2.
struct FieldFunction {
  Eigen::VectorXd values;
  SymmetryClass tag = SymmetryClass::G;
};

// Collocation grid for biaxial symmetry O(n1) x O(n2), n1 + n2 = n + 1.
// Nodes are Gauss-Jacobi in s = cos(2 theta) at exponents
// ((n2-2)/2, (n1-2)/2), so the weights carry the orbit-volume density
// |S^{n1-1}| |S^{n2-1}| cos^{n1-1} sin^{n2-1} exactly; the quadrature is
// exact for polynomials in s up to degree 2*size - 1 and reproduces |S^n|.
// Differentiation is barycentric-spectral in s, chained to theta.
class ReducedGrid {
 public:
  ReducedGrid(const ProblemParams& params, std::pair<int, int> parts, int size);

  const ProblemParams& params() const { return params_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int size() const { return static_cast<int>(theta_.size()); }
  bool reflection_symmetric() const { return n1_ == n2_; }
  int design_degree() const { return 2 * (size() - 1); }  // sphere degree

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& s() const { return s_; }
  const Eigen::VectorXd& weights() const { return w_; }

  const Eigen::MatrixXd& d1() const { return d1_theta_; }
  const Eigen::MatrixXd& laplacian_matrix() const { return lap_; }
  const Eigen::MatrixXd& h1_gram() const { return h1_; }

  // Values of the L^2(dV)-orthonormal polynomial basis, (i, k) = phi_k(s_i).
  const Eigen::MatrixXd& basis() const { return phi_; }

  // phi_k(s) for k < size at an arbitrary s in [-1, 1], by the recurrence.
  Eigen::VectorXd basis_at(double s) const;

  double volume() const { return w_.sum(); }

  double l2_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  double h1_inner(const FieldFunction& u, const FieldFunction& v) const;
  double h1_norm(const FieldFunction& v) const;

  // v'' + [(n2-1) cot(theta) - (n1-1) tan(theta)] v', nodewise.
  FieldFunction apply_laplacian(const FieldFunction& v) const;

  // Unique-up-to-sign L^2-normalized invariant harmonic of even degree,
  // built by Gram-Schmidt of {1, cos 2theta, cos^2 2theta, ...} against
  // L^2(dV) and refined by a small generalized eigensolve under the reduced
  // Laplacian. Returns the field and its Rayleigh eigenvalue; empty for odd
  // degree (the invariant space is trivial there).
  struct Harmonic {
    FieldFunction field;
    double eigenvalue;
  };
  std::optional<Harmonic> invariant_harmonic(int degree) const;

  // Barycentric evaluation of the nodal interpolant at arbitrary theta.
  double interpolate(const Eigen::VectorXd& v, double theta) const;

  // Node reindexing of the reflection theta -> pi/2 - theta (n1 = n2 only).
  int reflected_index(int j) const;
  Eigen::VectorXd reflect(const Eigen::VectorXd& v) const;
  Eigen::VectorXd project_gamma(const Eigen::VectorXd& v) const;
  bool is_gamma(const Eigen::VectorXd& v, double tol = 1e-10) const;

 private:
  ProblemParams params_;
  int n1_ = 0, n2_ = 0;
  Eigen::VectorXd theta_, s_, w_;
  Eigen::MatrixXd d1_theta_, d2_theta_, lap_, h1_, grad_gram_, phi_;
  Eigen::VectorXd bary_logw_, bary_sign_;
  Eigen::VectorXd rec_a_, rec_sqrtb_;  // orthonormal Jacobi recurrence
  double phi0_ = 0.0;
  double measure_const_ = 0.0;  // prefactor turning the Jacobi weight into dV
};

}  // namespace choq
