#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "choq/grid.hpp"
#include "choq/kernel.hpp"
#include "choq/params.hpp"

namespace choq {

struct EnergyBreakdown {
  double quadratic = 0.0;  // (1/2) int (|grad v|^2 + n(n-2)/4 v^2) dV
  double nonlocal = 0.0;   // 1/(2 p) int J_mu[|v|^p] |v|^p dV, p = two_star_mu
  double total = 0.0;      // quadratic - nonlocal, exactly as stored
};

struct SolveOptions {
  double tol = 1e-8;           // H1 norm of the Riesz gradient
  int max_iter = 600;          // descent iterations
  int newton_max_iter = 80;
  double descent_switch = 1e-3;
  double initial_step = 1.0;
  double step_shrink = 0.5;
  double min_step = 1e-12;
  double armijo = 1e-4;
  double deflation_beta_factor = 1e-3;
  double distinct_rtol = 1e-4;
};

struct SolveResult {
  FieldFunction field;
  EnergyBreakdown energy;
  double residual = 0.0;  // H1 norm of the Riesz gradient at the final field
  int iterations = 0;
  SymmetryClass symmetry = SymmetryClass::G;
  bool sign_change = false;
  std::vector<double> nodal_thetas;
  double h1_norm = 0.0;
  bool converged = false;
  int seed_degree = -1;
  std::string message;
};

struct MountainPassReport {
  int ell = 0;
  int samples = 0;
  double min_tail_energy = 0.0;  // min E over unit-H1 fields, degrees >= ell
  double blowdown_radius = 0.0;  // E <= 0 outside this radius in span < ell
  double zero_energy = 0.0;
};

// (changes sign?, nodal thetas) with the sign threshold 1e-9 * ||v||_inf and
// nodal locations from bracketing plus interpolation of the spectral
// interpolant.
std::pair<bool, std::vector<double>> detect_sign_change(
    const ReducedGrid& grid, const Eigen::VectorXd& v);

// Lifted energy, its H1 Riesz gradient, Nehari projection and critical-point
// searches for one (grid, kernel, params) triple. The H1 Gram factorization
// is cached; everything else is stateless.
class VariationalProblem {
 public:
  VariationalProblem(const ReducedGrid& grid, const NonlocalOperator& op,
                     const ProblemParams& params);

  const ReducedGrid& grid() const { return *grid_; }
  const NonlocalOperator& op() const { return *op_; }
  const ProblemParams& params() const { return params_; }

  EnergyBreakdown energy(const FieldFunction& v) const;

  // Riesz representative g of E'(v): h1_inner(g, phi) = <E'(v), phi> for all
  // nodal phi.
  FieldFunction gradient(const FieldFunction& v) const;
  double residual_norm(const FieldFunction& v) const;

  // <E'(v), phi> for a single test field.
  double derivative_pairing(const FieldFunction& v,
                            const FieldFunction& phi) const;

  // t* with <E'(t* v), t* v> = 0, i.e. t* = (A/B)^{1/(2p-2)} with
  // A = ||v||_H1^2 and B the nonlocal pairing of |v|^p with itself.
  double nehari_scale(const FieldFunction& v) const;

  SolveResult solve_critical_point(
      SymmetryClass cls, const FieldFunction& seed, const SolveOptions& opts,
      const std::vector<FieldFunction>& deflate = {}) const;

  std::vector<SolveResult> solve_sequence(SymmetryClass cls, int count,
                                          const SolveOptions& opts,
                                          std::vector<std::string>* warnings =
                                              nullptr) const;

  MountainPassReport mountain_pass_geometry_check(int ell,
                                                  int samples = 200) const;

  // Distinctness modulo sign and (when representable) the block swap.
  bool distinct(const FieldFunction& a, const FieldFunction& b,
                double rtol) const;

 private:
  Eigen::VectorXd nonlinear_term(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& v) const;
  Eigen::VectorXd strong_residual(const Eigen::VectorXd& v) const;
  Eigen::VectorXd symmetrize(SymmetryClass cls, const Eigen::VectorXd& v) const;
  bool newton_polish(SymmetryClass cls, Eigen::VectorXd& v, int max_iter,
                     double tol, int* used_iters) const;

  const ReducedGrid* grid_;
  const NonlocalOperator* op_;
  ProblemParams params_;
  double p_ = 0.0;  // two_star_mu
  Eigen::LLT<Eigen::MatrixXd> h1_llt_;
  Eigen::MatrixXd gamma_basis_;  // antisymmetric nodal basis when n1 = n2
};

}  // namespace choq
