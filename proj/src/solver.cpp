#include "choq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "choq/errors.hpp"

namespace choq {

namespace {

double sign_pow(double v, double expo) {
  // sign(v) |v|^expo, continuous at 0 for expo > 0.
  if (v == 0.0) return 0.0;
  return v > 0 ? std::pow(v, expo) : -std::pow(-v, expo);
}

}  // namespace

std::pair<bool, std::vector<double>> detect_sign_change(
    const ReducedGrid& grid, const Eigen::VectorXd& v) {
  const double vmax = v.cwiseAbs().maxCoeff();
  const double tau = 1e-9 * vmax;
  const bool change = v.minCoeff() < -tau && v.maxCoeff() > tau;
  std::vector<double> nodes;
  if (vmax == 0.0) return {false, nodes};
  for (int i = 0; i + 1 < grid.size(); ++i) {
    const double a = v[i], b = v[i + 1];
    if ((a > tau && b < -tau) || (a < -tau && b > tau)) {
      double lo = grid.theta()[i], hi = grid.theta()[i + 1];
      double flo = a;
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = grid.interpolate(v, mid);
        if ((flo > 0) == (fm > 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      nodes.push_back(0.5 * (lo + hi));
    } else if (std::abs(a) <= tau && vmax > 0) {
      nodes.push_back(grid.theta()[i]);
    }
  }
  return {change, nodes};
}

VariationalProblem::VariationalProblem(const ReducedGrid& grid,
                                       const NonlocalOperator& op,
                                       const ProblemParams& params)
    : grid_(&grid), op_(&op), params_(params) {
  if (op.metadata().grid_size != grid.size() ||
      op.metadata().n1 != grid.n1() || op.metadata().n2 != grid.n2()) {
    throw validation_error("VariationalProblem: kernel does not match grid");
  }
  p_ = params_.two_star_mu_d();
  h1_llt_.compute(grid.h1_gram());
  if (h1_llt_.info() != Eigen::Success) {
    throw numeric_error(
        "VariationalProblem: H1 Gram factorization failed; the grid operators "
        "are ill-conditioned");
  }
  if (grid.reflection_symmetric()) {
    const int n = grid.size();
    const int m = n / 2;
    gamma_basis_ = Eigen::MatrixXd::Zero(n, m);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (int i = 0; i < m; ++i) {
      gamma_basis_(i, i) = inv_sqrt2;
      gamma_basis_(n - 1 - i, i) = -inv_sqrt2;
    }
  }
}

Eigen::VectorXd VariationalProblem::nonlinear_term(
    const Eigen::VectorXd& v) const {
  const Eigen::VectorXd f = v.array().abs().pow(p_);
  const Eigen::VectorXd jf = op_->apply(*grid_, f);
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < v.size(); ++i) {
    out[i] = jf[i] * sign_pow(v[i], p_ - 1.0);
  }
  return out;
}

Eigen::VectorXd VariationalProblem::strong_residual(
    const Eigen::VectorXd& v) const {
  return grid_->h1_gram() * v -
         grid_->weights().cwiseProduct(nonlinear_term(v));
}

EnergyBreakdown VariationalProblem::energy(const FieldFunction& v) const {
  EnergyBreakdown e;
  e.quadratic = 0.5 * v.values.dot(grid_->h1_gram() * v.values);
  const Eigen::VectorXd f = v.values.array().abs().pow(p_);
  e.nonlocal = op_->pairing(*grid_, f, f) / (2.0 * p_);
  e.total = e.quadratic - e.nonlocal;
  return e;
}

FieldFunction VariationalProblem::gradient(const FieldFunction& v) const {
  const Eigen::VectorXd rhs = strong_residual(v.values);
  return FieldFunction{h1_llt_.solve(rhs), v.tag};
}

double VariationalProblem::residual_norm(const FieldFunction& v) const {
  const Eigen::VectorXd r = strong_residual(v.values);
  const Eigen::VectorXd g = h1_llt_.solve(r);
  return std::sqrt(std::max(0.0, g.dot(r)));
}

double VariationalProblem::derivative_pairing(const FieldFunction& v,
                                              const FieldFunction& phi) const {
  return phi.values.dot(strong_residual(v.values));
}

double VariationalProblem::nehari_scale(const FieldFunction& v) const {
  const double a = v.values.dot(grid_->h1_gram() * v.values);
  if (!(a > 0)) {
    throw numeric_error("nehari_scale: zero field has no Nehari projection");
  }
  const Eigen::VectorXd f = v.values.array().abs().pow(p_);
  const double b = op_->pairing(*grid_, f, f);
  if (!(b > 0)) {
    throw numeric_error("nehari_scale: nonlocal pairing vanished");
  }
  return std::pow(a / b, 1.0 / (2.0 * p_ - 2.0));
}

Eigen::MatrixXd VariationalProblem::jacobian(const Eigen::VectorXd& v) const {
  const int n = static_cast<int>(v.size());
  const Eigen::VectorXd f = v.array().abs().pow(p_);
  const Eigen::VectorXd jf = op_->apply(*grid_, f);
  Eigen::VectorXd g(n), df(n), dg(n);
  const double floor = 1e-14 * std::max(1.0, v.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    g[i] = sign_pow(v[i], p_ - 1.0);
    df[i] = p_ * sign_pow(v[i], p_ - 1.0);
    // |v|^{p-2} needs a floor when p < 2.
    const double av = std::max(std::abs(v[i]), p_ < 2.0 ? floor : 0.0);
    dg[i] = av == 0.0 ? 0.0 : (p_ - 1.0) * std::pow(av, p_ - 2.0);
  }
  Eigen::MatrixXd jac =
      grid_->h1_gram() -
      Eigen::MatrixXd(grid_->weights().asDiagonal()) *
          (g.asDiagonal() * op_->matrix() *
               Eigen::MatrixXd(grid_->weights().asDiagonal()) *
               Eigen::MatrixXd(df.asDiagonal()) +
           Eigen::MatrixXd((jf.cwiseProduct(dg)).asDiagonal()));
  return jac;
}

Eigen::VectorXd VariationalProblem::symmetrize(SymmetryClass cls,
                                               const Eigen::VectorXd& v) const {
  if (cls == SymmetryClass::Gamma) return grid_->project_gamma(v);
  return v;
}

bool VariationalProblem::newton_polish(SymmetryClass cls, Eigen::VectorXd& v,
                                       int max_iter, double tol,
                                       int* used_iters) const {
  const int n = static_cast<int>(v.size());
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd r = strong_residual(v);
    const Eigen::VectorXd g = h1_llt_.solve(r);
    const double res = std::sqrt(std::max(0.0, g.dot(r)));
    if (used_iters) ++(*used_iters);
    if (res < tol) return true;
    const Eigen::MatrixXd jac = jacobian(v);
    Eigen::VectorXd step;
    if (cls == SymmetryClass::Gamma) {
      const Eigen::MatrixXd jr =
          gamma_basis_.transpose() * jac * gamma_basis_;
      const Eigen::VectorXd rr = gamma_basis_.transpose() * r;
      step = gamma_basis_ * jr.partialPivLu().solve(rr);
    } else {
      step = jac.partialPivLu().solve(r);
    }
    if (!step.allFinite()) return false;
    // Damped update on the preconditioned residual.
    double s = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::VectorXd cand = symmetrize(cls, v - s * step);
      const Eigen::VectorXd rc = strong_residual(cand);
      const Eigen::VectorXd gc = h1_llt_.solve(rc);
      const double res_c = std::sqrt(std::max(0.0, gc.dot(rc)));
      if (res_c < res || (s == 1.0 && res_c < tol)) {
        v = cand;
        moved = true;
        break;
      }
      s *= 0.5;
    }
    if (!moved) return false;
  }
  const Eigen::VectorXd r = strong_residual(v);
  const Eigen::VectorXd g = h1_llt_.solve(r);
  return std::sqrt(std::max(0.0, g.dot(r))) < tol;
}

bool VariationalProblem::distinct(const FieldFunction& a,
                                  const FieldFunction& b, double rtol) const {
  const double scale =
      std::max(grid_->h1_norm(a), grid_->h1_norm(b));
  if (scale == 0.0) return false;
  std::vector<Eigen::VectorXd> images = {b.values, -b.values};
  if (grid_->reflection_symmetric()) {
    images.push_back(grid_->reflect(b.values));
    images.push_back(-grid_->reflect(b.values));
  }
  for (const auto& img : images) {
    FieldFunction diff{a.values - img, a.tag};
    if (grid_->h1_norm(diff) <= rtol * scale) return false;
  }
  return true;
}

SolveResult VariationalProblem::solve_critical_point(
    SymmetryClass cls, const FieldFunction& seed, const SolveOptions& opts,
    const std::vector<FieldFunction>& deflate) const {
  if (cls == SymmetryClass::Gamma && !grid_->reflection_symmetric()) {
    throw validation_error(
        "solve_critical_point: the Gamma class needs n1 = n2");
  }
  SolveResult out;
  out.symmetry = cls;

  const Eigen::MatrixXd& h1 = grid_->h1_gram();
  auto h1_norm_of = [&](const Eigen::VectorXd& x) {
    return std::sqrt(std::max(0.0, x.dot(h1 * x)));
  };

  std::vector<double> betas;
  for (const auto& vk : deflate) {
    betas.push_back(opts.deflation_beta_factor *
                    std::abs(energy(vk).total));
  }

  Eigen::VectorXd v = symmetrize(cls, seed.values);
  const double seed_norm = h1_norm_of(v);
  if (!(seed_norm > 0)) {
    throw validation_error(
        "solve_critical_point: seed vanishes in the requested symmetry class");
  }
  v = nehari_scale(FieldFunction{v, cls}) * v;

  int iterations = 0;
  int restarts = 0;
  bool reached_switch = false;
  double eta = opts.initial_step;

  auto deflated_energy = [&](const Eigen::VectorXd& x) {
    double e = energy(FieldFunction{x, cls}).total;
    for (std::size_t k = 0; k < deflate.size(); ++k) {
      const Eigen::VectorXd dminus = x - deflate[k].values;
      const Eigen::VectorXd dplus = x + deflate[k].values;
      const double dm = std::max(dminus.dot(h1 * dminus), 1e-300);
      const double dp = std::max(dplus.dot(h1 * dplus), 1e-300);
      e += betas[k] / (dm * dp);
    }
    return e;
  };

  for (; iterations < opts.max_iter; ++iterations) {
    const Eigen::VectorXd r = strong_residual(v);
    Eigen::VectorXd g = h1_llt_.solve(r);
    const double res = std::sqrt(std::max(0.0, g.dot(r)));
    if (res < opts.descent_switch) {
      reached_switch = true;
      break;
    }
    // Deflation pushes the flow away from already-found solutions (and their
    // negatives); it is dropped for the final polish.
    for (std::size_t k = 0; k < deflate.size(); ++k) {
      const Eigen::VectorXd dminus = v - deflate[k].values;
      const Eigen::VectorXd dplus = v + deflate[k].values;
      const double dm = std::max(dminus.dot(h1 * dminus), 1e-300);
      const double dp = std::max(dplus.dot(h1 * dplus), 1e-300);
      g += -betas[k] / (dm * dp) * 2.0 *
           ((dminus / dm + dplus / dp));
    }
    g = symmetrize(cls, g);
    const double gnorm2 = g.dot(h1 * g);
    const double e0 = deflated_energy(v);
    double step = eta;
    bool accepted = false;
    while (step >= opts.min_step) {
      Eigen::VectorXd cand = symmetrize(cls, v - step * g);
      const double cn = h1_norm_of(cand);
      if (cn < 1e-8) break;  // zero collapse; handled below
      cand = nehari_scale(FieldFunction{cand, cls}) * cand;
      if (deflated_energy(cand) <= e0 - opts.armijo * step * gnorm2) {
        v = cand;
        accepted = true;
        eta = std::min(1.0, step * 2.0);
        break;
      }
      step *= opts.step_shrink;
    }
    if (!accepted) {
      const double vn = h1_norm_of(v);
      if (vn < 1e-8 && restarts < 2) {
        // Zero-collapse guard.
        v = symmetrize(cls, seed.values) * (2.0 * (restarts + 1));
        v = nehari_scale(FieldFunction{v, cls}) * v;
        ++restarts;
        continue;
      }
      // Stuck descent: hand over to Newton anyway.
      reached_switch = true;
      break;
    }
  }

  if (!reached_switch && iterations >= opts.max_iter) {
    out.iterations = iterations;
    out.converged = false;
    out.message = "descent did not reach the Newton switch";
    out.field = FieldFunction{v, cls};
    out.residual = residual_norm(out.field);
    out.h1_norm = h1_norm_of(v);
    out.energy = energy(out.field);
    return out;
  }

  int newton_iters = 0;
  const bool ok =
      newton_polish(cls, v, opts.newton_max_iter, opts.tol, &newton_iters);
  out.iterations = iterations + newton_iters;

  const double vn = h1_norm_of(v);
  if (!ok || vn < 1e-8) {
    out.converged = false;
    out.message = vn < 1e-8 ? "collapsed to the zero field"
                            : "Newton polish did not converge";
    out.field = FieldFunction{v, cls};
    out.residual = residual_norm(out.field);
    out.h1_norm = vn;
    out.energy = energy(out.field);
    return out;
  }

  // Sign convention: the value at the smallest theta node is >= 0.
  if (v[0] < 0) v = -v;
  out.field = FieldFunction{v, cls};
  out.converged = true;
  out.residual = residual_norm(out.field);
  out.h1_norm = vn;
  out.energy = energy(out.field);
  auto [change, nodal] = detect_sign_change(*grid_, v);
  out.sign_change = change;
  out.nodal_thetas = std::move(nodal);
  return out;
}

std::vector<SolveResult> VariationalProblem::solve_sequence(
    SymmetryClass cls, int count, const SolveOptions& opts,
    std::vector<std::string>* warnings) const {
  if (count < 1) {
    throw validation_error("solve_sequence: count must be >= 1");
  }
  std::vector<SolveResult> found;
  std::vector<FieldFunction> deflate;

  const int max_degree = std::min(grid_->design_degree(), 2 * count + 16);
  for (int degree = 0; degree <= max_degree &&
                       static_cast<int>(found.size()) < count;
       degree += 2) {
    auto harmonic = grid_->invariant_harmonic(degree);
    if (!harmonic) continue;
    Eigen::VectorXd seed = harmonic->field.values;
    if (cls == SymmetryClass::Gamma) {
      seed = grid_->project_gamma(seed);
      if (std::sqrt(grid_->l2_inner(seed, seed)) < 1e-8) continue;
    }
    SolveResult res = solve_critical_point(
        cls, FieldFunction{seed, cls}, opts, deflate);
    res.seed_degree = degree;
    if (!res.converged) {
      if (warnings) {
        warnings->push_back("seed degree " + std::to_string(degree) + ": " +
                            res.message);
      }
      continue;
    }
    bool is_new = true;
    for (const auto& prev : found) {
      if (!distinct(res.field, prev.field, opts.distinct_rtol)) {
        is_new = false;
        break;
      }
    }
    if (!is_new) continue;
    deflate.push_back(res.field);
    found.push_back(std::move(res));
  }
  if (static_cast<int>(found.size()) < count && warnings) {
    warnings->push_back("found " + std::to_string(found.size()) + " of " +
                        std::to_string(count) + " requested critical points");
  }
  std::sort(found.begin(), found.end(),
            [](const SolveResult& a, const SolveResult& b) {
              return a.energy.total < b.energy.total;
            });
  return found;
}

MountainPassReport VariationalProblem::mountain_pass_geometry_check(
    int ell, int samples) const {
  if (ell % 2 != 0 || ell < 2 || ell > grid_->design_degree()) {
    throw validation_error(
        "mountain_pass_geometry_check: ell must be even and within the grid "
        "design degree");
  }
  MountainPassReport report;
  report.ell = ell;
  report.samples = samples;
  report.zero_energy =
      energy(FieldFunction{Eigen::VectorXd::Zero(grid_->size()),
                           SymmetryClass::G})
          .total;

  std::vector<Eigen::VectorXd> tail;
  for (int d = ell; d <= std::min(grid_->design_degree(), ell + 12); d += 2) {
    if (auto h = grid_->invariant_harmonic(d)) tail.push_back(h->field.values);
  }
  std::vector<Eigen::VectorXd> head;
  for (int d = 0; d < ell; d += 2) {
    if (auto h = grid_->invariant_harmonic(d)) head.push_back(h->field.values);
  }

  std::mt19937_64 rng(0x5eedULL + ell);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_combo = [&](const std::vector<Eigen::VectorXd>& basis) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid_->size());
    for (const auto& b : basis) v += gauss(rng) * b;
    return v;
  };

  double min_tail = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd v = random_combo(tail);
    const double nrm = std::sqrt(v.dot(grid_->h1_gram() * v));
    if (!(nrm > 0)) continue;
    v /= nrm;
    min_tail = std::min(min_tail,
                        energy(FieldFunction{v, SymmetryClass::G}).total);
  }
  report.min_tail_energy = min_tail;

  // In a finite span the energy goes to -infinity along every ray; the
  // blow-down radius is the largest scale at which a sampled ray crosses 0:
  // E(t v) = t^2/2 A - t^{2p}/(2p) B <= 0 once t >= (p A / B)^{1/(2p-2)}.
  double radius = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd v = random_combo(head);
    const double nrm = std::sqrt(v.dot(grid_->h1_gram() * v));
    if (!(nrm > 0)) continue;
    v /= nrm;
    const Eigen::VectorXd f = v.array().abs().pow(p_);
    const double b = op_->pairing(*grid_, f, f);
    if (!(b > 0)) continue;
    radius = std::max(radius, std::pow(p_ / b, 1.0 / (2.0 * p_ - 2.0)));
  }
  report.blowdown_radius = radius;
  return report;
}

}  // namespace choq
