#include "choq/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "choq/errors.hpp"
#include "choq/quadrature.hpp"

namespace choq {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Pointwise orbit average.
//
// Parameterizing the two block spheres by polar angles (phi, psi), the
// average of |xi - zeta|^{-mu} over the orbit at theta_j seen from the
// representative at theta_i is
//   1/(Z1 Z2) int_0^pi int_0^pi dist2^{-mu/2}
//                               sin^{n1-2}(phi) sin^{n2-2}(psi) dphi dpsi,
// with the squared chordal distance written cancellation-free as
//   dist2 = 4 [ sin^2((ti-tj)/2) + ci cj sin^2(phi/2) + si sj sin^2(psi/2) ].
// The integrand peaks at the (0,0) corner, so the square is cut into shells
// geometrically graded toward that corner.
// ---------------------------------------------------------------------------

struct OrbitIntegrand {
  double d0 = 0.0;  // sin^2((ti - tj)/2)
  double a = 0.0;   // cos(ti) cos(tj)
  double b = 0.0;   // sin(ti) sin(tj)
  double half_mu = 0.0;
  int p1 = 0, p2 = 0;  // n1 - 2, n2 - 2
  double norm = 1.0;   // 1 / (Z1 Z2)

  double operator()(double phi, double psi) const {
    const double sp = std::sin(0.5 * phi);
    const double sq = std::sin(0.5 * psi);
    const double dist2 = 4.0 * (d0 + a * sp * sp + b * sq * sq);
    const double w1 = p1 == 0 ? 1.0 : std::pow(std::sin(phi), p1);
    const double w2 = p2 == 0 ? 1.0 : std::pow(std::sin(psi), p2);
    return norm * w1 * w2 * std::pow(dist2, -half_mu);
  }
};

double tensor_panel(const OrbitIntegrand& f, const QuadratureRule& rule,
                    double x0, double x1, double y0, double y1) {
  const int q = static_cast<int>(rule.nodes.size());
  const double hx = 0.5 * (x1 - x0), cx = 0.5 * (x0 + x1);
  const double hy = 0.5 * (y1 - y0), cy = 0.5 * (y0 + y1);
  double acc = 0.0;
  for (int i = 0; i < q; ++i) {
    const double phi = cx + hx * rule.nodes[i];
    double row = 0.0;
    for (int j = 0; j < q; ++j) {
      row += rule.weights[j] * f(phi, cy + hy * rule.nodes[j]);
    }
    acc += rule.weights[i] * row;
  }
  return acc * hx * hy;
}

double sin_power_mass(int k) {
  // int_0^pi sin^{k-2}: total mass of the projection measure of S^{k-1}.
  return std::sqrt(kPi) * std::tgamma(0.5 * (k - 1)) / std::tgamma(0.5 * k);
}

double entry_at_order(int n1, int n2, double mu, double theta_i,
                      double theta_j, int order, double ratio, int max_depth) {
  OrbitIntegrand f;
  const double half_delta = 0.5 * (theta_i - theta_j);
  f.d0 = std::sin(half_delta) * std::sin(half_delta);
  f.a = std::cos(theta_i) * std::cos(theta_j);
  f.b = std::sin(theta_i) * std::sin(theta_j);
  f.half_mu = 0.5 * mu;
  f.p1 = n1 - 2;
  f.p2 = n2 - 2;
  f.norm = 1.0 / (sin_power_mass(n1) * sin_power_mass(n2));

  const int n = n1 + n2 - 1;
  const double angdist = std::abs(theta_i - theta_j);
  const double floor_scale = 1e-13 * kPi;
  const double stop = std::max(0.5 * angdist, floor_scale);

  const QuadratureRule& rule = gauss_legendre(order);
  double acc = 0.0;
  double outer = kPi;
  int depth = 0;
  while (outer * ratio > stop && depth < max_depth) {
    const double inner = outer * ratio;
    acc += tensor_panel(f, rule, inner, outer, 0.0, inner);
    acc += tensor_panel(f, rule, 0.0, inner, inner, outer);
    acc += tensor_panel(f, rule, inner, outer, inner, outer);
    outer = inner;
    ++depth;
  }
  if (f.d0 > 0.0) {
    acc += tensor_panel(f, rule, 0.0, outer, 0.0, outer);
  } else if (mu >= n - 1) {
    // Coincident orbits: the corner mass scales like outer^{n-1-mu}.
    throw numeric_error(
        "orbit_kernel_entry: the coincident-orbit average diverges for "
        "mu >= n - 1");
  }
  return acc;
}

}  // namespace

double orbit_kernel_entry(int n1, int n2, double mu, double theta_i,
                          double theta_j, const KernelOptions& opts,
                          double* est_rel_error) {
  if (n1 < 2 || n2 < 2) {
    throw validation_error("orbit_kernel_entry: block sizes must be >= 2");
  }
  const int n = n1 + n2 - 1;
  if (!(mu > 0.0 && mu < n)) {
    throw numeric_error(
        "orbit_kernel_entry: kernel diverges unless mu in (0, n)");
  }
  const double val =
      entry_at_order(n1, n2, mu, theta_i, theta_j, opts.entry_order,
                     opts.grading_ratio, opts.max_depth);
  if (est_rel_error != nullptr) {
    const double check =
        entry_at_order(n1, n2, mu, theta_i, theta_j, opts.entry_check_order,
                       opts.grading_ratio, opts.max_depth);
    *est_rel_error = std::abs(val - check) / std::max(std::abs(val), 1e-300);
  }
  return val;
}

// ---------------------------------------------------------------------------
// Funk-Hecke eigenvalues.
// ---------------------------------------------------------------------------

namespace {

// C_l^{lam}(t) / C_l^{lam}(1) by the three-term recurrence run at t and at 1.
double gegenbauer_ratio(int l, double lam, double t) {
  if (l == 0) return 1.0;
  double pm1 = 1.0, p = 2.0 * lam * t;
  double qm1 = 1.0, q = 2.0 * lam;
  for (int k = 2; k <= l; ++k) {
    const double pn =
        (2.0 * (k - 1 + lam) * t * p - (k - 2 + 2.0 * lam) * pm1) / k;
    const double qn =
        (2.0 * (k - 1 + lam) * q - (k - 2 + 2.0 * lam) * qm1) / k;
    pm1 = p;
    p = pn;
    qm1 = q;
    q = qn;
  }
  return p / q;
}

}  // namespace

double FunkHeckeTable::eigenvalue(int degree) const {
  if (degree < 0) {
    throw validation_error("funk_hecke_eigenvalue: degree must be >= 0");
  }
  auto it = cache_.find(degree);
  if (it != cache_.end()) return it->second;

  const int n = params_.n;
  const double mu = params_.mu_d();
  const double lam = 0.5 * (n - 1);
  const double alpha = 0.5 * (n - 2 - mu);
  const double beta = 0.5 * (n - 2);
  // (2 - 2t)^{-mu/2} (1 - t^2)^{(n-2)/2} = 2^{-mu/2} (1-t)^alpha (1+t)^beta;
  // against the (alpha, beta) Gauss-Jacobi rule the remaining integrand is
  // the normalized Gegenbauer polynomial, so low orders are already exact.
  // The order is doubled anyway until the value settles.
  double value = 0.0, prev = 0.0;
  int order = degree / 2 + 4;
  for (int round = 0; round < 8; ++round) {
    QuadratureRule rule = gauss_jacobi(order, alpha, beta);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      acc += rule.weights[q] * gegenbauer_ratio(degree, lam, rule.nodes[q]);
    }
    value = sphere_surface(n) * std::pow(2.0, -0.5 * mu) * acc;
    if (round > 0 && std::abs(value - prev) <= 1e-12 * std::abs(value)) break;
    prev = value;
    order *= 2;
  }
  cache_[degree] = value;
  return value;
}

double funk_hecke_eigenvalue(const ProblemParams& params, int degree) {
  return FunkHeckeTable(params).eigenvalue(degree);
}

// ---------------------------------------------------------------------------
// Assembly.
//
// Pointwise near-diagonal values of the orbit average are not usable in a
// plain Nystrom product (they blow up on the diagonal once mu >= n - 1 and a
// smooth quadrature across the weak singularity would stall near 1e-3
// accuracy), so the discrete operator is built in weak form instead: the
// moments (J_mu phi_l)(theta_i) are computed by product integration graded
// into theta_i, the Galerkin matrix T_kl = <phi_k, J_mu phi_l> follows by the
// grid rule (exact here, since J_mu maps a polynomial of degree l in cos
// 2theta to another one), and the nodal matrix is the bilinear expansion
// phi T phi^T. Symmetry is exact by construction and the Funk-Hecke route
// stays fully independent of this assembly.
// ---------------------------------------------------------------------------

namespace {

struct Panel {
  double a = 0.0, b = 0.0;
  int singular_end = 0;  // 0 none, -1 singular at a, +1 singular at b
};

std::vector<Panel> profile_panels(double theta_i, double width, double ratio,
                                  bool weighted_end, double floor_scale) {
  std::vector<Panel> panels;
  const double lo = std::max(0.0, theta_i - width);
  const double hi = std::min(0.5 * kPi, theta_i + width);
  auto add_uniform = [&](double a, double b) {
    if (b - a <= 1e-15) return;
    const int count = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
    for (int k = 0; k < count; ++k) {
      panels.push_back(
          {a + (b - a) * k / count, a + (b - a) * (k + 1) / count, 0});
    }
  };
  add_uniform(0.0, lo);
  double d = theta_i - lo;
  while (d > floor_scale) {
    const double next = d * ratio;
    if (weighted_end && next <= std::max(floor_scale, (theta_i - lo) * 1e-5)) {
      panels.push_back({theta_i - d, theta_i, +1});
      break;
    }
    panels.push_back({theta_i - d, theta_i - next, 0});
    if (next <= floor_scale) break;
    d = next;
  }
  d = hi - theta_i;
  while (d > floor_scale) {
    const double next = d * ratio;
    if (weighted_end && next <= std::max(floor_scale, (hi - theta_i) * 1e-5)) {
      panels.push_back({theta_i, theta_i + d, -1});
      break;
    }
    panels.push_back({theta_i + next, theta_i + d, 0});
    if (next <= floor_scale) break;
    d = next;
  }
  add_uniform(hi, 0.5 * kPi);
  return panels;
}

}  // namespace

NonlocalOperator::NonlocalOperator(Eigen::MatrixXd matrix, Metadata meta)
    : k_(std::move(matrix)), meta_(std::move(meta)) {}

Eigen::VectorXd NonlocalOperator::apply(const ReducedGrid& grid,
                                        const Eigen::VectorXd& f) const {
  if (grid.size() != meta_.grid_size || grid.n1() != meta_.n1 ||
      grid.n2() != meta_.n2 || f.size() != k_.rows()) {
    throw validation_error("NonlocalOperator::apply: grid/kernel mismatch");
  }
  return k_ * grid.weights().cwiseProduct(f);
}

FieldFunction NonlocalOperator::apply(const ReducedGrid& grid,
                                      const FieldFunction& f) const {
  return FieldFunction{apply(grid, f.values), f.tag};
}

Eigen::VectorXd NonlocalOperator::row_sums(const ReducedGrid& grid) const {
  return apply(grid, Eigen::VectorXd::Ones(k_.rows()));
}

double NonlocalOperator::pairing(const ReducedGrid& grid,
                                 const Eigen::VectorXd& f,
                                 const Eigen::VectorXd& g) const {
  return grid.weights().cwiseProduct(f).dot(apply(grid, g));
}

double NonlocalOperator::nl_norm(const ReducedGrid& grid,
                                 const ProblemParams& params,
                                 const FieldFunction& v) const {
  const double p = params.two_star_mu_d();
  const Eigen::VectorXd f = v.values.array().abs().pow(p);
  const double quad = pairing(grid, f, f);
  return std::pow(std::max(quad, 0.0), 1.0 / (2.0 * p));
}

std::string kernel_cache_dir(const KernelOptions& opts) {
  if (!opts.cache_dir.empty()) return opts.cache_dir;
  if (const char* env = std::getenv("CHOQ_CACHE_DIR")) {
    if (env[0] != '\0') return env;
  }
  return ".choq-cache";
}

std::uint64_t fnv1a64(const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string hash_hex(std::uint64_t h) {
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

std::string cache_stem(const ReducedGrid& grid, const ProblemParams& params,
                       const KernelOptions& opts, int base_panels) {
  std::string mu = to_string(params.mu);
  for (char& c : mu) {
    if (c == '/') c = 'd';
    if (c == '-') c = 'm';
  }
  return "kernel_n" + std::to_string(params.n) + "_p" +
         std::to_string(grid.n1()) + "x" + std::to_string(grid.n2()) + "_mu" +
         mu + "_N" + std::to_string(grid.size()) + "_e" +
         std::to_string(opts.entry_order) + "_q" +
         std::to_string(opts.profile_order) + "_b" +
         std::to_string(base_panels);
}

bool try_load_cache(const std::filesystem::path& bin,
                    const std::filesystem::path& sidecar, int size,
                    Eigen::MatrixXd& k, NonlocalOperator::Metadata& meta) {
  std::error_code ec;
  if (!std::filesystem::exists(bin, ec) ||
      !std::filesystem::exists(sidecar, ec)) {
    return false;
  }
  nlohmann::json j;
  {
    std::ifstream in(sidecar);
    if (!in) return false;
    try {
      in >> j;
    } catch (...) {
      return false;
    }
  }
  if (!j.contains("grid_size") || j["grid_size"] != size) return false;
  if (!j.contains("hash") || !j["hash"].is_string()) return false;
  std::ifstream in(bin, std::ios::binary);
  if (!in) return false;
  std::vector<double> buf(static_cast<std::size_t>(size) * size);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!in || in.gcount() !=
                 static_cast<std::streamsize>(buf.size() * sizeof(double))) {
    return false;
  }
  char probe;
  if (in.read(&probe, 1)) return false;  // trailing bytes: corrupted
  const std::uint64_t h = fnv1a64(buf.data(), buf.size() * sizeof(double));
  if (j["hash"] != hash_hex(h)) return false;
  k.resize(size, size);
  for (int i = 0; i < size; ++i) {
    for (int jj = 0; jj < size; ++jj) {
      k(i, jj) = buf[static_cast<std::size_t>(i) * size + jj];
    }
  }
  meta.est_error = j.value("est_error", 0.0);
  meta.hash = h;
  meta.from_cache = true;
  return true;
}

}  // namespace

NonlocalOperator assemble_kernel(const ReducedGrid& grid,
                                 const ProblemParams& params,
                                 const KernelOptions& opts) {
  const int n = params.n;
  const double mu = params.mu_d();
  if (grid.params().n != n) {
    throw validation_error("assemble_kernel: grid built for a different n");
  }
  if (!(mu > 0.0 && mu < n)) {
    throw numeric_error("assemble_kernel: kernel diverges unless mu in (0, n)");
  }
  const int size = grid.size();
  const int base_panels =
      opts.base_panels > 0 ? opts.base_panels : std::max(8, size / 4);

  NonlocalOperator::Metadata meta;
  meta.n = n;
  meta.n1 = grid.n1();
  meta.n2 = grid.n2();
  meta.grid_size = size;
  meta.mu = to_string(params.mu);
  meta.entry_order = opts.entry_order;
  meta.profile_order = opts.profile_order;
  meta.base_panels = base_panels;
  meta.max_depth = opts.max_depth;
  meta.grading_ratio = opts.grading_ratio;

  const std::filesystem::path dir = kernel_cache_dir(opts);
  const std::string stem = cache_stem(grid, params, opts, base_panels);
  const std::filesystem::path bin = dir / (stem + ".bin");
  const std::filesystem::path sidecar = dir / (stem + ".json");

  if (opts.use_cache) {
    Eigen::MatrixXd k;
    if (try_load_cache(bin, sidecar, size, k, meta)) {
      return NonlocalOperator(std::move(k), std::move(meta));
    }
  }

  const double width = 0.5 * kPi / base_panels;
  const double gamma = std::max(0.0, mu - (n - 1));
  const bool weighted_end = gamma > 0.02;
  const double floor_scale = 1e-13;
  const QuadratureRule& plain = gauss_legendre(opts.profile_order);
  // The end-weighted rule absorbs the |theta' - theta_i|^{-gamma} blowup of
  // the kernel slice when mu > n - 1.
  QuadratureRule weighted;
  if (weighted_end) weighted = gauss_jacobi(opts.profile_order, -gamma, 0.0);

  const double rho_const = sphere_surface(grid.n1()) * sphere_surface(grid.n2());
  auto rho = [&](double t) {
    return rho_const * std::pow(std::cos(t), grid.n1() - 1) *
           std::pow(std::sin(t), grid.n2() - 1);
  };

  Eigen::MatrixXd phi_rows(size, size);  // (i, l) = (J_mu phi_l)(theta_i)
  for (int i = 0; i < size; ++i) {
    const double ti = grid.theta()[i];
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(size);
    for (const Panel& panel : profile_panels(ti, width, opts.grading_ratio,
                                             weighted_end, floor_scale)) {
      const double h = 0.5 * (panel.b - panel.a);
      const double c = 0.5 * (panel.a + panel.b);
      if (panel.singular_end == 0) {
        for (std::size_t q = 0; q < plain.nodes.size(); ++q) {
          const double t = c + h * plain.nodes[q];
          const double kv =
              orbit_kernel_entry(grid.n1(), grid.n2(), mu, ti, t, opts);
          acc += (plain.weights[q] * h * kv * rho(t)) *
                 grid.basis_at(std::cos(2.0 * t));
        }
      } else {
        // int_a^b F dt = h^{1-gamma} sum_q w_q [F(t_q) |t_q - ti|^{gamma}]
        // with w_q from the (1 -+ x)^{-gamma} Gauss-Jacobi rule.
        for (std::size_t q = 0; q < weighted.nodes.size(); ++q) {
          const double x = panel.singular_end > 0 ? weighted.nodes[q]
                                                  : -weighted.nodes[q];
          const double t = c + h * x;
          const double kv =
              orbit_kernel_entry(grid.n1(), grid.n2(), mu, ti, t, opts);
          const double g = kv * std::pow(std::abs(t - ti), gamma) * rho(t);
          acc += (std::pow(h, 1.0 - gamma) * weighted.weights[q] * g) *
                 grid.basis_at(std::cos(2.0 * t));
        }
      }
    }
    phi_rows.row(i) = acc.transpose();
  }

  Eigen::MatrixXd t_mat =
      grid.basis().transpose() * grid.weights().asDiagonal() * phi_rows;
  const double scale = t_mat.cwiseAbs().maxCoeff();
  const double asym = (t_mat - t_mat.transpose()).cwiseAbs().maxCoeff() / scale;
  t_mat = 0.5 * (t_mat + t_mat.transpose()).eval();

  Eigen::MatrixXd k = grid.basis() * t_mat * grid.basis().transpose();
  k = 0.5 * (k + k.transpose()).eval();
  if (grid.reflection_symmetric()) {
    // The reflection theta -> pi/2 - theta is an exact symmetry of the
    // continuum operator when n1 = n2; imposing it keeps the Gamma subspace
    // exactly invariant under the discrete operator.
    k = 0.5 * (k + Eigen::MatrixXd(k.reverse())).eval();
  }

  std::vector<double> buf(static_cast<std::size_t>(size) * size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      buf[static_cast<std::size_t>(i) * size + j] = k(i, j);
    }
  }
  meta.est_error = asym;
  meta.hash = fnv1a64(buf.data(), buf.size() * sizeof(double));
  meta.from_cache = false;

  if (opts.use_cache) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(bin, std::ios::binary | std::ios::trunc);
    if (out) {
      out.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(double)));
      out.close();
      nlohmann::json j;
      j["schema_version"] = 1;
      j["n"] = n;
      j["n1"] = grid.n1();
      j["n2"] = grid.n2();
      j["mu"] = to_string(params.mu);
      j["grid_size"] = size;
      j["entry_order"] = opts.entry_order;
      j["profile_order"] = opts.profile_order;
      j["base_panels"] = base_panels;
      j["max_depth"] = opts.max_depth;
      j["grading_ratio"] = opts.grading_ratio;
      j["est_error"] = meta.est_error;
      j["hash"] = hash_hex(meta.hash);
      std::ofstream js(sidecar, std::ios::trunc);
      js << j.dump(2) << "\n";
    }
  }
  return NonlocalOperator(std::move(k), std::move(meta));
}

}  // namespace choq
