#include "choq/ledger.hpp"

#include "choq/errors.hpp"

namespace choq {

namespace {

Rational inv_pow(const Rational& t, int k) {
  // t^{-k} for k >= 1
  Rational acc = 1;
  for (int i = 0; i < k; ++i) acc /= t;
  return acc;
}

}  // namespace

std::string case_name(RegularityCase tag) {
  switch (tag) {
    case RegularityCase::mu_lt_n_minus_2:
      return "mu_lt_n_minus_2";
    case RegularityCase::mu_eq_n_minus_2:
      return "mu_eq_n_minus_2";
    case RegularityCase::mu_gt_n_minus_2:
      return "mu_gt_n_minus_2";
  }
  return "unknown";
}

CaseInfo classify_case(const ProblemParams& params) {
  CaseInfo info;
  const Rational gap = params.mu - Rational(params.n - 2);
  if (gap < 0) {
    info.tag = RegularityCase::mu_lt_n_minus_2;
    info.target_exponent = Rational(2 * params.n) / (Rational(params.n - 2) - params.mu);
    info.target_space = "L^" + to_string(*info.target_exponent);
  } else if (gap == 0) {
    info.tag = RegularityCase::mu_eq_n_minus_2;
    info.target_space = "L^q for any q in (two_star, inf)";
  } else {
    info.tag = RegularityCase::mu_gt_n_minus_2;
    info.target_space = "L^inf";
  }
  return info;
}

std::optional<int> compute_N(const ProblemParams& params) {
  if (!(params.mu > 0 && params.mu < params.n - 2)) return std::nullopt;
  const Rational t = params.two_star_mu - 1;
  const Rational target = Rational(1) / params.two_star -
                          params.mu / Rational(2 * params.n);
  const Rational two_over_n = Rational(2, params.n);
  Rational partial = 0;
  Rational term = 1;
  for (int m = 1; m <= 100000; ++m) {
    term /= t;
    partial += term;
    if (two_over_n * partial > target) return m;
  }
  throw numeric_error("compute_N: iteration cap hit; this should be unreachable");
}

Rational H_ell(const ProblemParams& params, int ell) {
  if (ell < 1) throw validation_error("H_ell: ell must be >= 1");
  if (!(params.mu > 0 && params.mu < params.n - 2)) {
    throw validation_error("H_ell: defined for mu in (0, n-2)");
  }
  const Rational t = params.two_star_mu - 1;
  if (ell == 1) return inv_pow(t, 1);
  Rational tail = 0;
  for (int k = 1; k <= ell - 1; ++k) tail += inv_pow(t, k);
  return inv_pow(t, ell) + Rational(2, params.n) * tail;
}

LedgerReport build_q_sequence(const ProblemParams& params) {
  if (!(params.mu > 0 && params.mu < params.n - 2)) {
    throw validation_error("build_q_sequence: requires mu in (0, n-2)");
  }
  LedgerReport report;
  report.n = params.n;
  report.mu = params.mu;
  report.case_tag = classify_case(params).tag;

  const Rational t = params.two_star_mu - 1;
  const Rational two_over_n = Rational(2, params.n);
  const Rational lower =
      Rational(1) / params.two_star - params.mu / Rational(2 * params.n);

  const auto n_opt = compute_N(params);
  report.N = *n_opt;
  const int N = report.N;

  Rational partial = 0;
  for (int k = 1; k <= N; ++k) partial += inv_pow(t, k);
  Rational upper = two_over_n * partial;
  Rational min_h;
  bool has_h = false;
  for (int ell = 1; ell <= N - 1; ++ell) {
    const Rational h = H_ell(params, ell);
    report.h_values.push_back(h);
    if (!has_h || h < min_h) {
      min_h = h;
      has_h = true;
    }
  }
  if (has_h && min_h < upper) upper = min_h;
  const Rational case1 =
      (Rational(params.n) - params.mu) / Rational(params.n) /
      params.two_star_mu;
  if (case1 < upper) upper = case1;

  report.checks["interval_nonempty"] = lower < upper;
  if (!(lower < upper)) {
    throw numeric_error(
        "build_q_sequence: empty admissible window for q_1; this contradicts "
        "the established gate inequalities");
  }

  // Midpoint of the admissible window for 1/q_1, then the recursion.
  Rational inv_q = (lower + upper) / 2;
  report.q_sequence.push_back(Rational(1) / inv_q);
  for (int k = 1; k <= N - 1; ++k) {
    inv_q = t * inv_q - two_over_n;
    report.q_sequence.push_back(Rational(1) / inv_q);
  }

  const Rational gate = two_over_n / t;
  bool qn_large = true, qk_small = true, window = true, q_positive = true;
  for (int k = 0; k < N; ++k) {
    const Rational inv_qk = Rational(1) / report.q_sequence[k];
    if (!(inv_qk > 0)) q_positive = false;
    if (k == N - 1) {
      qn_large = qn_large && (inv_qk < gate);
    } else {
      qk_small = qk_small && (inv_qk > gate);
      const Rational ratio = t * inv_qk;
      window = window && (ratio > two_over_n) && (ratio < 1);
    }
  }
  report.checks["qN_large"] = qn_large;
  report.checks["qk_small"] = qk_small;
  report.checks["qk_window"] = window;
  report.checks["q_positive"] = q_positive;
  report.checks["necessary_Hl"] = !has_h || (min_h > lower);
  report.checks["case1_pair"] =
      (lower < case1) && (case1 < Rational(1) / params.two_star);

  report.valid = true;
  for (const auto& [name, ok] : report.checks) {
    report.valid = report.valid && ok;
  }
  return report;
}

bool boost_constraint_check(const ProblemParams& params, const Rational& q) {
  if (!(q > 0)) throw validation_error("boost_constraint_check: q must be > 0");
  const Rational inv_q = Rational(1) / q;
  const Rational lower =
      Rational(1) / params.two_star - params.mu / Rational(2 * params.n);
  const Rational upper = Rational(1) / params.two_star;
  return lower < inv_q && inv_q < upper;
}

}  // namespace choq
