#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "choq/params.hpp"

namespace choq {

// Exponent bookkeeping behind the regularity bootstrap: case split on
// mu vs n-2, the iteration counter N, the H_ell gate quantities and the
// q_k recursion, all in exact rational arithmetic so that every strict
// inequality is decided without rounding.

enum class RegularityCase {
  mu_lt_n_minus_2,
  mu_eq_n_minus_2,
  mu_gt_n_minus_2,
};

struct CaseInfo {
  RegularityCase tag = RegularityCase::mu_lt_n_minus_2;
  // Lebesgue space the localized tail lands in: an explicit exponent
  // 2n/(n-2-mu) below n-2, any q in (two_star, inf) at n-2, L^inf above.
  std::optional<Rational> target_exponent;
  std::string target_space;
};

CaseInfo classify_case(const ProblemParams& params);

// Least m with (2/n) sum_{k=1}^m (two_star_mu - 1)^{-k} > 1/two_star - mu/(2n).
// Only defined for mu in (0, n-2); empty otherwise.
std::optional<int> compute_N(const ProblemParams& params);

// H_1 = (two_star_mu - 1)^{-1};
// H_l = (two_star_mu - 1)^{-l} + (2/n) sum_{k=1}^{l-1} (two_star_mu - 1)^{-k}.
Rational H_ell(const ProblemParams& params, int ell);

struct LedgerReport {
  int n = 0;
  Rational mu;
  RegularityCase case_tag = RegularityCase::mu_lt_n_minus_2;
  int N = 0;
  std::vector<Rational> q_sequence;  // q_1 ... q_N
  std::vector<Rational> h_values;    // H_1 ... H_{N-1}
  std::map<std::string, bool> checks;
  bool valid = false;
};

// Picks 1/q_1 as the midpoint of the admissible window, runs the recursion
// 1/q_{k+1} = (two_star_mu - 1)/q_k - 2/n, and evaluates every gate.
LedgerReport build_q_sequence(const ProblemParams& params);

// 1/two_star - mu/(2n) < 1/q < 1/two_star, exactly.
bool boost_constraint_check(const ProblemParams& params, const Rational& q);

std::string case_name(RegularityCase tag);

}  // namespace choq
