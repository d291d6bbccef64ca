#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace choq {

// Block-orthogonal subgroup O(n_1) x ... x O(n_m) of O(n+1), described by the
// partition (n_1, ..., n_m) of n+1, plus the optional pair of equal blocks
// exchanged by the extra element tau.
struct GroupDescriptor {
  std::vector<int> parts;
  std::optional<std::pair<int, int>> swap;

  int ambient_dim() const;  // n + 1
  int sphere_dim() const;   // n
};

// All partitions of n+1 into at least two parts, each >= 2, up to reordering
// (descending). A swap pair is flagged on the first two coinciding parts.
std::vector<GroupDescriptor> enumerate_descriptors(int n);

// True iff some two parts are equal, so the block-swap construction applies.
bool has_property_P(const GroupDescriptor& g);

// The permutation matrix exchanging the two designated equal blocks; its
// square is the identity (an element of G) and it lies outside G.
Eigen::MatrixXd build_tau(const GroupDescriptor& g);

// Smallest orbit dimension min_j(n_j) - 1 (the smallest orbit is the sphere
// of one block). Errors if any part is < 2, where orbits can be finite.
int min_orbit_dimension(const GroupDescriptor& g);

// 2(n-d)/(n-d-2) when n - d > 2, +infinity otherwise; always > 2n/(n-2).
double improved_embedding_exponent(const GroupDescriptor& g, int n);

// Dimension of the G-invariant (or swap-antisymmetric, for the Gamma class)
// spherical harmonics of the given degree, biaxial descriptors only.
// Computed from the rank of the group-averaged reproducing kernel of the
// full degree space on generic sample points; the average over each block
// factor collapses to an exact orbit quadrature.
int invariant_harmonic_dim(const GroupDescriptor& g, int degree,
                           bool antisymmetric);

// Same, for the whole harmonic span of degrees 0..max_degree at once.
int invariant_span_rank(const GroupDescriptor& g, int max_degree,
                        bool antisymmetric);

}  // namespace choq
