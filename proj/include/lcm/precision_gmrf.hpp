#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lcm/kernel_ops.hpp"
#include "lcm/types.hpp"

// Markov structure of the Laplace kernel: on sorted coordinates the kernel
// is the covariance of a stationary AR(1) chain, so its inverse is
// tridiagonal and its determinant is a product over adjacent gaps. All
// operations refuse gaps at or below the tolerance, where the chain is
// numerically degenerate.

namespace lcm {

// AR(1) transition view of sorted coordinates: rho_k = exp(-gap_k) and
// innovation variances 1 - rho_k^2 (computed as -expm1(-2 gap) to keep
// accuracy at small gaps).
struct Ar1Chain {
  std::vector<double> rho;
  std::vector<double> innovation_var;
};

// Throws SingularKernelError if any gap <= gap_tolerance (C >= 2 only;
// a single coordinate has no gaps).
[[nodiscard]] Ar1Chain make_ar1_chain(const SortedView& v,
                                      double gap_tolerance = kGapTolerance);

// K(a)^{-1} in sorted order plus the permutation that maps sorted positions
// back to original indices: Q_dense[perm[k], perm[l]] = (sorted Q)[k, l].
struct TridiagonalPrecision {
  std::vector<double> main;           // size C
  std::vector<double> off;            // size C-1, super/subdiagonal
  std::vector<std::size_t> perm;      // sorted position -> original index
};

[[nodiscard]] TridiagonalPrecision kernel_precision(
    std::span<const double> a, double gap_tolerance = kGapTolerance);

// log det K(a) = sum_k log(1 - rho_k^2).
[[nodiscard]] double kernel_logdet(std::span<const double> a,
                                   double gap_tolerance = kGapTolerance);

// x' K(a)^{-1} x through the tridiagonal form; O(C) after the sort.
[[nodiscard]] double kernel_precision_quadform(
    std::span<const double> a, std::span<const double> x,
    double gap_tolerance = kGapTolerance);

}  // namespace lcm
