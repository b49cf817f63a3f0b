#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "lcm/types.hpp"

// Quasi-linear algebra for the Laplace kernel K_ij = exp(-|a_i - a_j|).
// Everything here runs off a sort of the coordinates: in sorted order the
// kernel's action splits into a forward and a backward geometric recursion
// over adjacent-gap decay factors, so matvec, quadratic form and its
// coordinate gradient all cost one sort plus O(C) passes and never touch a
// dense C x C matrix.

namespace lcm {

// Sorted view of a coordinate vector: stable sort permutation (ties keep
// original index order), sorted values, adjacent gaps and their decay
// factors rho_k = exp(-gap_k).
struct SortedView {
  std::vector<std::size_t> perm;  // perm[k] = original index of k-th smallest
  std::vector<double> sorted_a;
  std::vector<double> gaps;  // size C-1, >= 0
  std::vector<double> rho;   // size C-1, in (0, 1]

  [[nodiscard]] std::size_t size() const { return sorted_a.size(); }
};

// Throws std::invalid_argument on empty or non-finite input.
[[nodiscard]] SortedView make_sorted_view(std::span<const double> a);

// View of the doubled coordinates 2a: same permutation, doubled gaps,
// squared decay factors. Used by the model term of the Frobenius loss.
[[nodiscard]] SortedView doubled_view(const SortedView& v);

// Dense materialization of K(a). Refuses C > cap.
[[nodiscard]] Eigen::MatrixXd dense_kernel(std::span<const double> a,
                                           std::size_t cap = kDenseCap);

// y = K(a) x without forming K.
[[nodiscard]] std::vector<double> kernel_matvec(const SortedView& v,
                                                std::span<const double> x);
[[nodiscard]] std::vector<double> kernel_matvec(std::span<const double> a,
                                                std::span<const double> x);

// x' K(a) x without forming K.
[[nodiscard]] double kernel_quadform(const SortedView& v,
                                     std::span<const double> x);
[[nodiscard]] double kernel_quadform(std::span<const double> a,
                                     std::span<const double> x);

// Gradient of x' K(a) x with respect to a. At exactly tied coordinates the
// two-sided derivative does not exist; the subgradient with sign(0) = 0 is
// returned, which collapses each tie group's internal contributions to zero.
[[nodiscard]] std::vector<double> kernel_quadform_grad_a(
    const SortedView& v, std::span<const double> x);
[[nodiscard]] std::vector<double> kernel_quadform_grad_a(
    std::span<const double> a, std::span<const double> x);

}  // namespace lcm
