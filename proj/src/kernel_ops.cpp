#include "lcm/kernel_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lcm {
namespace {

void check_match(const SortedView& v, std::span<const double> x,
                 const char* op) {
  if (x.size() != v.size()) {
    throw std::invalid_argument(std::string(op) + ": vector length " +
                                std::to_string(x.size()) +
                                " does not match coordinate count " +
                                std::to_string(v.size()));
  }
}

// Forward pass: fwd[k] = sum_{j<k} K_kj xs[j], via fwd[k] = rho[k-1] * (fwd[k-1] + xs[k-1]).
void forward_scan(const SortedView& v, const std::vector<double>& xs,
                  std::vector<double>& fwd) {
  const std::size_t c = v.size();
  fwd.assign(c, 0.0);
  for (std::size_t k = 1; k < c; ++k) {
    fwd[k] = v.rho[k - 1] * (fwd[k - 1] + xs[k - 1]);
  }
}

// Backward pass: bwd[k] = sum_{j>k} K_kj xs[j].
void backward_scan(const SortedView& v, const std::vector<double>& xs,
                   std::vector<double>& bwd) {
  const std::size_t c = v.size();
  bwd.assign(c, 0.0);
  for (std::size_t k = c - 1; k-- > 0;) {
    bwd[k] = v.rho[k] * (bwd[k + 1] + xs[k + 1]);
  }
}

}  // namespace

SortedView make_sorted_view(std::span<const double> a) {
  if (a.empty()) {
    throw std::invalid_argument("make_sorted_view: empty coordinate vector");
  }
  for (double ai : a) {
    if (!std::isfinite(ai)) {
      throw std::invalid_argument("make_sorted_view: non-finite coordinate");
    }
  }
  const std::size_t c = a.size();
  SortedView v;
  v.perm.resize(c);
  std::iota(v.perm.begin(), v.perm.end(), std::size_t{0});
  std::sort(v.perm.begin(), v.perm.end(), [&](std::size_t i, std::size_t j) {
    return a[i] < a[j] || (a[i] == a[j] && i < j);
  });
  v.sorted_a.resize(c);
  for (std::size_t k = 0; k < c; ++k) v.sorted_a[k] = a[v.perm[k]];
  v.gaps.resize(c - 1);
  v.rho.resize(c - 1);
  for (std::size_t k = 0; k + 1 < c; ++k) {
    v.gaps[k] = v.sorted_a[k + 1] - v.sorted_a[k];
    v.rho[k] = std::exp(-v.gaps[k]);
  }
  return v;
}

SortedView doubled_view(const SortedView& v) {
  SortedView d;
  d.perm = v.perm;
  d.sorted_a.resize(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) d.sorted_a[k] = 2.0 * v.sorted_a[k];
  d.gaps.resize(v.gaps.size());
  d.rho.resize(v.rho.size());
  for (std::size_t k = 0; k < v.gaps.size(); ++k) {
    d.gaps[k] = 2.0 * v.gaps[k];
    d.rho[k] = v.rho[k] * v.rho[k];
  }
  return d;
}

Eigen::MatrixXd dense_kernel(std::span<const double> a, std::size_t cap) {
  if (a.size() > cap) {
    throw std::invalid_argument(
        "dense_kernel: C = " + std::to_string(a.size()) +
        " exceeds the dense cap " + std::to_string(cap));
  }
  for (double ai : a) {
    if (!std::isfinite(ai)) {
      throw std::invalid_argument("dense_kernel: non-finite coordinate");
    }
  }
  const Eigen::Index c = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd k(c, c);
  for (Eigen::Index i = 0; i < c; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double val = std::exp(-std::abs(a[static_cast<std::size_t>(i)] -
                                            a[static_cast<std::size_t>(j)]));
      k(i, j) = val;
      k(j, i) = val;
    }
  }
  return k;
}

std::vector<double> kernel_matvec(const SortedView& v,
                                  std::span<const double> x) {
  check_match(v, x, "kernel_matvec");
  const std::size_t c = v.size();
  std::vector<double> xs(c);
  for (std::size_t k = 0; k < c; ++k) xs[k] = x[v.perm[k]];

  std::vector<double> fwd, bwd;
  forward_scan(v, xs, fwd);
  backward_scan(v, xs, bwd);

  std::vector<double> y(c);
  for (std::size_t k = 0; k < c; ++k) {
    y[v.perm[k]] = fwd[k] + xs[k] + bwd[k];
  }
  return y;
}

std::vector<double> kernel_matvec(std::span<const double> a,
                                  std::span<const double> x) {
  return kernel_matvec(make_sorted_view(a), x);
}

double kernel_quadform(const SortedView& v, std::span<const double> x) {
  check_match(v, x, "kernel_quadform");
  const std::size_t c = v.size();
  // x' K x = sum_k xs_k (xs_k + 2 fwd_k): the forward and backward halves of
  // the bilinear form are equal by symmetry, so one pass suffices.
  double acc = 0.0;
  double fwd = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    const double xk = x[v.perm[k]];
    acc += xk * (xk + 2.0 * fwd);
    if (k + 1 < c) fwd = v.rho[k] * (fwd + xk);
  }
  return acc;
}

double kernel_quadform(std::span<const double> a, std::span<const double> x) {
  return kernel_quadform(make_sorted_view(a), x);
}

std::vector<double> kernel_quadform_grad_a(const SortedView& v,
                                           std::span<const double> x) {
  check_match(v, x, "kernel_quadform_grad_a");
  const std::size_t c = v.size();
  std::vector<double> xs(c);
  for (std::size_t k = 0; k < c; ++k) xs[k] = x[v.perm[k]];

  std::vector<double> fwd, bwd;
  forward_scan(v, xs, fwd);
  backward_scan(v, xs, bwd);

  // d/da_k of sum_{ij} K exp terms: moving a sorted coordinate k to the
  // right decays every pair that straddles it from the left and tightens
  // those on the right, giving grad_k = 2 xs_k (bwd_k - fwd_k). Exactly tied
  // coordinates share pair terms with |a_i - a_j| = 0 whose subgradient is
  // taken as 0 (sign(0) = 0), which means ties must not see each other:
  // evaluate fwd at the tie group's first index and bwd at its last.
  std::vector<double> grad(c);
  std::size_t k = 0;
  while (k < c) {
    std::size_t end = k;  // last index of the tie group [k, end]
    while (end + 1 < c && v.gaps[end] == 0.0) ++end;
    for (std::size_t j = k; j <= end; ++j) {
      grad[v.perm[j]] = 2.0 * xs[j] * (bwd[end] - fwd[k]);
    }
    k = end + 1;
  }
  return grad;
}

std::vector<double> kernel_quadform_grad_a(std::span<const double> a,
                                           std::span<const double> x) {
  return kernel_quadform_grad_a(make_sorted_view(a), x);
}

}  // namespace lcm
