#include "lcm/precision_gmrf.hpp"

#include <cmath>
#include <string>

namespace lcm {

Ar1Chain make_ar1_chain(const SortedView& v, double gap_tolerance) {
  const std::size_t c = v.size();
  Ar1Chain chain;
  chain.rho.resize(c > 0 ? c - 1 : 0);
  chain.innovation_var.resize(chain.rho.size());
  for (std::size_t k = 0; k + 1 < c; ++k) {
    if (v.gaps[k] <= gap_tolerance) {
      throw SingularKernelError(
          "kernel precision: coordinates " + std::to_string(v.perm[k]) +
          " and " + std::to_string(v.perm[k + 1]) + " are separated by " +
          std::to_string(v.gaps[k]) + ", at or below the gap tolerance " +
          std::to_string(gap_tolerance));
    }
    chain.rho[k] = v.rho[k];
    // 1 - rho^2 = -expm1(-2 gap), accurate when the gap is small.
    chain.innovation_var[k] = -std::expm1(-2.0 * v.gaps[k]);
  }
  return chain;
}

TridiagonalPrecision kernel_precision(std::span<const double> a,
                                      double gap_tolerance) {
  const SortedView v = make_sorted_view(a);
  const Ar1Chain chain = make_ar1_chain(v, gap_tolerance);
  const std::size_t c = v.size();

  TridiagonalPrecision q;
  q.perm = v.perm;
  q.main.assign(c, 1.0);
  q.off.assign(c > 0 ? c - 1 : 0, 0.0);
  if (c == 1) return q;

  for (std::size_t k = 0; k + 1 < c; ++k) {
    q.off[k] = -chain.rho[k] / chain.innovation_var[k];
  }
  q.main[0] = 1.0 / chain.innovation_var[0];
  q.main[c - 1] = 1.0 / chain.innovation_var[c - 2];
  for (std::size_t i = 1; i + 1 < c; ++i) {
    q.main[i] = 1.0 / chain.innovation_var[i - 1] +
                chain.rho[i] * chain.rho[i] / chain.innovation_var[i];
  }
  return q;
}

double kernel_logdet(std::span<const double> a, double gap_tolerance) {
  const SortedView v = make_sorted_view(a);
  const Ar1Chain chain = make_ar1_chain(v, gap_tolerance);
  double acc = 0.0;
  for (double q : chain.innovation_var) acc += std::log(q);
  return acc;
}

double kernel_precision_quadform(std::span<const double> a,
                                 std::span<const double> x,
                                 double gap_tolerance) {
  if (x.size() != a.size()) {
    throw std::invalid_argument(
        "kernel_precision_quadform: dimension mismatch");
  }
  const TridiagonalPrecision q = kernel_precision(a, gap_tolerance);
  const std::size_t c = q.main.size();
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    const double xk = x[q.perm[k]];
    acc += q.main[k] * xk * xk;
    if (k > 0) acc += 2.0 * q.off[k - 1] * prev * xk;
    prev = xk;
  }
  return acc;
}

}  // namespace lcm
