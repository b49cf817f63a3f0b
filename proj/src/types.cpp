#include "lcm/types.hpp"

#include <cmath>

#include "internal_math.hpp"

namespace lcm {
namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

std::vector<double> LcmParams::noise_diag() const {
  std::vector<double> d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = detail::softplus(u[i]) + eps;
  return d;
}

void LcmParams::validate() const {
  const std::size_t c = u.size();
  if (c == 0) throw std::invalid_argument("LcmParams: empty parameter vectors");
  if (mu.size() != c || w.size() != c || a.size() != c) {
    throw std::invalid_argument(
        "LcmParams: mu/u/w/a must all have the same length (got " +
        std::to_string(mu.size()) + "/" + std::to_string(u.size()) + "/" +
        std::to_string(w.size()) + "/" + std::to_string(a.size()) + ")");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("LcmParams: eps must be positive and finite");
  }
  if (!all_finite(mu) || !all_finite(u) || !all_finite(w) || !all_finite(a)) {
    throw std::invalid_argument("LcmParams: non-finite parameter value");
  }
}

void FeatureBatch::validate_shape() const {
  if (n == 0 || c == 0) {
    throw std::invalid_argument("FeatureBatch: n and c must be >= 1");
  }
  if (data.size() != n * c) {
    throw std::invalid_argument(
        "FeatureBatch: data size " + std::to_string(data.size()) +
        " does not match n*c = " + std::to_string(n * c));
  }
}

void TaskWeights::validate() const {
  if (!(n_old >= 1.0) || !(n_new >= 1.0) || !std::isfinite(n_old) ||
      !std::isfinite(n_new)) {
    throw std::invalid_argument(
        "TaskWeights: counts must be finite and >= 1");
  }
}

}  // namespace lcm
