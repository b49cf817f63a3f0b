#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcm {

// Dense materialization is a debugging / small-scale device; every dense code
// path refuses dimensions above this unless the caller raises the cap.
inline constexpr std::size_t kDenseCap = 4096;

// Adjacent sorted coordinates closer than this make the kernel numerically
// singular; precision-side operations refuse them.
inline constexpr double kGapTolerance = 1e-10;

// Floor added to the softplus diagonal so the observation noise stays
// strictly positive.
inline constexpr double kDefaultEps = 1e-6;

// Malformed or inconsistent file content (magic, schema, version, payload).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Coordinate configuration whose kernel cannot be inverted (tied or
// near-tied coordinates).
struct SingularKernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss encountered while fitting.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, std::size_t epoch_)
      : std::runtime_error(what), epoch(epoch_) {}
  std::size_t epoch;
};

// Parameters of the structured covariance
//   Sigma = diag(softplus(u) + eps) + diag(w) K(a) diag(w),
// with K_ij = exp(-|a_i - a_j|), plus the mean vector mu.
struct LcmParams {
  std::vector<double> mu;
  std::vector<double> u;
  std::vector<double> w;
  std::vector<double> a;
  double eps = kDefaultEps;

  [[nodiscard]] std::size_t dim() const { return u.size(); }

  // softplus(u) + eps, the diagonal noise term.
  [[nodiscard]] std::vector<double> noise_diag() const;

  // Throws std::invalid_argument on mismatched sizes, non-finite entries,
  // or non-positive eps.
  void validate() const;
};

// Row-major n x c matrix of feature vectors, one sample per row.
// `centered` records that column means have been subtracted; operations that
// require centered input trust the flag.
struct FeatureBatch {
  std::vector<double> data;
  std::size_t n = 0;
  std::size_t c = 0;
  bool centered = false;

  [[nodiscard]] double* row(std::size_t i) { return data.data() + i * c; }
  [[nodiscard]] const double* row(std::size_t i) const { return data.data() + i * c; }
  [[nodiscard]] double& at(std::size_t i, std::size_t j) { return data[i * c + j]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return data[i * c + j]; }

  // Shape consistency (data.size() == n*c, n >= 1, c >= 1).
  void validate_shape() const;
};

// Independent-coordinate Gaussian baseline.
struct DiagonalGaussian {
  std::vector<double> mu;
  std::vector<double> var;

  [[nodiscard]] std::size_t dim() const { return mu.size(); }
};

// Sample counts (e.g. class counts) weighting the old and new task in
// covariance aggregation.
struct TaskWeights {
  double n_old = 1.0;
  double n_new = 1.0;

  void validate() const;
};

// Full-batch Adam settings for the Frobenius fit.
struct FitConfig {
  double lr = 0.01;
  std::size_t epochs = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
};

}  // namespace lcm
