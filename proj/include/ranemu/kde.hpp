#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ranemu/types.hpp"

namespace ranemu {

// Silverman's rule-of-thumb scale factor (n(d+2)/4)^(-1/(d+4)).
// Throws DegenerateFitError for n == 0 and ParameterError for d == 0.
double silverman_factor(std::size_t n, std::size_t d);

// Three-dimensional Gaussian-kernel density over (B_D, B_U, L).
// The kernel covariance is bandwidth_factor^2 times the sample covariance of
// the stored points. Immutable after construction.
class KdeModel {
 public:
  static constexpr std::size_t kDim = 3;

  // Fits on raw samples with the Silverman factor. Needs at least two samples
  // and nonzero variance in every dimension; throws DegenerateFitError
  // otherwise, naming the flat dimension. A rank-deficient covariance (e.g.
  // two points) still fits and samples, but density() will refuse it.
  static KdeModel fit(std::span<const NetworkSample> samples);

  // Reassembles a model from stored parts. Validates the invariants (n >= 1,
  // finite values, factor > 0, symmetric PSD covariance) and throws
  // ParameterError describing the first violation.
  static KdeModel from_parts(std::vector<NetworkSample> points, const Eigen::Matrix3d& covariance,
                             double bandwidth_factor);

  const std::vector<NetworkSample>& points() const { return points_; }
  const Eigen::Matrix3d& covariance() const { return covariance_; }
  const Eigen::Matrix3d& kernel_covariance() const { return kernel_covariance_; }
  double bandwidth_factor() const { return factor_; }
  std::size_t n() const { return points_.size(); }
  std::size_t dimension() const { return kDim; }

  // Mixture density at `x`. Throws NumericError if the kernel covariance is
  // singular.
  double density(const NetworkSample& x) const;

  // `count` draws: a uniformly chosen stored point plus N(0, kernel_covariance)
  // noise. Draws with a nonpositive component are redrawn; if fewer than 1% of
  // the attempts in a window of 1000 succeed, throws PathologicalModelError.
  std::vector<EmulationParams> sample(Rng& rng, std::size_t count) const;

 private:
  KdeModel(std::vector<NetworkSample> points, const Eigen::Matrix3d& covariance, double factor);

  std::vector<NetworkSample> points_;
  Eigen::Matrix3d covariance_;
  Eigen::Matrix3d kernel_covariance_;
  double factor_ = 1.0;

  // Square-root factor of covariance_ (lower triangular when it is PD).
  Eigen::Matrix3d covariance_sqrt_;
  bool positive_definite_ = false;
  // Density evaluation in whitened coordinates: kernel Cholesky L, points L^-1 x_i.
  Eigen::Matrix3d kernel_chol_;
  std::vector<Eigen::Vector3d> whitened_;
  double norm_ = 0.0;
};

Eigen::Matrix3d sample_covariance(std::span<const NetworkSample> samples);

}  // namespace ranemu
