#include "ranemu/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ranemu/error.hpp"

namespace ranemu {

namespace {

Eigen::Vector3d as_vector(const NetworkSample& s) {
  return {s.download_kbps, s.upload_kbps, s.latency_ms};
}

constexpr std::size_t kRejectionWindow = 1000;
constexpr std::size_t kMinAcceptedPerWindow = 10;

}  // namespace

double silverman_factor(std::size_t n, std::size_t d) {
  if (n == 0) throw DegenerateFitError("silverman_factor: cannot fit a density to zero samples");
  if (d == 0) throw ParameterError("silverman_factor: dimension must be >= 1");
  const double nd = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return std::pow(nd * (dd + 2.0) / 4.0, -1.0 / (dd + 4.0));
}

Eigen::Matrix3d sample_covariance(std::span<const NetworkSample> samples) {
  const auto n = static_cast<double>(samples.size());
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& s : samples) mean += as_vector(s);
  mean /= n;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& s : samples) {
    const Eigen::Vector3d d = as_vector(s) - mean;
    cov += d * d.transpose();
  }
  return cov / (n - 1.0);
}

KdeModel KdeModel::fit(std::span<const NetworkSample> samples) {
  if (samples.size() < 2) {
    throw DegenerateFitError("kde fit needs at least 2 samples, got " +
                             std::to_string(samples.size()));
  }
  const Eigen::Matrix3d cov = sample_covariance(samples);
  for (auto d : kDimensions) {
    const auto i = static_cast<Eigen::Index>(d);
    if (!(cov(i, i) > 0.0)) {
      throw DegenerateFitError("kde fit: zero variance in " + std::string(dimension_name(d)));
    }
  }
  return KdeModel(std::vector<NetworkSample>(samples.begin(), samples.end()), cov,
                  silverman_factor(samples.size(), kDim));
}

KdeModel KdeModel::from_parts(std::vector<NetworkSample> points, const Eigen::Matrix3d& covariance,
                              double bandwidth_factor) {
  if (points.empty()) throw ParameterError("model has no points");
  if (!std::isfinite(bandwidth_factor) || bandwidth_factor <= 0.0) {
    throw ParameterError("bandwidth_factor must be positive and finite");
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.download_kbps) || !std::isfinite(p.upload_kbps) ||
        !std::isfinite(p.latency_ms)) {
      throw ParameterError("non-finite point");
    }
  }
  if (!covariance.allFinite()) throw ParameterError("non-finite covariance");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ParameterError("covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(covariance);
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw ParameterError("covariance is not positive semi-definite");
  }
  return KdeModel(std::move(points), covariance, bandwidth_factor);
}

KdeModel::KdeModel(std::vector<NetworkSample> points, const Eigen::Matrix3d& covariance,
                   double factor)
    : points_(std::move(points)),
      covariance_(covariance),
      kernel_covariance_(covariance * factor * factor),
      factor_(factor) {
  Eigen::LLT<Eigen::Matrix3d> llt(covariance_);
  positive_definite_ = llt.info() == Eigen::Success;
  if (positive_definite_) {
    covariance_sqrt_ = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(covariance_);
    const Eigen::Vector3d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    covariance_sqrt_ = eig.eigenvectors() * root.asDiagonal();
  }

  if (positive_definite_) {
    kernel_chol_ = covariance_sqrt_ * factor_;
    const double det_sqrt = kernel_chol_.diagonal().prod();
    norm_ = std::pow(2.0 * std::numbers::pi, -1.5) / det_sqrt;
    const auto tri = kernel_chol_.triangularView<Eigen::Lower>();
    whitened_.reserve(points_.size());
    for (const auto& p : points_) whitened_.push_back(tri.solve(as_vector(p)));
  }
}

double KdeModel::density(const NetworkSample& x) const {
  if (!positive_definite_ || !(norm_ > 0.0) || !std::isfinite(norm_)) {
    throw NumericError("kde density: kernel covariance is singular");
  }
  const Eigen::Vector3d wx = kernel_chol_.triangularView<Eigen::Lower>().solve(as_vector(x));
  double sum = 0.0;
  for (const auto& w : whitened_) sum += std::exp(-0.5 * (w - wx).squaredNorm());
  return norm_ * sum / static_cast<double>(points_.size());
}

std::vector<EmulationParams> KdeModel::sample(Rng& rng, std::size_t count) const {
  std::vector<EmulationParams> out;
  out.reserve(count);
  std::uniform_int_distribution<std::size_t> pick(0, points_.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::size_t window_attempts = 0;
  std::size_t window_accepted = 0;
  while (out.size() < count) {
    Eigen::Vector3d z;
    for (Eigen::Index i = 0; i < 3; ++i) z(i) = normal(rng);
    const Eigen::Vector3d noise = factor_ * (covariance_sqrt_ * z);
    const auto& base = points_[pick(rng)];
    const EmulationParams draw{base.download_kbps + noise(0), base.upload_kbps + noise(1),
                               base.latency_ms + noise(2)};
    ++window_attempts;
    if (draw.all_positive()) {
      out.push_back(draw);
      ++window_accepted;
    }
    if (window_attempts == kRejectionWindow) {
      if (window_accepted < kMinAcceptedPerWindow) {
        throw PathologicalModelError(
            "kde sample: more than 99% of draws fall outside the positive octant");
      }
      window_attempts = 0;
      window_accepted = 0;
    }
  }
  return out;
}

}  // namespace ranemu
