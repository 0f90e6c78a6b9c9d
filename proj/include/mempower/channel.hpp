// Copyright 2026 The mempower Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Power-constrained linear Gaussian channel: water-filling and capacity.
//
// A channel y = H u + z with z ~ N(0, Sigma_z) and u ~ N(0, S), tr(S) <= P.
// Capacities are in nats.

#ifndef MEMPOWER_CHANNEL_HPP_
#define MEMPOWER_CHANNEL_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mempower/error.hpp"

namespace mempower {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Total (trace) power available to a transmitter, in squared action units.
class PowerBudget {
 public:
  constexpr PowerBudget() = default;
  explicit PowerBudget(double value) : value_(value) {
    require(std::isfinite(value) && value >= 0.0, ErrorCode::kInvalidArgument,
            "power budget must be finite and nonnegative, got " +
                std::to_string(value));
  }
  constexpr double value() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

namespace channel_limits {
// Singular values below this fraction of the largest are dead directions.
inline constexpr double kRankCutoff = 1e-10;
inline constexpr double kNoiseSymmetryTol = 1e-12;
inline constexpr double kInputSymmetryTol = 1e-9;
// Eigenvalues in (-kPsdSlack * trace, 0) are rounding noise and get clamped.
inline constexpr double kPsdSlack = 1e-10;
}  // namespace channel_limits

namespace detail {

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = max_abs(m);
  return max_abs(m - m.transpose()) <= rel_tol * scale;
}

inline std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace detail

/// Cholesky factor of a noise covariance. Throws NonPositiveDefiniteNoise when
/// the matrix is not symmetric positive definite.
inline Eigen::LLT<Matrix> factor_noise(const Matrix& noise) {
  require(noise.rows() == noise.cols() && noise.rows() >= 1,
          ErrorCode::kDimensionMismatch,
          "noise covariance must be square, got " + detail::shape(noise));
  require(detail::all_finite(noise), ErrorCode::kNonPositiveDefiniteNoise,
          "noise covariance has non-finite entries");
  require(detail::is_symmetric(noise, channel_limits::kNoiseSymmetryTol),
          ErrorCode::kNonPositiveDefiniteNoise,
          "noise covariance is not symmetric");
  Eigen::LLT<Matrix> llt(noise);
  const bool ok = llt.info() == Eigen::Success &&
                  (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all();
  require(ok, ErrorCode::kNonPositiveDefiniteNoise,
          "noise covariance is not positive definite");
  return llt;
}

/// ln|M| for symmetric positive definite M via its Cholesky factor.
inline double log_det_spd(const Eigen::LLT<Matrix>& llt) {
  const auto diag = llt.matrixLLT().diagonal();
  return 2.0 * diag.array().log().sum();
}

inline double log_det_spd(const Matrix& m) {
  return log_det_spd(factor_noise(m));
}

/// Validates a candidate input covariance and returns it symmetrized with
/// roundoff-level negative eigenvalues clamped to zero.
inline Matrix repair_psd(const Matrix& cov) {
  require(cov.rows() == cov.cols(), ErrorCode::kDimensionMismatch,
          "input covariance must be square, got " + detail::shape(cov));
  require(detail::all_finite(cov), ErrorCode::kNotPositiveSemidefinite,
          "input covariance has non-finite entries");
  require(detail::is_symmetric(cov, channel_limits::kInputSymmetryTol),
          ErrorCode::kNotPositiveSemidefinite,
          "input covariance is not symmetric");
  Matrix sym = 0.5 * (cov + cov.transpose());
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& values = eig.eigenvalues();
  const double floor =
      -channel_limits::kPsdSlack * std::max(std::abs(sym.trace()), 0.0);
  if (values.minCoeff() >= 0.0) return sym;
  require(values.minCoeff() > floor || values.minCoeff() == 0.0,
          ErrorCode::kNotPositiveSemidefinite,
          "input covariance has eigenvalue " +
              std::to_string(values.minCoeff()));
  const Vector clamped = values.cwiseMax(0.0);
  return eig.eigenvectors() * clamped.asDiagonal() *
         eig.eigenvectors().transpose();
}

/// Water-filling over parallel channels with the given power gains (squared
/// whitened singular values). Returns p_i = max(0, mu - 1/g_i) with
/// sum p_i = budget; zero gains get zero power. The water level is found by an
/// exact scan over the sorted inverse gains.
inline std::vector<double> allocate_power(std::span<const double> gains,
                                          double budget) {
  std::vector<double> power(gains.size(), 0.0);
  if (budget <= 0.0) return power;

  std::vector<std::size_t> active;
  active.reserve(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (gains[i] > 0.0) active.push_back(i);
  }
  if (active.empty()) return power;
  std::stable_sort(active.begin(), active.end(),
                   [&](std::size_t a, std::size_t b) {
                     return gains[a] > gains[b];
                   });

  double prefix = 0.0;
  double level = 0.0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    prefix += 1.0 / gains[active[k]];
    level = (budget + prefix) / static_cast<double>(k + 1);
    const bool last = k + 1 == active.size();
    if (last || level <= 1.0 / gains[active[k + 1]]) break;
  }
  for (std::size_t i : active) {
    power[i] = std::max(0.0, level - 1.0 / gains[i]);
  }
  return power;
}

namespace detail {

inline void check_channel_noise(const Matrix& channel, const Matrix& noise) {
  require(channel.rows() >= 1 && channel.cols() >= 1,
          ErrorCode::kDimensionMismatch,
          "channel must be nonempty, got " + shape(channel));
  require(all_finite(channel), ErrorCode::kInvalidArgument,
          "channel has non-finite entries");
  require(noise.rows() == channel.rows() && noise.cols() == channel.rows(),
          ErrorCode::kDimensionMismatch,
          "noise " + shape(noise) + " does not match channel " +
              shape(channel));
}

// Water-filling given a channel already whitened by the noise Cholesky factor.
inline Matrix waterfill_whitened(const Matrix& whitened, double budget) {
  const Index n = whitened.cols();
  Matrix cov = Matrix::Zero(n, n);
  if (budget <= 0.0) return cov;

  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(
      whitened, Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) <= 0.0) return cov;
  const double cutoff = channel_limits::kRankCutoff * sigma(0);

  std::vector<double> gains(static_cast<std::size_t>(sigma.size()), 0.0);
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) gains[static_cast<std::size_t>(i)] = sigma(i) * sigma(i);
  }
  const std::vector<double> power = allocate_power(gains, budget);
  const Matrix& v = svd.matrixV();
  for (Index i = 0; i < sigma.size(); ++i) {
    const double p = power[static_cast<std::size_t>(i)];
    if (p > 0.0) cov.noalias() += p * v.col(i) * v.col(i).transpose();
  }
  return 0.5 * (cov + cov.transpose());
}

// 0.5 ln|I + W S W^T| for the whitened channel W; no validation.
inline double capacity_whitened(const Matrix& whitened, const Matrix& cov) {
  const Index d = whitened.rows();
  Matrix m = Matrix::Identity(d, d);
  m.noalias() += whitened * cov * whitened.transpose();
  Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
  return 0.5 * log_det_spd(llt);
}

}  // namespace detail

/// Input covariance maximizing 0.5 ln|H S H^T + Sigma_z| subject to
/// tr(S) <= budget and S PSD. The noise is whitened, the whitened channel is
/// decomposed, and power is poured over its eigenmodes.
inline Matrix waterfill(const Matrix& channel, const Matrix& noise,
                        PowerBudget budget) {
  detail::check_channel_noise(channel, noise);
  const auto llt = factor_noise(noise);
  const Matrix whitened = llt.matrixL().solve(channel);
  return detail::waterfill_whitened(whitened, budget.value());
}

/// Mutual information 0.5 ln|H S H^T + Sigma_z| - 0.5 ln|Sigma_z| in nats.
inline double capacity(const Matrix& channel, const Matrix& input_cov,
                       const Matrix& noise) {
  detail::check_channel_noise(channel, noise);
  require(input_cov.rows() == channel.cols() &&
              input_cov.cols() == channel.cols(),
          ErrorCode::kDimensionMismatch,
          "input covariance " + detail::shape(input_cov) +
              " does not match channel " + detail::shape(channel));
  const Matrix cov = repair_psd(input_cov);
  const auto llt = factor_noise(noise);
  const Matrix whitened = llt.matrixL().solve(channel);
  return detail::capacity_whitened(whitened, cov);
}

}  // namespace mempower

#endif  // MEMPOWER_CHANNEL_HPP_
