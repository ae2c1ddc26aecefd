#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace fd {

/// Session features describing an agent at log-in.
struct FeatureVector {
  double login_time = 0.0;   // seconds of day
  double logoff_time = 0.0;  // seconds of day
  double login_lat = 0.0;
  double login_lon = 0.0;
  double active_agent_count = 0.0;
  double orders_per_window = 0.0;
  std::optional<double> rating;  // only used when the model was trained with it

  static constexpr std::size_t kBaseDims = 6;
  std::vector<double> values(bool with_rating) const;
};

/// Squared-exponential kernel with per-dimension lengthscales.
double rbf_kernel(std::span<const double> x1, std::span<const double> x2, double sigma,
                  std::span<const double> length);

struct GprParams {
  double sigma = 1.0;
  Eigen::VectorXd length;
  double eta = 0.1;

  /// Packed as (log sigma, log l_1..l_d, log eta).
  Eigen::VectorXd to_log() const;
  static GprParams from_log(const Eigen::VectorXd& theta);
};

inline constexpr double kJitter = 1e-6;

struct Likelihood {
  double value = 0.0;
  Eigen::VectorXd gradient;  // w.r.t. GprParams::to_log()
};

/// Zero-mean GP log evidence of y given inputs X (one row per sample) and its
/// analytic gradient in log-parameter space. Jitter kJitter * sigma^2 is added
/// to the diagonal along with the noise.
Likelihood log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GprParams& params);

struct FitOptions {
  int max_iters = 200;
  double step = 0.1;
  double grad_tol = 1e-5;
  std::size_t max_rows = 5000;
  std::uint64_t seed = 7;
  std::optional<GprParams> init;
};

struct FitDiagnostics {
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> trace;  // accepted log-likelihood values
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact GP regressor over standardized features with a constant prior mean
/// equal to the training mean of y.
class GprModel {
 public:
  GprModel() = default;

  /// Standardizes X, then runs gradient ascent with backtracking on the log
  /// marginal likelihood. Rows beyond `max_rows` are uniformly subsampled.
  static GprModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitOptions& options = {},
                      FitDiagnostics* diagnostics = nullptr);

  /// Builds a model with fixed parameters (no optimization).
  static GprModel with_params(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GprParams& params,
                              bool standardize = true);

  bool fitted() const { return fitted_; }
  const GprParams& params() const { return params_; }
  std::size_t dims() const { return static_cast<std::size_t>(mean_x_.size()); }
  std::size_t rows() const { return static_cast<std::size_t>(X_.rows()); }
  double log_likelihood() const;

  Prediction predict(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static GprModel from_json(const nlohmann::json& j);

 private:
  void factorize();

  GprParams params_;
  Eigen::MatrixXd X_;  // standardized
  Eigen::VectorXd y_;  // centered
  double y_mean_ = 0.0;
  Eigen::VectorXd mean_x_;
  Eigen::VectorXd scale_x_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  bool fitted_ = false;
};

}  // namespace fd
