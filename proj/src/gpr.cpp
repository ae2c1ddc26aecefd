#include "fairdispatch/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fairdispatch/core.hpp"

namespace fd {

std::vector<double> FeatureVector::values(bool with_rating) const {
  std::vector<double> v{login_time, logoff_time, login_lat, login_lon, active_agent_count, orders_per_window};
  if (with_rating) v.push_back(rating.value_or(3.0));
  return v;
}

double rbf_kernel(std::span<const double> x1, std::span<const double> x2, double sigma,
                  std::span<const double> length) {
  if (x1.size() != x2.size() || x1.size() != length.size()) throw ContractError("rbf_kernel: dimension mismatch");
  double q = 0.0;
  for (std::size_t d = 0; d < x1.size(); ++d) {
    const double z = (x1[d] - x2[d]) / length[d];
    q += z * z;
  }
  return sigma * sigma * std::exp(-0.5 * q);
}

Eigen::VectorXd GprParams::to_log() const {
  Eigen::VectorXd theta(length.size() + 2);
  theta(0) = std::log(sigma);
  for (Eigen::Index d = 0; d < length.size(); ++d) theta(d + 1) = std::log(length(d));
  theta(theta.size() - 1) = std::log(eta);
  return theta;
}

GprParams GprParams::from_log(const Eigen::VectorXd& theta) {
  GprParams p;
  p.sigma = std::exp(theta(0));
  p.length = theta.segment(1, theta.size() - 2).array().exp();
  p.eta = std::exp(theta(theta.size() - 1));
  return p;
}

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const GprParams& p) {
  const Eigen::Index n = X.rows();
  const Eigen::MatrixXd Z = X.array().rowwise() / p.length.transpose().array();
  const Eigen::VectorXd sq = Z.rowwise().squaredNorm();
  Eigen::MatrixXd K = Z * Z.transpose();
  const double s2 = p.sigma * p.sigma;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d2 = std::max(0.0, sq(i) + sq(j) - 2.0 * K(i, j));
      K(i, j) = s2 * std::exp(-0.5 * d2);
    }
  }
  // Exact symmetry regardless of rounding in the Gram trick.
  for (Eigen::Index j = 0; j < n; ++j) {
    K(j, j) = s2;
    for (Eigen::Index i = j + 1; i < n; ++i) K(j, i) = K(i, j);
  }
  return K;
}

double diagonal_load(const GprParams& p) { return p.eta * p.eta + kJitter * p.sigma * p.sigma; }

struct Bounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

Bounds log_bounds(std::size_t dims, double y_scale) {
  Bounds b{Eigen::VectorXd(dims + 2), Eigen::VectorXd(dims + 2)};
  b.lo(0) = std::log(1e-3 * y_scale);
  b.hi(0) = std::log(1e3 * y_scale);
  for (std::size_t d = 0; d < dims; ++d) {
    b.lo(d + 1) = std::log(1e-2);
    b.hi(d + 1) = std::log(1e3);
  }
  b.lo(dims + 1) = std::log(1e-4 * y_scale);
  b.hi(dims + 1) = std::log(10.0 * y_scale);
  return b;
}

}  // namespace

Likelihood log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GprParams& p) {
  const Eigen::Index n = X.rows();
  if (n != y.size() || n < 1) throw ContractError("log_marginal_likelihood: X and y sizes differ or are empty");
  if (p.length.size() != X.cols()) throw ContractError("log_marginal_likelihood: lengthscale dimension mismatch");

  const Eigen::MatrixXd K = kernel_matrix(X, p);
  Eigen::MatrixXd Ky = K;
  Ky.diagonal().array() += diagonal_load(p);
  Eigen::LLT<Eigen::MatrixXd> llt(Ky);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("kernel matrix is not positive definite after jitter; increase the jitter");
  }
  const Eigen::VectorXd alpha = llt.solve(y);
  const Eigen::MatrixXd L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();

  Likelihood out;
  out.value = -0.5 * y.dot(alpha) - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd W = alpha * alpha.transpose() - Kinv;
  const Eigen::Index dims = X.cols();
  out.gradient = Eigen::VectorXd::Zero(dims + 2);

  const double trace_w = W.trace();
  out.gradient(0) = (W.array() * K.array()).sum() + kJitter * p.sigma * p.sigma * trace_w;
  for (Eigen::Index d = 0; d < dims; ++d) {
    const double inv_l2 = 1.0 / (p.length(d) * p.length(d));
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j + 1; i < n; ++i) {
        const double diff = X(i, d) - X(j, d);
        acc += W(i, j) * K(i, j) * diff * diff;
      }
    }
    // Off-diagonal pairs counted once above; symmetric contributions double them, the 1/2 cancels.
    out.gradient(d + 1) = acc * inv_l2;
  }
  out.gradient(dims + 1) = p.eta * p.eta * trace_w;
  return out;
}

GprModel GprModel::with_params(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GprParams& params,
                               bool standardize) {
  if (X.rows() != y.size() || X.rows() < 1) throw ContractError("GprModel: X and y sizes differ or are empty");
  GprModel m;
  m.mean_x_ = Eigen::VectorXd::Zero(X.cols());
  m.scale_x_ = Eigen::VectorXd::Ones(X.cols());
  if (standardize) {
    m.mean_x_ = X.colwise().mean();
    for (Eigen::Index d = 0; d < X.cols(); ++d) {
      const double var = (X.col(d).array() - m.mean_x_(d)).square().mean();
      m.scale_x_(d) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
  }
  m.X_ = (X.rowwise() - m.mean_x_.transpose()).array().rowwise() / m.scale_x_.transpose().array();
  m.y_mean_ = y.mean();
  m.y_ = y.array() - m.y_mean_;
  m.params_ = params;
  m.factorize();
  return m;
}

void GprModel::factorize() {
  if (params_.length.size() != X_.cols()) throw ContractError("GprModel: lengthscale dimension mismatch");
  Eigen::MatrixXd Ky = kernel_matrix(X_, params_);
  Ky.diagonal().array() += diagonal_load(params_);
  llt_.compute(Ky);
  if (llt_.info() != Eigen::Success) {
    throw std::runtime_error("kernel matrix is not positive definite after jitter; increase the jitter");
  }
  alpha_ = llt_.solve(y_);
  fitted_ = true;
}

double GprModel::log_likelihood() const {
  if (!fitted_) throw ContractError("GprModel: model is not fitted");
  return log_marginal_likelihood(X_, y_, params_).value;
}

GprModel GprModel::fit(const Eigen::MatrixXd& X_in, const Eigen::VectorXd& y_in, const FitOptions& opt,
                       FitDiagnostics* diag) {
  if (X_in.rows() != y_in.size() || X_in.rows() < 2) throw ContractError("GprModel::fit: need at least two rows");
  if (!X_in.allFinite() || !y_in.allFinite()) throw DataError("GprModel::fit: non-finite training data");

  Eigen::MatrixXd X = X_in;
  Eigen::VectorXd y = y_in;
  if (static_cast<std::size_t>(X.rows()) > opt.max_rows) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(X.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(opt.seed);
    std::vector<Eigen::Index> keep;
    std::sample(idx.begin(), idx.end(), std::back_inserter(keep), opt.max_rows, rng);
    X = X_in(keep, Eigen::all);
    y = y_in(keep);
  }

  const Eigen::Index dims = X.cols();
  const double y_std = std::sqrt((y.array() - y.mean()).square().mean());
  const double scale = y_std > 0.0 ? y_std : 1.0;

  GprParams init;
  if (opt.init) {
    init = *opt.init;
  } else {
    init.sigma = scale;
    init.length = Eigen::VectorXd::Ones(dims);
    init.eta = 0.1 * scale;
  }
  GprModel model = with_params(X, y, init);
  if (y_std == 0.0) return model;  // constant targets: the mean predictor is exact

  const auto bounds = log_bounds(static_cast<std::size_t>(dims), scale);
  auto project = [&](Eigen::VectorXd t) { return t.cwiseMax(bounds.lo).cwiseMin(bounds.hi); };

  Eigen::VectorXd theta = project(init.to_log());
  auto eval = [&](const Eigen::VectorXd& t) -> std::optional<Likelihood> {
    try {
      auto l = log_marginal_likelihood(model.X_, model.y_, GprParams::from_log(t));
      if (!std::isfinite(l.value) || !l.gradient.allFinite()) return std::nullopt;
      return l;
    } catch (const std::runtime_error&) {
      return std::nullopt;
    }
  };
  auto current = eval(theta);
  if (!current) throw std::runtime_error("GprModel::fit: likelihood is not finite at the initial parameters");

  FitDiagnostics local;
  local.trace.push_back(current->value);
  double step = opt.step;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    // Drop components pinned at a bound and pointing outward.
    Eigen::VectorXd g = current->gradient;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      if ((theta(k) <= bounds.lo(k) && g(k) < 0) || (theta(k) >= bounds.hi(k) && g(k) > 0)) g(k) = 0.0;
    }
    local.gradient_norm = g.norm();
    if (local.gradient_norm <= opt.grad_tol) break;

    bool accepted = false;
    for (int halving = 0; halving < 50; ++halving) {
      const Eigen::VectorXd cand = project(theta + step * g);
      const double predicted = g.dot(cand - theta);
      if (predicted <= 0.0) break;
      auto next = eval(cand);
      if (next && next->value >= current->value + 1e-4 * predicted) {
        theta = cand;
        current = next;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    local.trace.push_back(current->value);
  }
  local.iterations = it;

  model.params_ = GprParams::from_log(theta);
  model.factorize();
  if (diag) *diag = std::move(local);
  return model;
}

Prediction GprModel::predict(std::span<const double> x) const {
  if (!fitted_) throw ContractError("GprModel::predict: model is not fitted");
  if (x.size() != dims()) throw ContractError("GprModel::predict: feature dimension mismatch");
  Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
  for (std::size_t d = 0; d < x.size(); ++d) z(d) = (x[d] - mean_x_(d)) / scale_x_(d);
  Eigen::VectorXd ks(X_.rows());
  const std::span<const double> len(params_.length.data(), static_cast<std::size_t>(params_.length.size()));
  for (Eigen::Index i = 0; i < X_.rows(); ++i) {
    const Eigen::VectorXd row = X_.row(i);
    ks(i) = rbf_kernel(std::span<const double>(row.data(), x.size()), std::span<const double>(z.data(), x.size()),
                       params_.sigma, len);
  }
  Prediction p;
  p.mean = y_mean_ + ks.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(ks);
  p.variance = std::max(0.0, params_.sigma * params_.sigma - v.squaredNorm());
  return p;
}

nlohmann::json GprModel::to_json() const {
  if (!fitted_) throw ContractError("GprModel: cannot serialize an unfitted model");
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j;
  j["sigma"] = params_.sigma;
  j["length"] = vec(params_.length);
  j["eta"] = params_.eta;
  j["y_mean"] = y_mean_;
  j["feature_mean"] = vec(mean_x_);
  j["feature_scale"] = vec(scale_x_);
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < X_.rows(); ++i) rows.push_back(vec(X_.row(i).transpose()));
  j["X"] = std::move(rows);
  j["y"] = vec(y_);
  return j;
}

GprModel GprModel::from_json(const nlohmann::json& j) {
  auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  try {
    GprModel m;
    m.params_.sigma = j.at("sigma").get<double>();
    m.params_.length = vec(j.at("length"));
    m.params_.eta = j.at("eta").get<double>();
    m.y_mean_ = j.at("y_mean").get<double>();
    m.mean_x_ = vec(j.at("feature_mean"));
    m.scale_x_ = vec(j.at("feature_scale"));
    const auto& rows = j.at("X");
    const auto dims = m.mean_x_.size();
    m.X_.resize(static_cast<Eigen::Index>(rows.size()), dims);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = vec(rows[i]);
      if (r.size() != dims) throw DataError("GPR model: training row " + std::to_string(i) + " has wrong width");
      m.X_.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    m.y_ = vec(j.at("y"));
    if (m.y_.size() != m.X_.rows()) throw DataError("GPR model: X and y row counts differ");
    if (!(m.params_.sigma > 0 && m.params_.eta > 0 && (m.params_.length.array() > 0).all())) {
      throw DataError("GPR model: parameters must be positive");
    }
    m.factorize();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("GPR model: ") + e.what());
  }
}

}  // namespace fd
