#include "botflow/models/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace botflow::models {

namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// Largest eigenvalue of Z^T Z by power iteration (deterministic start).
double power_iteration_sq_norm(const std::vector<double>& z, std::size_t n,
                               std::size_t d) {
  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  std::vector<double> zv(n), ztzv(d);
  double lambda = 0.0;
  for (int iter = 0; iter < 60; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      const double* row = z.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) s += row[j] * v[j];
      zv[i] = s;
    }
    std::fill(ztzv.begin(), ztzv.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = z.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) ztzv[j] += row[j] * zv[i];
    }
    double norm = 0;
    for (double x : ztzv) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 1.0;
    lambda = norm;
    for (std::size_t j = 0; j < d; ++j) v[j] = ztzv[j] / norm;
  }
  return lambda;
}

}  // namespace

double logistic_loss(const Dataset& data, std::span<const double> weights,
                     double bias, std::span<const double> sample_weight) {
  double loss = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    double z = bias;
    for (std::size_t j = 0; j < data.d; ++j) z += weights[j] * data.at(i, j);
    // log(1 + exp(-m)) with m = (2y-1) z, numerically stable
    double m = (data.y[i] ? 1.0 : -1.0) * z;
    double l = m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    loss += sample_weight[i] * l;
    wsum += sample_weight[i];
  }
  return loss / wsum;
}

void logistic_loss_grad(const Dataset& data, std::span<const double> weights,
                        double bias, std::span<const double> sample_weight,
                        std::span<double> grad_out, double& bias_grad_out) {
  std::fill(grad_out.begin(), grad_out.end(), 0.0);
  bias_grad_out = 0.0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    double z = bias;
    for (std::size_t j = 0; j < data.d; ++j) z += weights[j] * data.at(i, j);
    double r = sample_weight[i] * (sigmoid(z) - data.y[i]);
    for (std::size_t j = 0; j < data.d; ++j) grad_out[j] += r * data.at(i, j);
    bias_grad_out += r;
    wsum += sample_weight[i];
  }
  for (auto& g : grad_out) g /= wsum;
  bias_grad_out /= wsum;
}

LogRegModel train_logreg(const Dataset& data, const HyperParams& params) {
  const std::size_t n = data.n, d = data.d;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) pos += data.y[i];
  if (pos == 0 || pos == n)
    throw std::invalid_argument("logreg requires both classes in the training data");

  LogRegModel model;
  model.mean.assign(d, 0.0);
  model.stdev.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += data.at(i, j);
  for (auto& m : model.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double c = data.at(i, j) - model.mean[j];
      model.stdev[j] += c * c;
    }
  for (auto& s : model.stdev) {
    s = std::sqrt(s / static_cast<double>(n));
    if (s < 1e-12) s = 1.0;  // constant column
  }

  std::vector<double> z(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      z[i * d + j] = (data.at(i, j) - model.mean[j]) / model.stdev[j];

  std::vector<double> sample_weight(n, 1.0);
  if (params.class_weighted) {
    double wp = static_cast<double>(n) / (2.0 * static_cast<double>(pos));
    double wn = static_cast<double>(n) / (2.0 * static_cast<double>(n - pos));
    for (std::size_t i = 0; i < n; ++i) sample_weight[i] = data.y[i] ? wp : wn;
  }
  double wsum = 0.0;
  for (double w : sample_weight) wsum += w;

  // FISTA with a fixed step from the Lipschitz bound of the mean
  // logistic loss, lambda_max(Z^T Z) / (4 sum w); +1 covers the bias
  // coordinate.
  double lmax = power_iteration_sq_norm(z, n, d);
  double wmax = *std::max_element(sample_weight.begin(), sample_weight.end());
  double lipschitz = (lmax + static_cast<double>(n)) * wmax / (4.0 * wsum);
  double step = 1.0 / lipschitz;
  const double lambda = params.l1_strength;
  const double tol = 1e-6;
  const int max_iter = 10000;

  std::vector<double> w(d, 0.0), w_prev(d, 0.0), yk(d, 0.0);
  double b = std::log(static_cast<double>(pos) / static_cast<double>(n - pos));
  double b_prev = b, yb = b;
  double t = 1.0;

  std::vector<double> zscore(n), grad(d);
  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = yb;
      const double* row = z.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) s += row[j] * yk[j];
      zscore[i] = sample_weight[i] * (sigmoid(s) - data.y[i]);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    double bias_grad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = z.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) grad[j] += zscore[i] * row[j];
      bias_grad += zscore[i];
    }
    for (auto& g : grad) g /= wsum;
    bias_grad /= wsum;

    w_prev.swap(w);
    b_prev = b;
    double move_sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      w[j] = soft_threshold(yk[j] - step * grad[j], step * lambda);
      double delta = w[j] - yk[j];
      move_sq += delta * delta;
    }
    b = yb - step * bias_grad;
    move_sq += (b - yb) * (b - yb);

    // composite gradient-map norm
    if (std::sqrt(move_sq) * lipschitz <= tol) break;

    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double momentum = (t - 1.0) / t_next;
    for (std::size_t j = 0; j < d; ++j) yk[j] = w[j] + momentum * (w[j] - w_prev[j]);
    yb = b + momentum * (b - b_prev);
    t = t_next;
  }

  model.weights = std::move(w);
  model.bias = b;
  return model;
}

std::vector<double> predict_logreg(const LogRegModel& model, const double* x,
                                   std::size_t n, std::size_t d) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = model.bias;
    const double* row = x + i * d;
    for (std::size_t j = 0; j < d; ++j)
      z += model.weights[j] * (row[j] - model.mean[j]) / model.stdev[j];
    out[i] = sigmoid(z);
  }
  return out;
}

}  // namespace botflow::models
