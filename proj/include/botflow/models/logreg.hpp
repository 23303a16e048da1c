#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "botflow/models/common.hpp"

namespace botflow::models {

/// L1-regularized logistic regression on z-scored features. The
/// standardization statistics come from the training data and travel
/// with the model.
struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> mean;
  std::vector<double> stdev;
};

LogRegModel train_logreg(const Dataset& data, const HyperParams& params);

std::vector<double> predict_logreg(const LogRegModel& model, const double* x,
                                   std::size_t n, std::size_t d);

/// Mean logistic loss and gradient of the smooth (unpenalized) part at
/// (weights, bias) on already-standardized features; exposed for the
/// finite-difference checks.
double logistic_loss(const Dataset& data, std::span<const double> weights,
                     double bias, std::span<const double> sample_weight);
void logistic_loss_grad(const Dataset& data, std::span<const double> weights,
                        double bias, std::span<const double> sample_weight,
                        std::span<double> grad_out, double& bias_grad_out);

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace botflow::models
