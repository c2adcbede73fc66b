#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spectral/common.hpp"

namespace spectral {

/// One observation. Classification tasks use `label`; the synthetic
/// regression losses read the real-valued `target`.
struct Example {
  std::vector<double> features;
  int label = 0;
  double target = 0.0;

  friend bool operator==(const Example&, const Example&) = default;
};

enum class LossKind {
  MulticlassLogistic,  // cross-entropy over K linear scores
  SyntheticLinear,     // |<w, x> - y|
  SyntheticQuadratic,  // (<w, x> - y)^2 / 2
};

/// A loss l(w; z) with its exact gradient. Pure and thread-safe.
///
/// Logistic parameters are laid out class-major: w[k * p + j] is the weight of
/// feature j in the score of class k. Every class has its own linear model.
class LossModel {
 public:
  static LossModel logistic(std::size_t n_classes, std::size_t n_features);
  static LossModel linear_abs(std::size_t n_features);
  static LossModel quadratic(std::size_t n_features);

  LossKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_classes() const noexcept { return n_classes_; }

  double loss(std::span<const double> w, const Example& z) const;
  ParamVector gradient(std::span<const double> w, const Example& z) const;
  /// Writes the gradient into `out` (size dim()) and returns the loss.
  double loss_and_gradient(std::span<const double> w, const Example& z,
                           std::span<double> out) const;

  /// Argmax score, lowest class index on ties. Logistic only.
  int predict(std::span<const double> w, const Example& z) const;

 private:
  LossModel(LossKind kind, std::size_t n_classes, std::size_t n_features);
  void check(std::span<const double> w, const Example& z) const;
  void logits(std::span<const double> w, const Example& z, std::span<double> out) const;

  LossKind kind_;
  std::size_t n_classes_;
  std::size_t n_features_;
  std::size_t dim_;
};

/// Fraction of examples whose predicted class differs from the label.
double misclassification_rate(const LossModel& model, std::span<const double> w,
                              std::span<const Example> data);

/// Loss of w on every example.
std::vector<double> losses_on(const LossModel& model, std::span<const double> w,
                              std::span<const Example> data);

}  // namespace spectral
