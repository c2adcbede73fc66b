#include "spectral/losses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spectral {

LossModel::LossModel(LossKind kind, std::size_t n_classes, std::size_t n_features)
    : kind_(kind), n_classes_(n_classes), n_features_(n_features),
      dim_(kind == LossKind::MulticlassLogistic ? n_classes * n_features : n_features) {
  if (n_features == 0) throw DomainError("LossModel: need at least one feature");
  if (kind == LossKind::MulticlassLogistic && n_classes < 2)
    throw DomainError("LossModel: logistic model needs at least two classes");
}

LossModel LossModel::logistic(std::size_t n_classes, std::size_t n_features) {
  return LossModel(LossKind::MulticlassLogistic, n_classes, n_features);
}

LossModel LossModel::linear_abs(std::size_t n_features) {
  return LossModel(LossKind::SyntheticLinear, 0, n_features);
}

LossModel LossModel::quadratic(std::size_t n_features) {
  return LossModel(LossKind::SyntheticQuadratic, 0, n_features);
}

void LossModel::check(std::span<const double> w, const Example& z) const {
  if (w.size() != dim_ || z.features.size() != n_features_) {
    std::ostringstream msg;
    msg << "LossModel: dimension mismatch (w " << w.size() << " vs " << dim_ << ", x "
        << z.features.size() << " vs " << n_features_ << ")";
    throw DomainError(msg.str());
  }
  if (kind_ == LossKind::MulticlassLogistic &&
      (z.label < 0 || static_cast<std::size_t>(z.label) >= n_classes_))
    throw DomainError("LossModel: label out of range");
}

void LossModel::logits(std::span<const double> w, const Example& z, std::span<double> out) const {
  for (std::size_t k = 0; k < n_classes_; ++k)
    out[k] = vec::dot(w.subspan(k * n_features_, n_features_), z.features);
}

double LossModel::loss(std::span<const double> w, const Example& z) const {
  check(w, z);
  switch (kind_) {
    case LossKind::MulticlassLogistic: {
      std::vector<double> s(n_classes_);
      logits(w, z, s);
      const auto top = std::max_element(s.begin(), s.end());
      double rest = 0.0;  // sum of exp(s_k - top) over k != argmax
      for (auto it = s.begin(); it != s.end(); ++it)
        if (it != top) rest += std::exp(*it - *top);
      return std::max(0.0, *top - s[static_cast<std::size_t>(z.label)] + std::log1p(rest));
    }
    case LossKind::SyntheticLinear:
      return std::abs(vec::dot(w, z.features) - z.target);
    case LossKind::SyntheticQuadratic: {
      const double r = vec::dot(w, z.features) - z.target;
      return 0.5 * r * r;
    }
  }
  return 0.0;
}

double LossModel::loss_and_gradient(std::span<const double> w, const Example& z,
                                    std::span<double> out) const {
  check(w, z);
  if (out.size() != dim_) throw DomainError("LossModel: gradient buffer has wrong size");
  switch (kind_) {
    case LossKind::MulticlassLogistic: {
      std::vector<double> s(n_classes_);
      logits(w, z, s);
      const auto y = static_cast<std::size_t>(z.label);
      const auto top_it = std::max_element(s.begin(), s.end());
      const auto top_k = static_cast<std::size_t>(top_it - s.begin());
      const double top = *top_it;
      const double margin = top - s[y];
      double sum = 0.0;
      double rest = 0.0;
      for (std::size_t k = 0; k < n_classes_; ++k) {
        s[k] = std::exp(s[k] - top);
        sum += s[k];
        if (k != top_k) rest += s[k];
      }
      const double loss = std::max(0.0, margin + std::log1p(rest));
      for (std::size_t k = 0; k < n_classes_; ++k) {
        const double coef = s[k] / sum - (k == y ? 1.0 : 0.0);
        for (std::size_t j = 0; j < n_features_; ++j) out[k * n_features_ + j] = coef * z.features[j];
      }
      return loss;
    }
    case LossKind::SyntheticLinear: {
      const double r = vec::dot(w, z.features) - z.target;
      const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      for (std::size_t j = 0; j < n_features_; ++j) out[j] = sign * z.features[j];
      return std::abs(r);
    }
    case LossKind::SyntheticQuadratic: {
      const double r = vec::dot(w, z.features) - z.target;
      for (std::size_t j = 0; j < n_features_; ++j) out[j] = r * z.features[j];
      return 0.5 * r * r;
    }
  }
  return 0.0;
}

ParamVector LossModel::gradient(std::span<const double> w, const Example& z) const {
  ParamVector g(dim_);
  loss_and_gradient(w, z, g);
  return g;
}

int LossModel::predict(std::span<const double> w, const Example& z) const {
  if (kind_ != LossKind::MulticlassLogistic)
    throw UnsupportedError("predict: only defined for the logistic model");
  if (w.size() != dim_ || z.features.size() != n_features_)
    throw DomainError("predict: dimension mismatch");
  std::vector<double> s(n_classes_);
  logits(w, z, s);
  // max_element returns the first maximum, i.e. the lowest index on ties.
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

double misclassification_rate(const LossModel& model, std::span<const double> w,
                              std::span<const Example> data) {
  if (model.kind() != LossKind::MulticlassLogistic)
    throw UnsupportedError("misclassification_rate: only defined for the logistic model");
  if (data.empty()) throw DomainError("misclassification_rate: empty data");
  std::size_t wrong = 0;
  for (const auto& z : data) wrong += model.predict(w, z) != z.label ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

std::vector<double> losses_on(const LossModel& model, std::span<const double> w,
                              std::span<const Example> data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& z : data) out.push_back(model.loss(w, z));
  return out;
}

}  // namespace spectral
