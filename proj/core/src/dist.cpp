#include "spectral/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "spectral/common.hpp"

namespace spectral {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

EmpiricalCdf EmpiricalCdf::fit(std::span<const double> losses) {
  if (losses.empty()) throw DomainError("EmpiricalCdf::fit: empty sample");
  std::vector<double> sorted(losses.begin(), losses.end());
  std::sort(sorted.begin(), sorted.end());
  return EmpiricalCdf(std::move(sorted));
}

double EmpiricalCdf::eval(double u) const {
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), u) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

FoldedNormalCdf::FoldedNormalCdf(double mu, double s) : mu_(mu), s_(std::max(s, kMinScale)) {
  if (!std::isfinite(mu) || !std::isfinite(s)) throw DomainError("FoldedNormalCdf: non-finite parameter");
}

FoldedNormalCdf FoldedNormalCdf::fit(std::span<const double> losses) {
  if (losses.size() < 2) throw DomainError("FoldedNormalCdf::fit: need at least two losses");
  const double n = static_cast<double>(losses.size());
  const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : losses) ss += (x - mean) * (x - mean);
  return FoldedNormalCdf(mean, std::sqrt(ss / (n - 1.0)));
}

double FoldedNormalCdf::eval(double u) const {
  if (!(u > 0.0)) return 0.0;
  return normal_cdf((u - mu_) / s_) - normal_cdf((-u - mu_) / s_);
}

double FoldedNormalCdf::density(double u) const {
  if (u < 0.0) return 0.0;
  return (normal_pdf((u - mu_) / s_) + normal_pdf((u + mu_) / s_)) / s_;
}

double dkw_band(std::size_t m, double delta) {
  if (m == 0) throw DomainError("dkw_band: m must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("dkw_band: delta must lie in (0, 1)");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(m)));
}

}  // namespace spectral
