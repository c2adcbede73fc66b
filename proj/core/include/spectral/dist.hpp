#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spectral {

double normal_cdf(double x);
double normal_pdf(double x);

/// Right-continuous step function F(u) = #{i : x_i <= u} / m.
class EmpiricalCdf {
 public:
  /// Throws DomainError on empty input.
  static EmpiricalCdf fit(std::span<const double> losses);

  double eval(double u) const;

  std::size_t size() const noexcept { return sorted_.size(); }
  const std::vector<double>& sorted_values() const noexcept { return sorted_; }

 private:
  explicit EmpiricalCdf(std::vector<double> sorted) : sorted_(std::move(sorted)) {}
  std::vector<double> sorted_;
};

/// Distribution of |X| for X ~ N(mu, s^2). `mu` and `s` parameterize the
/// normal before folding and are fit by the sample mean and standard
/// deviation of the observed losses.
class FoldedNormalCdf {
 public:
  static constexpr double kMinScale = 1e-12;

  FoldedNormalCdf(double mu, double s);

  /// Needs at least two losses. A scale below kMinScale is clamped.
  static FoldedNormalCdf fit(std::span<const double> losses);

  double mu() const noexcept { return mu_; }
  double scale() const noexcept { return s_; }

  /// Phi((u - mu)/s) - Phi((-u - mu)/s) for u >= 0, zero below.
  double eval(double u) const;
  /// [phi((u - mu)/s) + phi((u + mu)/s)] / s for u >= 0, zero below.
  double density(double u) const;

 private:
  double mu_;
  double s_;
};

/// Half-width of the two-sided DKW band: sqrt(log(2/delta) / (2m)).
double dkw_band(std::size_t m, double delta);

}  // namespace spectral
