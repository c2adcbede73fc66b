#pragma once

#include <optional>
#include <string>
#include <vector>

namespace spectral {

enum class SpectrumKind { Exponential, Cvar, Uniform };

/// A risk spectrum: a non-negative, non-decreasing density on [0, 1] that
/// integrates to one. Immutable after construction.
///
/// The Lipschitz constant is `std::nullopt` for CVaR, whose density jumps at
/// beta; step-size rules that need it must refuse such spectra.
class Spectrum {
 public:
  /// sigma(u) = c exp(-c (1 - u)) / (1 - exp(-c)), c > 0.
  static Spectrum exponential(double c);
  /// sigma(u) = 1{beta < u <= 1} / (1 - beta), 0 <= beta < 1.
  static Spectrum cvar(double beta);
  /// sigma(u) = 1; the spectral risk reduces to the expected loss.
  static Spectrum uniform();

  SpectrumKind kind() const noexcept { return kind_; }
  double param() const noexcept { return param_; }
  std::optional<double> lipschitz() const noexcept { return lipschitz_; }
  double upper_bound() const noexcept { return upper_bound_; }
  bool differentiable() const noexcept { return kind_ != SpectrumKind::Cvar; }

  double eval(double u) const;
  double eval_derivative(double u) const;

  /// Closed-form integral of sigma over [a, b], 0 <= a <= b <= 1.
  double integral(double a, double b) const;

  /// Points of [0, 1] where sigma jumps (empty for smooth kinds).
  std::vector<double> breakpoints() const;

  std::string describe() const;

 private:
  Spectrum(SpectrumKind kind, double param);

  SpectrumKind kind_;
  double param_;
  double norm_ = 1.0;  // 1 - exp(-c) for Exponential
  std::optional<double> lipschitz_;
  double upper_bound_ = 1.0;
};

}  // namespace spectral
