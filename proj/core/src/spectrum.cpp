#include "spectral/spectrum.hpp"

#include <cmath>
#include <sstream>

#include "spectral/common.hpp"

namespace spectral {

namespace {

void check_unit(double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    std::ostringstream msg;
    msg << "spectrum argument " << u << " outside [0, 1]";
    throw DomainError(msg.str());
  }
}

}  // namespace

Spectrum::Spectrum(SpectrumKind kind, double param) : kind_(kind), param_(param) {
  switch (kind_) {
    case SpectrumKind::Exponential:
      norm_ = -std::expm1(-param_);
      upper_bound_ = param_ / norm_;
      // sigma' is increasing, so its sup on [0, 1] sits at u = 1.
      lipschitz_ = param_ * param_ / norm_;
      break;
    case SpectrumKind::Cvar:
      upper_bound_ = 1.0 / (1.0 - param_);
      lipschitz_ = std::nullopt;
      break;
    case SpectrumKind::Uniform:
      upper_bound_ = 1.0;
      lipschitz_ = 0.0;
      break;
  }
}

Spectrum Spectrum::exponential(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("exponential spectrum needs c > 0");
  return Spectrum(SpectrumKind::Exponential, c);
}

Spectrum Spectrum::cvar(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("CVaR spectrum needs beta in [0, 1)");
  return Spectrum(SpectrumKind::Cvar, beta);
}

Spectrum Spectrum::uniform() { return Spectrum(SpectrumKind::Uniform, 0.0); }

double Spectrum::eval(double u) const {
  check_unit(u);
  switch (kind_) {
    case SpectrumKind::Exponential:
      return param_ * std::exp(-param_ * (1.0 - u)) / norm_;
    case SpectrumKind::Cvar:
      return u > param_ ? upper_bound_ : 0.0;
    case SpectrumKind::Uniform:
      return 1.0;
  }
  return 0.0;
}

double Spectrum::eval_derivative(double u) const {
  check_unit(u);
  switch (kind_) {
    case SpectrumKind::Exponential:
      return param_ * param_ * std::exp(-param_ * (1.0 - u)) / norm_;
    case SpectrumKind::Cvar:
      throw UnsupportedError("the CVaR spectrum has no derivative at beta");
    case SpectrumKind::Uniform:
      return 0.0;
  }
  return 0.0;
}

double Spectrum::integral(double a, double b) const {
  check_unit(a);
  check_unit(b);
  if (b < a) throw DomainError("spectrum integral needs a <= b");
  switch (kind_) {
    case SpectrumKind::Exponential:
      // exp(-c(1-b)) - exp(-c(1-a)) = exp(-c(1-b)) * (1 - exp(-c(b-a)))
      return -std::exp(-param_ * (1.0 - b)) * std::expm1(-param_ * (b - a)) / norm_;
    case SpectrumKind::Cvar:
      return (std::max(b, param_) - std::max(a, param_)) * upper_bound_;
    case SpectrumKind::Uniform:
      return b - a;
  }
  return 0.0;
}

std::vector<double> Spectrum::breakpoints() const {
  if (kind_ == SpectrumKind::Cvar) return {param_};
  return {};
}

std::string Spectrum::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case SpectrumKind::Exponential:
      out << "exponential(c=" << param_ << ")";
      break;
    case SpectrumKind::Cvar:
      out << "cvar(beta=" << param_ << ")";
      break;
    case SpectrumKind::Uniform:
      out << "uniform";
      break;
  }
  return out.str();
}

}  // namespace spectral
