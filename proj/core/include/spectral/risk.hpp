#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "spectral/common.hpp"
#include "spectral/spectrum.hpp"

namespace spectral {

/// loss * sigma(F(loss)); the per-sample estimator of the spectral risk.
double weighted_loss(double loss_value, double cdf_at_loss, const Spectrum& spec);

/// Weights W_i = integral of sigma over [(i-1)/n, i/n], applied to the i-th
/// smallest loss. They sum to one.
std::vector<double> plugin_weights(std::size_t n, const Spectrum& spec);

/// L-statistic plug-in estimate of the spectral risk of a loss sample.
double plugin_spectral_risk(std::span<const double> losses, const Spectrum& spec);

/// Draws one loss value at parameter w.
using LossSampler = std::function<double(std::span<const double> w, Rng& rng)>;

/// Monte-Carlo estimate of E_V[S(w + delta V)], V uniform on the unit ball.
/// Each of the n_ball perturbations gets n_loss fresh loss draws whose plug-in
/// spectral risk is averaged.
double smoothed_spectral_risk_mc(std::span<const double> w, double delta,
                                 const Spectrum& spec, const LossSampler& sampler,
                                 std::size_t n_ball, std::size_t n_loss, Rng& rng);

struct CatoniConfig {
  double scale_b = 1.0;
  int max_iters = 200;
  double tol = 1e-10;
};

/// Catoni's narrowest influence function sign(u) log(1 + |u| + u^2/2).
double catoni_psi(double u);

/// Root of a -> sum_i psi((a - x_i)/b), found by bisection on
/// [min(x) - b, max(x) + b]. The result lies in [min(x), max(x)].
double catoni_estimate(std::span<const double> samples, const CatoniConfig& cfg);

/// b = sqrt(n v / (2 (1 + log(2/delta)))).
double catoni_default_scale(double variance_bound, std::size_t n, double delta);

/// Validation error bound for a candidate trained on floor(n/(k+1)) points:
///   2 sbar s2 sqrt(2(1 + log(2/delta)) / m) + lambda s2 sqrt(log(4/delta) / m).
double epsilon2_bound(double sigma_bar, double lambda_sigma, double s2, std::size_t n,
                      std::size_t k, double delta);

}  // namespace spectral
