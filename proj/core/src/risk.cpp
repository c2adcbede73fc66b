#include "spectral/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectral/sampling.hpp"

namespace spectral {

double weighted_loss(double loss_value, double cdf_at_loss, const Spectrum& spec) {
  return loss_value * spec.eval(cdf_at_loss);
}

std::vector<double> plugin_weights(std::size_t n, const Spectrum& spec) {
  if (n == 0) throw DomainError("plugin_weights: empty sample");
  std::vector<double> w(n);
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / nn;
    const double hi = i + 1 == n ? 1.0 : static_cast<double>(i + 1) / nn;
    w[i] = spec.integral(lo, hi);
  }
  return w;
}

double plugin_spectral_risk(std::span<const double> losses, const Spectrum& spec) {
  if (losses.empty()) throw DomainError("plugin_spectral_risk: empty sample");
  std::vector<double> sorted(losses.begin(), losses.end());
  std::sort(sorted.begin(), sorted.end());
  const auto weights = plugin_weights(sorted.size(), spec);
  return std::inner_product(sorted.begin(), sorted.end(), weights.begin(), 0.0);
}

double smoothed_spectral_risk_mc(std::span<const double> w, double delta, const Spectrum& spec,
                                 const LossSampler& sampler, std::size_t n_ball,
                                 std::size_t n_loss, Rng& rng) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("smoothed risk: delta must lie in (0, 1)");
  if (n_ball == 0 || n_loss == 0) throw DomainError("smoothed risk: sample counts must be positive");
  std::vector<double> losses(n_loss);
  ParamVector shifted(w.size());
  double total = 0.0;
  for (std::size_t b = 0; b < n_ball; ++b) {
    const ParamVector v = sample_ball(w.size(), rng);
    for (std::size_t i = 0; i < w.size(); ++i) shifted[i] = w[i] + delta * v[i];
    for (double& l : losses) l = sampler(shifted, rng);
    total += plugin_spectral_risk(losses, spec);
  }
  return total / static_cast<double>(n_ball);
}

double catoni_psi(double u) {
  const double a = std::abs(u);
  const double v = std::log1p(a + 0.5 * a * a);
  return u < 0.0 ? -v : v;
}

namespace {

double catoni_objective(std::span<const double> x, double a, double b) {
  double s = 0.0;
  for (double xi : x) s += catoni_psi((a - xi) / b);
  return s;
}

}  // namespace

double catoni_estimate(std::span<const double> samples, const CatoniConfig& cfg) {
  if (samples.empty()) throw DomainError("catoni_estimate: empty sample");
  if (!(cfg.scale_b > 0.0)) throw DomainError("catoni_estimate: scale must be positive");
  if (!(cfg.tol > 0.0) || cfg.max_iters <= 0) throw DomainError("catoni_estimate: bad tolerance");

  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo_x = *min_it;
  const double hi_x = *max_it;
  if (lo_x == hi_x) return lo_x;

  // The objective increases in a: negative at lo, positive at hi.
  double lo = lo_x - cfg.scale_b;
  double hi = hi_x + cfg.scale_b;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = catoni_objective(samples, mid, cfg.scale_b);
    if (std::abs(f) <= cfg.tol || mid <= lo || mid >= hi) return std::clamp(mid, lo_x, hi_x);
    (f < 0.0 ? lo : hi) = mid;
  }
  throw std::runtime_error("catoni_estimate: bisection did not converge");
}

double catoni_default_scale(double variance_bound, std::size_t n, double delta) {
  if (!(variance_bound > 0.0)) throw DomainError("catoni_default_scale: variance bound must be positive");
  if (n == 0) throw DomainError("catoni_default_scale: n must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("catoni_default_scale: delta must lie in (0, 1)");
  return std::sqrt(static_cast<double>(n) * variance_bound /
                   (2.0 * (1.0 + std::log(2.0 / delta))));
}

double epsilon2_bound(double sigma_bar, double lambda_sigma, double s2, std::size_t n,
                      std::size_t k, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("epsilon2_bound: delta must lie in (0, 1)");
  if (!(sigma_bar > 0.0) || lambda_sigma < 0.0 || !(s2 > 0.0))
    throw DomainError("epsilon2_bound: constants must be positive");
  const std::size_t m = n / (k + 1);
  if (m == 0) throw DomainError("epsilon2_bound: floor(n/(k+1)) is zero");
  const double mm = static_cast<double>(m);
  return 2.0 * sigma_bar * s2 * std::sqrt(2.0 * (1.0 + std::log(2.0 / delta)) / mm) +
         lambda_sigma * s2 * std::sqrt(std::log(4.0 / delta) / mm);
}

}  // namespace spectral
