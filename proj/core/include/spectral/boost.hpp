#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spectral/losses.hpp"
#include "spectral/optim.hpp"
#include "spectral/risk.hpp"
#include "spectral/spectrum.hpp"

namespace spectral {

/// k = ceil(log(2 ceil(log(1/delta)))), at least 1.
std::size_t candidates_k(double delta);

/// How a budget of n draws is divided among k candidates and the two
/// validation halves. Leftover points are discarded.
struct BoostPlan {
  std::size_t k = 1;
  std::size_t per_candidate_budget = 0;  // floor(n / (k + 1))
  std::size_t holdout_cdf_size = 0;      // floor(per_candidate_budget / 2)
  std::size_t holdout_estimate_size = 0;

  static BoostPlan make(std::size_t n, std::size_t k);
  std::size_t total() const noexcept {
    return k * per_candidate_budget + holdout_cdf_size + holdout_estimate_size;
  }
};

/// Robust estimate of the spectral risk of w: an ECDF of w's losses on
/// `cdf_half` weights each loss of `estimate_half`, and the Catoni estimator
/// locates the weighted losses.
double validate_candidate(std::span<const double> w, std::span<const Example> cdf_half,
                          std::span<const Example> estimate_half, const LossModel& model,
                          const Spectrum& spec, const CatoniConfig& cfg);

/// Catoni scale from the variance bound sbar^2 s2^2, with s2^2 the second
/// moment of `cdf_losses`.
CatoniConfig validation_catoni_config(std::span<const double> cdf_losses, const Spectrum& spec,
                                      std::size_t n_estimate, double delta);

struct Selection {
  std::size_t index = 0;
  ParamVector w;
};

/// Argmin of the estimates, lowest index on ties.
Selection boost_select(std::span<const ParamVector> candidates, std::span<const double> estimates);

struct BoostResult {
  BoostPlan plan;
  std::vector<ParamVector> candidates;
  std::vector<double> estimates;
  std::vector<double> catoni_scales;
  Selection selected;
  double s2 = 0.0;        // largest sqrt second moment seen on the CDF half
  double epsilon2 = 0.0;  // validation error bound at the given delta
  std::vector<std::string> warnings;
};

/// Confidence boosting over the derivative-free method. `data` is the whole
/// budget (n = data.size()); candidate j trains on the j-th share, then the
/// next two blocks serve as the CDF and estimate halves. Candidates run on up to
/// `jobs` threads with generators derived from cfg.seed, so results do not
/// depend on scheduling.
BoostResult run_boosted(const LossModel& model, std::span<const Example> data,
                        const Spectrum& spec, const MirrorGeometry& geom, const RunConfig& cfg,
                        double delta, const ParamVector& w0, std::size_t jobs = 1);

}  // namespace spectral
