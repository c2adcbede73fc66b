#include "spectral/boost.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "spectral/dist.hpp"

namespace spectral {

std::size_t candidates_k(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("candidates_k: delta must lie in (0, 1)");
  const double inner = std::ceil(std::log(1.0 / delta));
  const double k = std::ceil(std::log(2.0 * std::max(inner, 1.0)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

BoostPlan BoostPlan::make(std::size_t n, std::size_t k) {
  if (k == 0) throw DomainError("BoostPlan: k must be positive");
  BoostPlan plan;
  plan.k = k;
  plan.per_candidate_budget = n / (k + 1);
  plan.holdout_cdf_size = plan.per_candidate_budget / 2;
  plan.holdout_estimate_size = plan.holdout_cdf_size;
  if (plan.holdout_cdf_size == 0) {
    std::ostringstream msg;
    msg << "budget n = " << n << " is too small to boost over k = " << k << " candidates";
    throw BudgetError(msg.str());
  }
  return plan;
}

double validate_candidate(std::span<const double> w, std::span<const Example> cdf_half,
                          std::span<const Example> estimate_half, const LossModel& model,
                          const Spectrum& spec, const CatoniConfig& cfg) {
  if (cdf_half.empty() || estimate_half.empty())
    throw DomainError("validate_candidate: both holdout halves must be nonempty");
  const auto cdf = EmpiricalCdf::fit(losses_on(model, w, cdf_half));
  std::vector<double> weighted;
  weighted.reserve(estimate_half.size());
  for (const auto& z : estimate_half) {
    const double l = model.loss(w, z);
    weighted.push_back(weighted_loss(l, cdf.eval(l), spec));
  }
  return catoni_estimate(weighted, cfg);
}

CatoniConfig validation_catoni_config(std::span<const double> cdf_losses, const Spectrum& spec,
                                      std::size_t n_estimate, double delta) {
  if (cdf_losses.empty()) throw DomainError("validation_catoni_config: empty loss sample");
  double second = 0.0;
  for (double l : cdf_losses) second += l * l;
  second /= static_cast<double>(cdf_losses.size());
  const double bound = spec.upper_bound() * spec.upper_bound() * second;
  CatoniConfig cfg;
  // All-zero losses give a zero bound; any positive scale then returns 0.
  cfg.scale_b = bound > 0.0 ? catoni_default_scale(bound, n_estimate, delta) : 1.0;
  return cfg;
}

Selection boost_select(std::span<const ParamVector> candidates, std::span<const double> estimates) {
  if (candidates.empty()) throw DomainError("boost_select: no candidates");
  if (candidates.size() != estimates.size())
    throw DomainError("boost_select: one estimate per candidate required");
  const auto best = static_cast<std::size_t>(std::min_element(estimates.begin(), estimates.end()) -
                                             estimates.begin());
  return {best, candidates[best]};
}

BoostResult run_boosted(const LossModel& model, std::span<const Example> data, const Spectrum& spec,
                        const MirrorGeometry& geom, const RunConfig& cfg, double delta,
                        const ParamVector& w0, std::size_t jobs) {
  cfg.validate();
  BoostResult out;
  out.plan = BoostPlan::make(data.size(), candidates_k(delta));
  const BoostPlan& plan = out.plan;
  const std::size_t share = plan.per_candidate_budget;

  out.candidates.resize(plan.k);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < plan.k; j = next++) {
      RunConfig cj = cfg;
      cj.method = Method::Default;
      cj.seed = derive_seed(cfg.seed, j);
      SequenceSource source(data.subspan(j * share, share));
      out.candidates[j] = run_algorithm1(model, source, spec, geom, cj, share, w0).averaged;
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < std::min(jobs, plan.k); ++i) pool.emplace_back(worker);
    worker();
  }

  const auto cdf_half = data.subspan(plan.k * share, plan.holdout_cdf_size);
  const auto estimate_half = data.subspan(plan.k * share + plan.holdout_cdf_size,
                                          plan.holdout_estimate_size);
  for (const auto& w : out.candidates) {
    const auto cdf_losses = losses_on(model, w, cdf_half);
    double second = 0.0;
    for (double l : cdf_losses) second += l * l;
    out.s2 = std::max(out.s2, std::sqrt(second / static_cast<double>(cdf_losses.size())));
    const CatoniConfig catoni =
        validation_catoni_config(cdf_losses, spec, plan.holdout_estimate_size, delta);
    out.catoni_scales.push_back(catoni.scale_b);
    out.estimates.push_back(validate_candidate(w, cdf_half, estimate_half, model, spec, catoni));
  }
  out.selected = boost_select(out.candidates, out.estimates);

  double lambda = 0.0;
  if (const auto l = spec.lipschitz()) {
    lambda = *l;
  } else {
    out.warnings.push_back(
        "spectrum has no Lipschitz constant; the epsilon2 CDF term is reported as zero");
  }
  if (out.s2 > 0.0)
    out.epsilon2 = epsilon2_bound(spec.upper_bound(), lambda, out.s2, data.size(), plan.k, delta);
  return out;
}

}  // namespace spectral
