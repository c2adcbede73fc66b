#include "spectral/optim.hpp"

#include <cmath>
#include <sstream>

#include "spectral/sampling.hpp"

namespace spectral {

EuclideanBall::EuclideanBall(double radius) : radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("EuclideanBall: radius must be positive");
}

void EuclideanBall::step(std::span<double> w, std::span<const double> g, double alpha) const {
  vec::axpy(-alpha, g, w);
  project(w);
}

void EuclideanBall::project(std::span<double> w) const {
  const double r = vec::norm(w);
  if (r > radius_) vec::scale(radius_ / r, w);
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Default:
      return "default";
    case Method::Fast:
      return "fast";
    case Method::Off:
      return "off";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "default") return Method::Default;
  if (name == "fast") return Method::Fast;
  if (name == "off") return Method::Off;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected default, fast or off)");
}

GradientEstimate df_gradient_from_loss(double perturbed_loss, double cdf_at_loss,
                                       std::span<const double> direction, double delta,
                                       const Spectrum& spec) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("df_gradient: delta must lie in (0, 1)");
  const double d = static_cast<double>(direction.size());
  GradientEstimate g;
  g.source = GradientSource::DerivativeFree;
  g.loss = perturbed_loss;
  g.factor = (d / delta) * perturbed_loss * spec.eval(cdf_at_loss);
  g.value.assign(direction.begin(), direction.end());
  vec::scale(g.factor, g.value);
  return g;
}

GradientEstimate fast_gradient(std::span<const double> w, const Example& z, const LossModel& model,
                               const FoldedNormalCdf& cdf, const Spectrum& spec) {
  if (!spec.differentiable())
    throw UnsupportedError("fast gradient needs a differentiable spectrum (not CVaR)");
  GradientEstimate g;
  g.source = GradientSource::Fast;
  g.value.resize(model.dim());
  g.loss = model.loss_and_gradient(w, z, g.value);
  const double u = cdf.eval(g.loss);
  g.factor = spec.eval(u) + g.loss * spec.eval_derivative(u) * cdf.density(g.loss);
  vec::scale(g.factor, g.value);
  return g;
}

IterateState::IterateState(ParamVector w0) : w(std::move(w0)), running_sum(w.size(), 0.0) {}

ParamVector IterateState::averaged() const {
  if (t == 0) return w;
  ParamVector avg = running_sum;
  vec::scale(1.0 / static_cast<double>(t), avg);
  return avg;
}

IterateState mirror_step(IterateState state, const GradientEstimate& g, double alpha,
                         const MirrorGeometry& geom) {
  if (!(alpha > 0.0)) throw DomainError("mirror_step: step size must be positive");
  if (g.value.size() != state.w.size()) throw DomainError("mirror_step: gradient dimension mismatch");
  geom.step(state.w, g.value, alpha);
  ++state.t;
  vec::axpy(1.0, state.w, state.running_sum);
  return state;
}

namespace {

std::size_t ceil_sqrt(std::size_t n) {
  auto m = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (m * m > n) --m;
  while (m * m < n) ++m;
  return m;
}

}  // namespace

Budget allocate_budget(std::size_t n) {
  if (n < 4) throw BudgetError("allocate_budget: need n >= 4 samples");
  return allocate_budget(n, ceil_sqrt(n));
}

Budget allocate_budget(std::size_t n, std::size_t ancillary) {
  if (ancillary == 0) throw DomainError("allocate_budget: ancillary size must be positive");
  const std::size_t steps = n / (ancillary + 1);
  if (steps == 0) {
    std::ostringstream msg;
    msg << "budget of " << n << " draws cannot cover one step with M = " << ancillary;
    throw BudgetError(msg.str());
  }
  return {ancillary, steps};
}

double theory_step_size(const TheoryConstants& c, std::size_t steps, double delta_smooth,
                        std::size_t d) {
  if (!c.lambda_sigma) throw UnsupportedError("theory step size needs a Lipschitz spectrum");
  if (steps == 0 || d == 0) throw DomainError("theory step size: T and d must be positive");
  if (!(delta_smooth > 0.0 && delta_smooth < 1.0))
    throw DomainError("theory step size: delta must lie in (0, 1)");
  if (c.lambda_risk < 0.0 || !(c.mu > 0.0) || !(c.bregman_diameter > 0.0) || c.s1 < 0.0 ||
      c.s2 < 0.0 || *c.lambda_sigma < 0.0)
    throw DomainError("theory step size: constants must be positive");
  const double spread = c.s1 * c.s1 + std::pow(*c.lambda_sigma * c.s2, 2);
  if (!(spread > 0.0)) throw DomainError("theory step size: s1 and lambda_sigma * s2 both vanish");
  const double c_t = (delta_smooth / static_cast<double>(d)) *
                     std::sqrt(2.0 * c.bregman_diameter * c.mu / (static_cast<double>(steps) * spread));
  return c.mu / (c.lambda_risk + 1.0 / c_t);
}

double default_step_size(Method method, std::size_t n, std::size_t d, double gamma) {
  if (n == 0 || d == 0 || !(gamma > 0.0)) throw DomainError("default_step_size: inputs must be positive");
  const double root_n = std::sqrt(static_cast<double>(n));
  if (method == Method::Default) return 2.0 * gamma / (static_cast<double>(d) * root_n);
  return 2.0 / root_n;
}

GeneratorSource::GeneratorSource(Generator gen, std::uint64_t seed) : gen_(std::move(gen)), rng_(seed) {}

const Example& GeneratorSource::next(DrawRole) {
  current_ = gen_(rng_);
  return current_;
}

const Example& SequenceSource::next(DrawRole) {
  if (pos_ >= data_.size()) throw BudgetError("sample budget exhausted");
  return data_[pos_++];
}

EpochSource::EpochSource(std::span<const Example> data, std::uint64_t seed) : data_(data), rng_(seed) {
  if (data_.empty()) throw DomainError("EpochSource: empty data");
  order_.resize(data_.size());
  begin_epoch();
}

void EpochSource::begin_epoch() {
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  for (std::size_t i = order_.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order_[i], order_[pick(rng_)]);
  }
  pos_ = 0;
}

const Example& EpochSource::next(DrawRole) {
  if (pos_ >= order_.size()) begin_epoch();
  return data_[order_[pos_++]];
}

void RunConfig::validate() const {
  if (!(smoothing_delta > 0.0 && smoothing_delta < 1.0))
    throw DomainError("smoothing delta must lie in (0, 1)");
  if (ancillary_size && *ancillary_size < 2) throw DomainError("ancillary size must be at least 2");
  if (epochs == 0) throw DomainError("epochs must be positive");
  if (const double* a = std::get_if<double>(&step_size); a && !(*a > 0.0))
    throw DomainError("step size must be positive");
}

SpectralDescent::SpectralDescent(const LossModel& model, const Spectrum& spec,
                                 const MirrorGeometry& geom, Method method, double alpha,
                                 double smoothing_delta, std::size_t ancillary, ParamVector w0,
                                 std::uint64_t seed)
    : model_(model), spec_(spec), geom_(geom), method_(method), alpha_(alpha),
      delta_(smoothing_delta), ancillary_(ancillary), state_(std::move(w0)), rng_(seed) {
  if (state_.w.size() != model_.dim()) throw DomainError("SpectralDescent: initial point has wrong dimension");
  if (!(alpha_ > 0.0)) throw DomainError("SpectralDescent: step size must be positive");
  if (method_ == Method::Default && !(delta_ > 0.0 && delta_ < 1.0))
    throw DomainError("SpectralDescent: smoothing delta must lie in (0, 1)");
  if (method_ != Method::Off && ancillary_ < 2)
    throw DomainError("SpectralDescent: ancillary size must be at least 2");
  if (method_ == Method::Fast && !spec_.differentiable())
    throw UnsupportedError("fast method needs a differentiable spectrum (not CVaR)");
  geom_.project(state_.w);
  scratch_losses_.resize(method_ == Method::Off ? 0 : ancillary_);
}

std::size_t SpectralDescent::draws_per_step() const noexcept {
  return method_ == Method::Off ? 1 : ancillary_ + 1;
}

void SpectralDescent::step(ExampleSource& source) {
  for (double& l : scratch_losses_) l = model_.loss(state_.w, source.draw(DrawRole::Ancillary));

  GradientEstimate g;
  switch (method_) {
    case Method::Default: {
      const auto cdf = EmpiricalCdf::fit(scratch_losses_);
      const ParamVector u = sample_sphere(model_.dim(), rng_);
      const Example& z = source.draw(DrawRole::Update);
      g = df_gradient(state_.w, delta_, u, z, model_, cdf, spec_);
      break;
    }
    case Method::Fast: {
      const auto cdf = FoldedNormalCdf::fit(scratch_losses_);
      const Example& z = source.draw(DrawRole::Update);
      g = fast_gradient(state_.w, z, model_, cdf, spec_);
      break;
    }
    case Method::Off: {
      const Example& z = source.draw(DrawRole::Update);
      g.source = GradientSource::Plain;
      g.value.resize(model_.dim());
      g.loss = model_.loss_and_gradient(state_.w, z, g.value);
      break;
    }
  }
  state_ = mirror_step(std::move(state_), g, alpha_, geom_);
}

void SpectralDescent::run(ExampleSource& source, std::size_t steps) {
  for (std::size_t t = 0; t < steps; ++t) step(source);
}

double resolve_step_size(const RunConfig& cfg, const Spectrum& spec, std::size_t steps,
                         std::size_t d) {
  if (const double* a = std::get_if<double>(&cfg.step_size)) {
    if (!(*a > 0.0)) throw DomainError("step size must be positive");
    return *a;
  }
  if (cfg.method != Method::Default)
    throw UnsupportedError("theory step sizes apply to the derivative-free method only");
  TheoryConstants c = std::get<TheoryConstants>(cfg.step_size);
  if (!c.lambda_sigma) c.lambda_sigma = spec.lipschitz();
  return theory_step_size(c, steps, cfg.smoothing_delta, d);
}

namespace {

RunResult run_with_budget(const LossModel& model, ExampleSource& source, const Spectrum& spec,
                          const MirrorGeometry& geom, const RunConfig& cfg, Budget budget,
                          const ParamVector& w0) {
  RunResult result;
  result.budget = budget;
  result.alpha = resolve_step_size(cfg, spec, budget.steps, model.dim());
  const std::size_t before = source.draws();
  SpectralDescent engine(model, spec, geom, cfg.method, result.alpha, cfg.smoothing_delta,
                         budget.ancillary, w0, cfg.seed);
  engine.run(source, budget.steps);
  result.averaged = engine.averaged();
  result.last = engine.current();
  result.draws = source.draws() - before;
  return result;
}

}  // namespace

RunResult run_algorithm1(const LossModel& model, ExampleSource& source, const Spectrum& spec,
                         const MirrorGeometry& geom, const RunConfig& cfg, std::size_t n_budget,
                         const ParamVector& w0) {
  cfg.validate();
  if (cfg.method != Method::Default) throw DomainError("run_algorithm1: method must be default");
  const Budget budget =
      cfg.ancillary_size ? allocate_budget(n_budget, *cfg.ancillary_size) : allocate_budget(n_budget);
  return run_with_budget(model, source, spec, geom, cfg, budget, w0);
}

RunResult run_streaming(const LossModel& model, ExampleSource& source, const Spectrum& spec,
                        const MirrorGeometry& geom, const RunConfig& cfg, std::size_t n_budget,
                        const ParamVector& w0) {
  cfg.validate();
  switch (cfg.method) {
    case Method::Fast: {
      const Budget budget = cfg.ancillary_size ? allocate_budget(n_budget, *cfg.ancillary_size)
                                               : allocate_budget(n_budget);
      return run_with_budget(model, source, spec, geom, cfg, budget, w0);
    }
    case Method::Off:
      if (n_budget == 0) throw BudgetError("run_streaming: empty budget");
      return run_with_budget(model, source, spec, geom, cfg, Budget{0, n_budget}, w0);
    case Method::Default:
      break;
  }
  throw DomainError("run_streaming: method must be fast or off");
}

}  // namespace spectral
