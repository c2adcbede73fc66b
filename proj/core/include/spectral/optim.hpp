#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "spectral/common.hpp"
#include "spectral/dist.hpp"
#include "spectral/losses.hpp"
#include "spectral/spectrum.hpp"

namespace spectral {

// ---------------------------------------------------------------------------
// Geometry

/// Mirror-descent geometry: a strongly convex potential Phi together with the
/// feasible set W. A step solves
///   argmin_{v in W} <g, v> + B_Phi(v; w) / alpha
/// in place.
class MirrorGeometry {
 public:
  virtual ~MirrorGeometry() = default;

  virtual void step(std::span<double> w, std::span<const double> g, double alpha) const = 0;
  virtual void project(std::span<double> w) const = 0;

  /// mu, the strong convexity modulus of Phi.
  virtual double strong_convexity() const = 0;
  /// sup |w - w'| over W.
  virtual double diameter() const = 0;
  /// sup B_Phi(w; w') over W.
  virtual double bregman_diameter() const = 0;
};

/// Phi = |w|^2 / 2 on the closed L2 ball of the given radius; the step is a
/// gradient step followed by radial projection.
class EuclideanBall final : public MirrorGeometry {
 public:
  explicit EuclideanBall(double radius);

  void step(std::span<double> w, std::span<const double> g, double alpha) const override;
  void project(std::span<double> w) const override;

  double strong_convexity() const override { return 1.0; }
  double diameter() const override { return 2.0 * radius_; }
  double bregman_diameter() const override { return 2.0 * radius_ * radius_; }

  double radius() const noexcept { return radius_; }

 private:
  double radius_;
};

// ---------------------------------------------------------------------------
// Gradient estimates

enum class Method { Default, Fast, Off };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

enum class GradientSource { DerivativeFree, Fast, Plain };

struct GradientEstimate {
  ParamVector value;
  GradientSource source = GradientSource::Plain;
  double loss = 0.0;    // loss at the evaluation point (perturbed for DF)
  double factor = 1.0;  // scalar multiplying U (DF) or grad l (Fast, Plain)
};

/// Anything with `double eval(double) const` returning a distribution
/// function value.
template <typename T>
concept CdfModel = requires(const T& cdf, double u) {
  { cdf.eval(u) } -> std::convertible_to<double>;
};

/// (d / delta) * l * sigma(F(l)) * U where l is the loss at w + delta U.
GradientEstimate df_gradient_from_loss(double perturbed_loss, double cdf_at_loss,
                                       std::span<const double> direction, double delta,
                                       const Spectrum& spec);

template <CdfModel Cdf>
GradientEstimate df_gradient(std::span<const double> w, double delta,
                             std::span<const double> direction, const Example& z,
                             const LossModel& model, const Cdf& cdf, const Spectrum& spec) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("df_gradient: delta must lie in (0, 1)");
  ParamVector shifted(w.begin(), w.end());
  vec::axpy(delta, direction, shifted);
  const double loss = model.loss(shifted, z);
  return df_gradient_from_loss(loss, cdf.eval(loss), direction, delta, spec);
}

/// [sigma(F(l)) + l sigma'(F(l)) F'(l)] * grad l(w; z), with F the folded
/// normal fit. Throws UnsupportedError for CVaR.
GradientEstimate fast_gradient(std::span<const double> w, const Example& z,
                               const LossModel& model, const FoldedNormalCdf& cdf,
                               const Spectrum& spec);

// ---------------------------------------------------------------------------
// Iterates and steps

struct IterateState {
  ParamVector w;
  std::size_t t = 0;
  ParamVector running_sum;  // sum of the post-update iterates w_1..w_t

  explicit IterateState(ParamVector w0);
  /// (1/t) * running_sum; w itself before the first step.
  ParamVector averaged() const;
};

IterateState mirror_step(IterateState state, const GradientEstimate& g, double alpha,
                         const MirrorGeometry& geom);

// ---------------------------------------------------------------------------
// Budgets and step sizes

struct Budget {
  std::size_t ancillary;  // M
  std::size_t steps;      // T
};

/// M = ceil(sqrt(n)), T = floor(n / (1 + M)). Requires n >= 4.
Budget allocate_budget(std::size_t n);

/// Budget when M is fixed by the caller: T = floor(n / (M + 1)).
Budget allocate_budget(std::size_t n, std::size_t ancillary);

/// Problem constants for the step size with an expectation guarantee.
struct TheoryConstants {
  double lambda_risk = 1.0;  // Lipschitz constant of the risk on the enlarged set
  double s1 = 1.0;           // spread of the idealized weighted-loss direction
  double s2 = 1.0;           // sqrt of the loss second moment bound
  std::optional<double> lambda_sigma;  // spectrum Lipschitz constant
  double bregman_diameter = 1.0;
  double mu = 1.0;
};

/// alpha = mu / (lambda_R + 1/c_T),
/// c_T = (delta/d) sqrt(2 Delta_Phi mu / (T (s1^2 + (lambda_sigma s2)^2))).
double theory_step_size(const TheoryConstants& constants, std::size_t steps,
                        double delta_smooth, std::size_t d);

/// Default: 2 gamma / (d sqrt(n)); Fast and Off: 2 / sqrt(n).
double default_step_size(Method method, std::size_t n, std::size_t d, double gamma);

// ---------------------------------------------------------------------------
// Data streams

enum class DrawRole { Ancillary, Update };

/// Supplies examples to the optimizer and counts how many were consumed.
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;

  const Example& draw(DrawRole role) {
    ++draws_;
    return next(role);
  }
  std::size_t draws() const noexcept { return draws_; }

 protected:
  virtual const Example& next(DrawRole role) = 0;

 private:
  std::size_t draws_ = 0;
};

/// Fresh iid draws from a generator.
class GeneratorSource final : public ExampleSource {
 public:
  using Generator = std::function<Example(Rng&)>;
  GeneratorSource(Generator gen, std::uint64_t seed);

 protected:
  const Example& next(DrawRole role) override;

 private:
  Generator gen_;
  Rng rng_;
  Example current_;
};

/// Walks a fixed sample once, in order; running past the end throws
/// BudgetError.
class SequenceSource final : public ExampleSource {
 public:
  explicit SequenceSource(std::span<const Example> data) : data_(data) {}
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 protected:
  const Example& next(DrawRole role) override;

 private:
  std::span<const Example> data_;
  std::size_t pos_ = 0;
};

/// Repeated passes over a finite training set, reshuffled before each pass.
class EpochSource final : public ExampleSource {
 public:
  EpochSource(std::span<const Example> data, std::uint64_t seed);

  /// Starts a new pass with a fresh permutation.
  void begin_epoch();
  std::size_t remaining_in_epoch() const noexcept { return order_.size() - pos_; }

 protected:
  const Example& next(DrawRole role) override;

 private:
  std::span<const Example> data_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Drivers

using StepSize = std::variant<double, TheoryConstants>;

struct RunConfig {
  Method method = Method::Default;
  StepSize step_size = 0.01;
  double smoothing_delta = 0.5;
  std::optional<std::size_t> ancillary_size;  // empty: ceil(sqrt(n))
  std::size_t epochs = 1;
  std::uint64_t seed = 0;

  /// Throws DomainError on an inconsistent configuration.
  void validate() const;
};

/// One optimizer instance. Default runs the derivative-free update with a
/// fresh ancillary ECDF each step, Fast swaps in the folded-normal model and
/// the chain-rule gradient, Off steps along the plain loss gradient.
///
/// The model, spectrum and geometry must outlive the engine.
class SpectralDescent {
 public:
  SpectralDescent(const LossModel& model, const Spectrum& spec, const MirrorGeometry& geom,
                  Method method, double alpha, double smoothing_delta, std::size_t ancillary,
                  ParamVector w0, std::uint64_t seed);

  void step(ExampleSource& source);
  void run(ExampleSource& source, std::size_t steps);

  const IterateState& state() const noexcept { return state_; }
  const ParamVector& current() const noexcept { return state_.w; }
  ParamVector averaged() const { return state_.averaged(); }

  Method method() const noexcept { return method_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t ancillary() const noexcept { return ancillary_; }
  /// M + 1 for Default and Fast, 1 for Off.
  std::size_t draws_per_step() const noexcept;

 private:
  const LossModel& model_;
  const Spectrum& spec_;
  const MirrorGeometry& geom_;
  Method method_;
  double alpha_;
  double delta_;
  std::size_t ancillary_;
  IterateState state_;
  Rng rng_;
  std::vector<double> scratch_losses_;
};

struct RunResult {
  ParamVector averaged;
  ParamVector last;
  Budget budget{};
  double alpha = 0.0;
  std::size_t draws = 0;
};

/// The resolved step size for a run of `steps` iterations in dimension d.
double resolve_step_size(const RunConfig& cfg, const Spectrum& spec, std::size_t steps,
                         std::size_t d);

/// Derivative-free stochastic mirror descent on a budget of n draws: T steps
/// of M ancillary draws plus one update draw, returning the averaged iterate.
RunResult run_algorithm1(const LossModel& model, ExampleSource& source, const Spectrum& spec,
                         const MirrorGeometry& geom, const RunConfig& cfg, std::size_t n_budget,
                         const ParamVector& w0);

/// Fast (same budget split as run_algorithm1) or Off (T = n, no ancillary
/// draws). Returns the averaged iterate.
RunResult run_streaming(const LossModel& model, ExampleSource& source, const Spectrum& spec,
                        const MirrorGeometry& geom, const RunConfig& cfg, std::size_t n_budget,
                        const ParamVector& w0);

}  // namespace spectral
