#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "oracles.hpp"
#include "spectral/common.hpp"
#include "spectral/optim.hpp"
#include "spectral/sampling.hpp"

using namespace spectral;

namespace {

struct FixedCdf {
  double value;
  double eval(double) const { return value; }
};

Example point(std::vector<double> x, double y) { return Example{std::move(x), 0, y}; }

GeneratorSource::Generator gaussian_linear(std::vector<double> w_star, double noise) {
  return [w_star, noise](Rng& rng) {
    std::normal_distribution<double> g;
    Example z;
    z.features.resize(w_star.size());
    double y = 0.0;
    for (std::size_t j = 0; j < w_star.size(); ++j) {
      z.features[j] = g(rng);
      y += w_star[j] * z.features[j];
    }
    z.target = y + noise * g(rng);
    return z;
  };
}

}  // namespace

TEST(DfGradient, Examples) {
  const std::vector<double> e1{1.0, 0.0, 0.0};
  const auto g = df_gradient_from_loss(2.0, 0.4, e1, 0.5, Spectrum::uniform());
  EXPECT_EQ(g.value, (ParamVector{12.0, 0.0, 0.0}));
  EXPECT_EQ(g.source, GradientSource::DerivativeFree);

  const auto zero = df_gradient_from_loss(0.0, 0.9, e1, 0.5, Spectrum::exponential(1.0));
  for (double v : zero.value) EXPECT_EQ(v, 0.0);

  EXPECT_THROW(df_gradient_from_loss(1.0, 0.5, e1, 1.0, Spectrum::uniform()), DomainError);
  EXPECT_THROW(df_gradient_from_loss(1.0, 0.5, e1, 0.0, Spectrum::uniform()), DomainError);
}

TEST(DfGradient, UniformSpectrumIsScaledLoss) {
  Rng rng(1);
  const auto model = LossModel::linear_abs(3);
  for (int i = 0; i < 50; ++i) {
    const ParamVector w{0.3, -0.2, 1.0};
    const auto u = sample_sphere(3, rng);
    const auto z = point({1.0, 2.0, -0.5}, 0.25);
    const double delta = 0.3;
    const auto g = df_gradient(w, delta, u, z, model, FixedCdf{0.5}, Spectrum::uniform());
    ParamVector shifted = w;
    for (int j = 0; j < 3; ++j) shifted[j] += delta * u[j];
    const double l = model.loss(shifted, z);
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(g.value[j], (3.0 / delta) * l * u[j]);
    EXPECT_DOUBLE_EQ(g.loss, l);
  }
}

TEST(DfGradient, UsesCdfAtPerturbedLoss) {
  const auto model = LossModel::linear_abs(1);
  const std::vector<double> losses{0.5, 1.0, 1.5, 2.0};
  const auto cdf = EmpiricalCdf::fit(losses);
  const ParamVector w{1.0}, u{1.0};
  const auto z = point({1.0}, 0.0);
  // Perturbed loss |1 + 0.5| = 1.5, F = 0.75.
  const auto spec = Spectrum::exponential(1.0);
  const auto g = df_gradient(w, 0.5, u, z, model, cdf, spec);
  EXPECT_DOUBLE_EQ(g.value[0], (1.0 / 0.5) * 1.5 * spec.eval(0.75));
}

TEST(FastGradient, UniformIsPlainGradient) {
  Rng rng(2);
  const auto model = LossModel::logistic(3, 2);
  const FoldedNormalCdf cdf(0.8, 0.4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    ParamVector w(6);
    for (auto& v : w) v = g(rng);
    Example z{{0.2, 0.9}, i % 3, 0.0};
    const auto fg = fast_gradient(w, z, model, cdf, Spectrum::uniform());
    EXPECT_EQ(fg.value, model.gradient(w, z));
    EXPECT_EQ(fg.factor, 1.0);
  }
}

TEST(FastGradient, FactorFormula) {
  const auto spec = Spectrum::exponential(1.0);
  // Hand value for F = 1, f = 0.1, l = 2.
  const double hand = spec.eval(1.0) + 2.0 * spec.eval_derivative(1.0) * 0.1;
  EXPECT_NEAR(hand, 1.898372, 1e-6);

  const auto model = LossModel::linear_abs(2);
  const FoldedNormalCdf cdf(1.0, 0.7);
  const ParamVector w{0.5, 1.5};
  const auto z = point({1.0, 1.0}, 0.0);  // loss 2
  const auto fg = fast_gradient(w, z, model, cdf, spec);
  const double want = spec.eval(cdf.eval(2.0)) + 2.0 * spec.eval_derivative(cdf.eval(2.0)) * cdf.density(2.0);
  EXPECT_DOUBLE_EQ(fg.factor, want);
  EXPECT_DOUBLE_EQ(fg.value[0], want);
  EXPECT_EQ(fg.source, GradientSource::Fast);
}

TEST(FastGradient, ZeroLossKeepsFirstTerm) {
  const auto spec = Spectrum::exponential(2.0);
  const auto model = LossModel::quadratic(2);
  const FoldedNormalCdf cdf(0.3, 1.0);
  const ParamVector w{1.0, 1.0};
  const auto z = point({1.0, 1.0}, 2.0);  // residual 0
  const auto fg = fast_gradient(w, z, model, cdf, spec);
  EXPECT_EQ(fg.loss, 0.0);
  EXPECT_DOUBLE_EQ(fg.factor, spec.eval(0.0));
}

TEST(FastGradient, CvarRejected) {
  const auto model = LossModel::linear_abs(1);
  EXPECT_THROW(fast_gradient(ParamVector{1.0}, point({1.0}, 0.0), model, FoldedNormalCdf(0, 1),
                             Spectrum::cvar(0.5)),
               UnsupportedError);
}

TEST(MirrorStep, Examples) {
  const EuclideanBall big(10.0);
  IterateState s(ParamVector{0.0, 0.0});
  GradientEstimate g;
  g.value = {0.0, 0.0};
  auto s1 = mirror_step(s, g, 0.5, big);
  EXPECT_EQ(s1.w, (ParamVector{0.0, 0.0}));
  EXPECT_EQ(s1.t, 1u);

  g.value = {1.0, 2.0};
  auto s2 = mirror_step(s, g, 1.0, big);
  EXPECT_EQ(s2.w, (ParamVector{-1.0, -2.0}));

  const EuclideanBall unit(1.0);
  g.value = {-3.0, -4.0};
  auto s3 = mirror_step(s, g, 1.0, unit);
  EXPECT_NEAR(s3.w[0], 0.6, 1e-15);
  EXPECT_NEAR(s3.w[1], 0.8, 1e-15);
  EXPECT_THROW(mirror_step(s, g, 0.0, unit), DomainError);
}

TEST(MirrorStep, RunningSumAndAverage) {
  const EuclideanBall ball(5.0);
  IterateState s(ParamVector{1.0});
  EXPECT_EQ(s.averaged(), (ParamVector{1.0}));  // w0 before any step
  GradientEstimate g;
  g.value = {1.0};
  double sum = 0.0;
  for (int t = 1; t <= 4; ++t) {
    s = mirror_step(s, g, 0.5, ball);
    sum += s.w[0];
  }
  EXPECT_EQ(s.running_sum[0], sum);
  EXPECT_DOUBLE_EQ(s.averaged()[0], (0.5 + 0.0 - 0.5 - 1.0) / 4.0);
}

TEST(Geometry, Constants) {
  const EuclideanBall b(3.0);
  EXPECT_EQ(b.strong_convexity(), 1.0);
  EXPECT_EQ(b.diameter(), 6.0);
  EXPECT_EQ(b.bregman_diameter(), 18.0);
  EXPECT_THROW(EuclideanBall(0.0), DomainError);
}

TEST(Budget, Examples) {
  EXPECT_EQ(allocate_budget(100).ancillary, 10u);
  EXPECT_EQ(allocate_budget(100).steps, 9u);
  EXPECT_EQ(allocate_budget(4).ancillary, 2u);
  EXPECT_EQ(allocate_budget(4).steps, 1u);
  EXPECT_THROW(allocate_budget(3), BudgetError);
  EXPECT_EQ(allocate_budget(50, 9).steps, 5u);
  EXPECT_THROW(allocate_budget(5, 9), BudgetError);
}

TEST(Budget, NeverOverspends) {
  for (std::size_t n = 4; n <= 1000000; ++n) {
    const auto b = allocate_budget(n);
    ASSERT_GE(b.steps, 1u);
    ASSERT_LE(b.steps * (b.ancillary + 1), n);
    ASSERT_GE(b.ancillary * b.ancillary, n);
    ASSERT_LT((b.ancillary - 1) * (b.ancillary - 1), n);
  }
}

TEST(StepSize, TheoryExamples) {
  // delta = 0.5, d = 1, T = 1, spread = 1: c_T = 0.5 sqrt(2 Delta_Phi).
  TheoryConstants c;
  c.lambda_risk = 0.0;
  c.mu = 1.0;
  c.s1 = 1.0;
  c.s2 = 0.0;
  c.lambda_sigma = 1.0;
  c.bregman_diameter = 8.0;  // c_T = 2
  EXPECT_NEAR(theory_step_size(c, 1, 0.5, 1), 2.0, 1e-14);

  c.lambda_risk = 1.0;
  c.bregman_diameter = 1.0;
  c.s1 = 0.0;
  c.s2 = 1.0;  // lambda_sigma s2 = 1
  // 2 Delta_Phi mu / (T (s1^2 + 1)) = 2, so c_T = 0.5 sqrt(2); see formula.
  const double ct = 0.5 * std::sqrt(2.0);
  EXPECT_NEAR(theory_step_size(c, 1, 0.5, 1), 1.0 / (1.0 + 1.0 / ct), 1e-14);

  c.s1 = 1.0;  // spread 2: c_T = 0.5, alpha = 1/3
  EXPECT_NEAR(theory_step_size(c, 1, 0.5, 1), 1.0 / 3.0, 1e-14);

  c.lambda_sigma.reset();
  EXPECT_THROW(theory_step_size(c, 1, 0.5, 1), UnsupportedError);
}

TEST(StepSize, Defaults) {
  EXPECT_NEAR(default_step_size(Method::Off, 100, 7, 3.0), 0.2, 1e-15);
  EXPECT_NEAR(default_step_size(Method::Default, 100, 10, 1.0), 0.02, 1e-15);
  EXPECT_NEAR(default_step_size(Method::Fast, 4, 10, 1.0), 1.0, 1e-15);
}

TEST(StepSize, ResolveTheoryUsesSpectrumLipschitz) {
  RunConfig cfg;
  TheoryConstants c;
  cfg.step_size = c;
  const auto spec = Spectrum::exponential(1.0);
  c.lambda_sigma = spec.lipschitz();
  EXPECT_DOUBLE_EQ(resolve_step_size(cfg, spec, 10, 2), theory_step_size(c, 10, cfg.smoothing_delta, 2));
  EXPECT_THROW(resolve_step_size(cfg, Spectrum::cvar(0.5), 10, 2), UnsupportedError);
  cfg.method = Method::Off;
  EXPECT_THROW(resolve_step_size(cfg, spec, 10, 2), UnsupportedError);
}

TEST(RunConfig, Validation) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.smoothing_delta = 1.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg.smoothing_delta = 0.5;
  cfg.ancillary_size = 1;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg.ancillary_size.reset();
  cfg.step_size = -1.0;
  EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(Sources, SequenceExhaustion) {
  std::vector<Example> data(3, point({1.0}, 0.0));
  SequenceSource src(data);
  for (int i = 0; i < 3; ++i) src.draw(DrawRole::Update);
  EXPECT_EQ(src.draws(), 3u);
  EXPECT_EQ(src.remaining(), 0u);
  EXPECT_THROW(src.draw(DrawRole::Update), BudgetError);
}

TEST(Sources, EpochIsPermutation) {
  std::vector<Example> data;
  for (int i = 0; i < 20; ++i) data.push_back(point({double(i)}, 0.0));
  EpochSource a(data, 7), b(data, 7);
  std::vector<double> first, second;
  for (int e = 0; e < 2; ++e) {
    std::set<double> seen;
    for (int i = 0; i < 20; ++i) {
      const double va = a.draw(DrawRole::Update).features[0];
      EXPECT_EQ(va, b.draw(DrawRole::Update).features[0]);
      seen.insert(va);
      (e == 0 ? first : second).push_back(va);
    }
    EXPECT_EQ(seen.size(), 20u);
  }
  EXPECT_NE(first, second);
}

TEST(Engine, ZeroLossKeepsStart) {
  const auto model = LossModel::linear_abs(2);
  std::vector<Example> data(4, point({0.0, 0.0}, 0.0));
  SequenceSource src(data);
  const EuclideanBall ball(10.0);
  RunConfig cfg;
  const ParamVector w0{0.5, -0.25};
  const auto r = run_algorithm1(model, src, Spectrum::exponential(1.0), ball, cfg, 4, w0);
  EXPECT_EQ(r.budget.steps, 1u);
  EXPECT_EQ(r.averaged, w0);
  EXPECT_EQ(r.draws, 3u);  // M = 2 ancillary + 1 update
}

TEST(Engine, BudgetExhaustion) {
  const auto model = LossModel::linear_abs(1);
  std::vector<Example> data(10, point({1.0}, 0.0));
  SequenceSource src(data);
  const EuclideanBall ball(10.0);
  EXPECT_THROW(run_algorithm1(model, src, Spectrum::uniform(), ball, RunConfig{}, 100, ParamVector{0.0}),
               BudgetError);
}

TEST(Engine, DrawAccountingAndDeterminism) {
  const auto model = LossModel::linear_abs(2);
  const EuclideanBall ball(2.0);
  const auto spec = Spectrum::exponential(1.0);
  for (Method m : {Method::Default, Method::Fast, Method::Off}) {
    RunConfig cfg;
    cfg.method = m;
    cfg.seed = 42;
    cfg.step_size = 0.05;
    const std::size_t n = 2000;
    auto run = [&] {
      GeneratorSource src(gaussian_linear({1.0, -1.0}, 0.5), 9);
      auto r = m == Method::Default ? run_algorithm1(model, src, spec, ball, cfg, n, ParamVector{0.0, 0.0})
                                    : run_streaming(model, src, spec, ball, cfg, n, ParamVector{0.0, 0.0});
      EXPECT_EQ(src.draws(), r.draws);
      return r;
    };
    const auto a = run();
    const auto b = run();
    EXPECT_EQ(a.averaged, b.averaged);
    EXPECT_EQ(a.last, b.last);
    if (m == Method::Off) {
      EXPECT_EQ(a.draws, n);
    } else {
      EXPECT_EQ(a.budget.ancillary, 45u);
      EXPECT_EQ(a.draws, a.budget.steps * (a.budget.ancillary + 1));
    }
  }
  RunConfig bad;
  bad.method = Method::Off;
  GeneratorSource src(gaussian_linear({1.0, -1.0}, 0.5), 9);
  EXPECT_THROW(run_algorithm1(model, src, spec, ball, bad, 100, ParamVector{0.0, 0.0}), DomainError);
}

TEST(Engine, IteratesStayFeasibleAndAverageIsExact) {
  const auto model = LossModel::linear_abs(2);
  const EuclideanBall ball(0.75);
  const auto spec = Spectrum::exponential(2.0);
  for (Method m : {Method::Default, Method::Fast, Method::Off}) {
    SpectralDescent eng(model, spec, ball, m, 0.5, 0.5, 8, ParamVector{3.0, 0.0}, 5);
    EXPECT_LE(vec::norm(eng.current()), 0.75 + 1e-12);  // w0 projected
    GeneratorSource src(gaussian_linear({4.0, -4.0}, 1.0), 6);
    ParamVector sum(2, 0.0);
    for (int t = 0; t < 300; ++t) {
      eng.step(src);
      ASSERT_LE(vec::norm(eng.current()), 0.75 + 1e-9);
      sum[0] += eng.current()[0];
      sum[1] += eng.current()[1];
    }
    EXPECT_EQ(src.draws(), 300 * eng.draws_per_step());
    const auto avg = eng.averaged();
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(avg[j], sum[j] / 300.0, 1e-12);
  }
}

TEST(Engine, FastWithCvarRejected) {
  const auto model = LossModel::linear_abs(1);
  const EuclideanBall ball(1.0);
  const auto spec = Spectrum::cvar(0.5);
  EXPECT_THROW(SpectralDescent(model, spec, ball, Method::Fast, 0.1, 0.5, 4, ParamVector{0.0}, 1),
               UnsupportedError);
  EXPECT_NO_THROW(SpectralDescent(model, spec, ball, Method::Default, 0.1, 0.5, 4, ParamVector{0.0}, 1));
}

TEST(Engine, OffSolvesNoiselessQuadratic) {
  // E (1/2)(<w - w*, x>)^2 = |w - w*|^2 / 2 for x ~ N(0, I).
  const auto model = LossModel::quadratic(2);
  const EuclideanBall ball(10.0);
  const ParamVector w_star{1.0, -0.5};
  GeneratorSource src(gaussian_linear(w_star, 0.0), 3);
  RunConfig cfg;
  cfg.method = Method::Off;
  cfg.step_size = 0.1;
  const auto r = run_streaming(model, src, Spectrum::uniform(), ball, cfg, 1000, ParamVector{0.0, 0.0});
  auto excess = [&](const ParamVector& w) {
    return 0.5 * (std::pow(w[0] - w_star[0], 2) + std::pow(w[1] - w_star[1], 2));
  };
  EXPECT_LE(excess(r.averaged), 1e-3);
  EXPECT_LE(excess(r.last), 1e-3);
}

TEST(Engine, DerivativeFreeEstimateIsUnbiasedUnderTrueCdf) {
  // l = |<w - w*, x> - e| with x ~ N(0, I_2), e ~ N(0, s^2) is half-normal with
  // scale tau(w) = sqrt(|w - w*|^2 + s^2), so S(w) = K tau(w) with
  // K = integral of u sigma(2 Phi(u) - 1) 2 phi(u) du. The smoothed gradient is
  // (d / delta) K E[tau(w + delta U) U], integrated over the circle.
  const auto spec = Spectrum::exponential(1.0);
  const ParamVector w_star{1.0, -1.0};
  const double s = 0.5, delta = 0.4;
  const ParamVector w{0.2, 0.3};
  auto tau = [&](double a, double b) {
    return std::sqrt((a - w_star[0]) * (a - w_star[0]) + (b - w_star[1]) * (b - w_star[1]) + s * s);
  };
  const double K = oracle::simpson(
      [&](double u) { return u * oracle::sigma_exp(1.0, 2 * oracle::Phi(u) - 1) * 2 * oracle::phi(u); }, 0.0,
      40.0, 40000);
  ParamVector want(2);
  for (int j = 0; j < 2; ++j) {
    want[j] = (2.0 / delta) * K *
              oracle::simpson(
                  [&](double th) {
                    const double c = std::cos(th), sn = std::sin(th);
                    return tau(w[0] + delta * c, w[1] + delta * sn) * (j == 0 ? c : sn);
                  },
                  0.0, 2 * std::numbers::pi, 4000) /
              (2 * std::numbers::pi);
  }

  const auto model = LossModel::linear_abs(2);
  const auto gen = gaussian_linear(w_star, s);
  Rng rng(77);
  const int n = 100000;
  ParamVector mean(2, 0.0), sq(2, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto u = sample_sphere(2, rng);
    const auto z = gen(rng);
    const ParamVector shifted{w[0] + delta * u[0], w[1] + delta * u[1]};
    const double l = model.loss(shifted, z);
    const double F = 2 * oracle::Phi(l / tau(shifted[0], shifted[1])) - 1;
    const auto g = df_gradient_from_loss(l, F, u, delta, spec);
    for (int j = 0; j < 2; ++j) {
      mean[j] += g.value[j];
      sq[j] += g.value[j] * g.value[j];
    }
  }
  for (int j = 0; j < 2; ++j) {
    mean[j] /= n;
    const double se = std::sqrt((sq[j] / n - mean[j] * mean[j]) / n);
    EXPECT_NEAR(mean[j], want[j], 3.0 * se) << j;
  }
}
