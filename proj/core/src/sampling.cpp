#include "spectral/sampling.hpp"

#include <cmath>

namespace spectral {

ParamVector sample_sphere(std::size_t d, Rng& rng) {
  if (d == 0) throw DomainError("sample_sphere: dimension must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  ParamVector u(d);
  double r = 0.0;
  do {
    for (double& x : u) x = normal(rng);
    r = vec::norm(u);
  } while (r == 0.0);
  vec::scale(1.0 / r, u);
  return u;
}

ParamVector sample_ball(std::size_t d, Rng& rng) {
  ParamVector u = sample_sphere(d, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  vec::scale(std::pow(unif(rng), 1.0 / static_cast<double>(d)), u);
  return u;
}

}  // namespace spectral
