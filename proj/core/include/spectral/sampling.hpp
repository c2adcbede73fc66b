#pragma once

#include <cstddef>

#include "spectral/common.hpp"

namespace spectral {

/// Uniform draw from the unit sphere {u : |u| = 1} in R^d (normalized
/// Gaussian vector).
ParamVector sample_sphere(std::size_t d, Rng& rng);

/// Uniform draw from the unit ball: sphere direction scaled by r = v^(1/d).
ParamVector sample_ball(std::size_t d, Rng& rng);

}  // namespace spectral
