#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectral {

/// Flattened model parameters, the optimization variable.
using ParamVector = std::vector<double>;

/// Every stochastic routine takes one of these explicitly; nothing draws from
/// global state.
using Rng = std::mt19937_64;

/// Thrown when an argument lies outside the documented domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when an operation is asked to do something the chosen spectrum or
/// model kind does not support (e.g. differentiating the CVaR step).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown when a finite sample budget cannot cover the requested schedule.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mixes a base seed with stream indices (splitmix64 finalizer), so that
/// trial / method / candidate generators are independent and reproducible.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t substream = 0);

/// Shortest decimal text that reads back to exactly the same double.
std::string format_double(double x);

namespace vec {

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

}  // namespace vec

}  // namespace spectral
