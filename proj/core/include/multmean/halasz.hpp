#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "multmean/multcore.hpp"
#include "multmean/numeric.hpp"
#include "multmean/primes.hpp"

namespace multmean {

using PrimeFunction = std::function<Complex(std::uint64_t)>;

/// rho(w, t) = sum_{lower < p <= w} (|g(p)| - Re g(p) p^{-it}) / p. Every summand is >= 0.
double rho(const PrimeSet& primes, const PrimeFunction& g, double w, double t, double lower = 0);

/// Grid step used when none is given: min(0.05, 1 / log x).
double default_grid_step(double x);

struct RhoSample {
  double t;
  double rho;
};

struct LambdaReport {
  double lambda = 0;
  double t_star = 0;
  double T = 0;
  double Y = 0;
  double x = 0;
  double grid_step = 0;
  int refinement_iterations = 0;
  std::size_t grid_points = 0;
  std::size_t refined_cells = 0;
  std::vector<RhoSample> rho_profile;  // grid samples, filled when requested
};

struct LambdaOptions {
  bool keep_profile = false;
  /// Besides the winning cell, this many further grid-local minima (by value) are refined.
  std::size_t extra_cells = 7;
  unsigned workers = 1;
};

/// Minimizes rho over (Y, x] for |t| <= T: a symmetric grid of spacing grid_step through t = 0
/// (plus the endpoints +-T), then `refine` trisection steps on [t_{i-1}, t_{i+1}] around the best
/// grid point and the next best local minima. Ties within 1e-12 go to the smaller |t|. The result
/// is the best value seen; it is not certified to be the global minimum.
LambdaReport minimize_lambda(const PrimeSet& primes, const PrimeFunction& g, double Y, double x, double T,
                             double grid_step, int refine, const LambdaOptions& options = {});

struct Theorem2Params {
  double Y = 1.5;
  double x = 0;
  double T = 1;
  double c = 1;
  double beta = 1;
  double grid_step = 0;  // 0 selects default_grid_step(x)
  int refine = 40;
};

struct Theorem2Report {
  double m_actual = 0;  // |M(x)|
  double p_x = 1;       // prod_{p <= x} (1 + |g(p)|/p)
  double c = 0;
  double beta = 0;
  double c1 = 0;            // empirical: -min_{Y <= w <= x} sum_{w < p <= x} (|g(p)| - c)/p, floored at 0
  double worst_margin = 0;  // that minimum itself
  double worst_w = 0;
  double max_abs_g = 0;     // compare with beta
  bool beta_respected = true;
  double gamma_exponent = 0;  // 1 + c beta / (c + beta)
  LambdaReport lambda;
  double bound_factor = 0;  // exp(-lambda c / (c + beta)) + T^{-1/2}
  double rhs = 0;           // x / log x * p_x * bound_factor
  double ratio = 0;         // m_actual / rhs
};

Theorem2Report theorem2_evaluate(const SieveTable<Complex>& table, const PrimeSet& primes, const PrimeFunction& g,
                                 const Theorem2Params& params);
Theorem2Report theorem2_evaluate(const SieveTable<double>& table, const PrimeSet& primes, const PrimeFunction& g,
                                 const Theorem2Params& params);

/// exp(sum_{p <= cutoff} g(p) p^{-s}): the Euler product of the exponentially multiplicative
/// function with prime values g(p). Requires Re s >= 1 + 1/log(cutoff).
Complex euler_product_eval(const PrimeSet& primes, const PrimeFunction& g, Complex s, double cutoff);

}  // namespace multmean
