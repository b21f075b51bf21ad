#include "multmean/halasz.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "multmean/errors.hpp"

namespace multmean {
namespace {

// Prime data for (lower, upper], ascending.
struct PrimeProfile {
  std::vector<double> log_p;
  std::vector<double> inv_p;
  std::vector<double> abs_g;
  std::vector<Complex> g;

  PrimeProfile(const PrimeSet& primes, const PrimeFunction& fn, double lower, double upper) {
    for (std::uint32_t p : primes.primes()) {
      const double pd = static_cast<double>(p);
      if (pd <= lower) continue;
      if (pd > upper) break;
      const Complex v = fn(p);
      log_p.push_back(std::log(pd));
      inv_p.push_back(1.0 / pd);
      abs_g.push_back(std::abs(v));
      g.push_back(v);
    }
  }

  double rho(double t) const {
    KahanSum<double> acc;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double theta = t * log_p[i];
      const double re = g[i].real() * std::cos(theta) + g[i].imag() * std::sin(theta);
      acc += (abs_g[i] - re) * inv_p[i];
    }
    return acc.value();
  }
};

constexpr double kTieTolerance = 1e-12;

bool better(double value, double t, double best_value, double best_t) {
  if (value < best_value - kTieTolerance) return true;
  if (value <= best_value + kTieTolerance) return std::abs(t) < std::abs(best_t);
  return false;
}

void check_upper(const PrimeSet& primes, double x, const char* op) {
  if (std::floor(x) > static_cast<double>(primes.limit())) throw DomainError(std::string(op) + ": x exceeds prime limit");
}

}  // namespace

double rho(const PrimeSet& primes, const PrimeFunction& g, double w, double t, double lower) {
  if (lower < 0 || w < lower) throw DomainError("rho: need w >= lower >= 0");
  check_upper(primes, w, "rho");
  return PrimeProfile(primes, g, lower, w).rho(t);
}

double default_grid_step(double x) { return std::min(0.05, 1.0 / std::log(std::max(x, 3.0))); }

LambdaReport minimize_lambda(const PrimeSet& primes, const PrimeFunction& g, double Y, double x, double T,
                             double grid_step, int refine, const LambdaOptions& options) {
  if (!(T > 0)) throw DomainError("minimize_lambda: T must be > 0");
  if (!(grid_step > 0)) throw DomainError("minimize_lambda: grid_step must be > 0");
  if (Y < 1.5 || Y > x) throw DomainError("minimize_lambda: need 3/2 <= Y <= x");
  if (refine < 0) throw DomainError("minimize_lambda: refine must be >= 0");
  check_upper(primes, x, "minimize_lambda");

  const PrimeProfile profile(primes, g, Y, x);

  std::vector<double> grid;
  const auto half = static_cast<std::int64_t>(std::floor(T / grid_step + 1e-9));
  if (static_cast<double>(half) * grid_step < T - 1e-12) grid.push_back(-T);
  for (std::int64_t i = -half; i <= half; ++i) grid.push_back(static_cast<double>(i) * grid_step);
  if (static_cast<double>(half) * grid_step < T - 1e-12) grid.push_back(T);

  std::vector<double> values(grid.size());
  parallel_ranges(0, grid.size(), options.workers, [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t i = lo; i < hi; ++i) values[i] = profile.rho(grid[i]);
  });

  LambdaReport report;
  report.T = T;
  report.Y = Y;
  report.x = x;
  report.grid_step = grid_step;
  report.refinement_iterations = refine;
  report.grid_points = grid.size();
  if (options.keep_profile) {
    report.rho_profile.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) report.rho_profile.push_back({grid[i], values[i]});
  }

  std::size_t best_i = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (better(values[i], grid[i], values[best_i], grid[best_i])) best_i = i;
  }
  double best_value = values[best_i];
  double best_t = grid[best_i];

  // Cells to refine: the winner, then further local minima of the grid in increasing value.
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i == best_i) continue;
    const bool left_ok = i == 0 || values[i] <= values[i - 1];
    const bool right_ok = i + 1 == grid.size() || values[i] <= values[i + 1];
    if (left_ok && right_ok) minima.push_back(i);
  }
  std::stable_sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  if (minima.size() > options.extra_cells) minima.resize(options.extra_cells);
  minima.insert(minima.begin(), best_i);
  report.refined_cells = minima.size();

  for (std::size_t i : minima) {
    double a = grid[i == 0 ? 0 : i - 1];
    double b = grid[i + 1 == grid.size() ? i : i + 1];
    for (int it = 0; it < refine; ++it) {
      const double m1 = a + (b - a) / 3.0;
      const double m2 = b - (b - a) / 3.0;
      const double f1 = profile.rho(m1);
      const double f2 = profile.rho(m2);
      if (better(f1, m1, best_value, best_t)) {
        best_value = f1;
        best_t = m1;
      }
      if (better(f2, m2, best_value, best_t)) {
        best_value = f2;
        best_t = m2;
      }
      if (f1 <= f2) {
        b = m2;
      } else {
        a = m1;
      }
    }
  }
  report.lambda = best_value;
  report.t_star = best_t;
  return report;
}

namespace {

template <class T>
Theorem2Report evaluate_theorem2(const SieveTable<T>& table, const PrimeSet& primes, const PrimeFunction& g,
                                 const Theorem2Params& params) {
  const double x = params.x;
  if (x < 2) throw DomainError("theorem2_evaluate: x must be >= 2");
  if (std::floor(x) > static_cast<double>(table.limit())) throw DomainError("theorem2_evaluate: x exceeds table limit");
  if (!(params.c > 0) || !(params.beta > 0)) throw DomainError("theorem2_evaluate: c and beta must be positive");
  const double step = params.grid_step > 0 ? params.grid_step : default_grid_step(x);

  Theorem2Report r;
  r.c = params.c;
  r.beta = params.beta;
  r.gamma_exponent = 1.0 + params.c * params.beta / (params.c + params.beta);
  r.m_actual = std::abs(mean_sum(table, x));

  KahanSum<double> log_px;
  std::vector<double> tail_terms;  // (|g(p)| - c)/p for Y < p <= x, ascending
  std::vector<double> tail_primes;
  for (std::uint32_t p : primes.primes()) {
    const double pd = static_cast<double>(p);
    if (pd > x) break;
    const double a = std::abs(g(p));
    r.max_abs_g = std::max(r.max_abs_g, a);
    log_px += std::log1p(a / pd);
    if (pd > params.Y) {
      tail_terms.push_back((a - params.c) / pd);
      tail_primes.push_back(pd);
    }
  }
  r.p_x = std::exp(log_px.value());
  r.beta_respected = r.max_abs_g <= params.beta;

  // sum_{w < p <= x} is a step function of w; its minimum over [Y, x] is attained at w = Y or
  // just at a prime. Scan suffix sums from the top.
  r.worst_margin = 0;
  r.worst_w = x;
  KahanSum<double> suffix;
  for (std::size_t i = tail_terms.size(); i-- > 0;) {
    suffix += tail_terms[i];
    const double w = i == 0 ? params.Y : tail_primes[i - 1];
    if (suffix.value() < r.worst_margin) {
      r.worst_margin = suffix.value();
      r.worst_w = w;
    }
  }
  r.c1 = std::max(0.0, -r.worst_margin);

  r.lambda = minimize_lambda(primes, g, params.Y, x, params.T, step, params.refine);
  r.bound_factor = std::exp(-r.lambda.lambda * params.c / (params.c + params.beta)) + 1.0 / std::sqrt(params.T);
  r.rhs = x / std::log(x) * r.p_x * r.bound_factor;
  r.ratio = r.m_actual / r.rhs;
  return r;
}

}  // namespace

Theorem2Report theorem2_evaluate(const SieveTable<Complex>& table, const PrimeSet& primes, const PrimeFunction& g,
                                 const Theorem2Params& params) {
  return evaluate_theorem2(table, primes, g, params);
}

Theorem2Report theorem2_evaluate(const SieveTable<double>& table, const PrimeSet& primes, const PrimeFunction& g,
                                 const Theorem2Params& params) {
  return evaluate_theorem2(table, primes, g, params);
}

Complex euler_product_eval(const PrimeSet& primes, const PrimeFunction& g, Complex s, double cutoff) {
  if (!(s.real() > 1)) throw DomainError("euler_product_eval: Re(s) must exceed 1");
  if (cutoff > 1 && s.real() < 1.0 + 1.0 / std::log(cutoff)) {
    throw DomainError("euler_product_eval: Re(s) below 1 + 1/log(cutoff)");
  }
  check_upper(primes, cutoff, "euler_product_eval");
  ComplexKahanSum acc;
  for (std::uint32_t p : primes.primes()) {
    if (p > cutoff) break;
    const Complex v = g(p);
    if (v == Complex(0)) continue;
    acc += v * std::exp(-s * std::log(static_cast<double>(p)));
  }
  return std::exp(acc.value());
}

}  // namespace multmean
