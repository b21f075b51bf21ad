#include "multmean/multcore.hpp"

#include <cmath>

namespace multmean {
namespace {

// 1/log a - 1/log b without cancellation.
long double inverse_log_gap(long double a, long double b) {
  return std::log1p((b - a) / a) / (std::log(a) * std::log(b));
}

void require_within(const SieveTable<double>& t, double x, const char* op) {
  if (std::floor(x) > static_cast<double>(t.limit())) {
    throw DomainError(std::string(op) + ": x exceeds table limit");
  }
}

}  // namespace

double partial_summation_residual(const SieveTable<double>& t, double u) {
  if (u < 2) throw DomainError("partial_summation_residual: u must be >= 2");
  require_within(t, u, "partial_summation_residual");
  const auto top = static_cast<std::uint64_t>(std::floor(u));
  const long double ul = u;

  KahanSum<long double> m_sum;
  KahanSum<long double> n_sum;
  KahanSum<long double> integral;
  m_sum += t[1];
  for (std::uint64_t n = 2; n <= top; ++n) {
    m_sum += t[n];
    n_sum += static_cast<long double>(t[n]) * std::log(static_cast<long double>(n));
    const long double lo = static_cast<long double>(n);
    const long double hi = n == top ? ul : lo + 1;
    if (hi > lo) integral += n_sum.value() * inverse_log_gap(lo, hi);
  }
  const long double residual =
      m_sum.value() - static_cast<long double>(t[1]) - n_sum.value() / std::log(ul) - integral.value();
  return static_cast<double>(residual);
}

Lemma19Result lemma19_evaluate(const SieveTable<double>& t, double x, const PrimeSet& primes) {
  if (x < 2) throw DomainError("lemma19_evaluate: x must be >= 2");
  require_within(t, x, "lemma19_evaluate");
  const auto top = static_cast<std::uint64_t>(std::floor(x));
  for (std::uint64_t n = 1; n <= top; ++n) {
    if (t[n] < 0 || std::isnan(t[n])) {
      throw DomainError("lemma19_evaluate: table has a negative value at n=" + std::to_string(n));
    }
  }
  Lemma19Result r;
  KahanSum<double> lhs;
  KahanSum<double> harmonic;
  harmonic += t[1];
  for (std::uint64_t n = 2; n <= top; ++n) {
    lhs += t[n];
    harmonic += t[n] / static_cast<double>(n);
  }
  r.lhs = lhs.value();
  r.harmonic = harmonic.value();
  r.delta = chebyshev_supremum(primes, x, [&](std::uint64_t q, std::uint64_t) { return t[q]; });
  const double lx = std::log(x);
  r.rhs = (x / lx + 10.0 * x / (lx * lx)) * r.delta * r.harmonic;
  return r;
}

double lemma20_ratio(const SieveTable<double>& t, double x, const PrimeSet& primes) {
  require_within(t, x, "lemma20_ratio");
  const auto top = static_cast<std::uint64_t>(std::floor(x));
  KahanSum<double> harmonic;
  for (std::uint64_t n = 1; n <= top; ++n) harmonic += t[n] / static_cast<double>(n);
  KahanSum<double> log_product;
  for (std::uint32_t p : primes.primes()) {
    if (p > top) break;
    log_product += std::log1p(t[p] / static_cast<double>(p));
  }
  return harmonic.value() / std::exp(log_product.value());
}

Lemma21Result lemma21_ratio(const SieveTable<double>& t, double x, const PrimeSet& primes) {
  require_within(t, x, "lemma21_ratio");
  if (x < 1) throw DomainError("lemma21_ratio: x must be >= 1");
  const auto top = static_cast<std::uint64_t>(std::floor(x));
  KahanSum<double> deficit;
  KahanSum<double> chebyshev;
  for (std::uint32_t p : primes.primes()) {
    if (p > top) break;
    const double pd = static_cast<double>(p);
    deficit += (1.0 - t[p]) / pd;
    chebyshev += t[p] * std::log(pd);
  }
  Lemma21Result r;
  r.ratio = mean_sum(t, x) / (x * std::exp(-deficit.value()));
  r.empirical_c = chebyshev.value() / x;
  return r;
}

}  // namespace multmean
