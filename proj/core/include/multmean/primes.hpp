#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace multmean {

struct SieveOptions {
  /// Limits above this use the segmented sieve.
  std::uint64_t segment_threshold = 10'000'000;
  std::uint32_t segment_size = 1u << 20;
  unsigned workers = 1;
};

/// Primes up to `limit` together with the smallest-prime-factor table for 2..limit.
/// Immutable once built.
class PrimeSet {
 public:
  PrimeSet() = default;

  std::uint64_t limit() const noexcept { return limit_; }
  std::span<const std::uint32_t> primes() const noexcept { return primes_; }
  std::size_t count() const noexcept { return primes_.size(); }

  /// Smallest prime factor of n, 2 <= n <= limit.
  std::uint32_t spf(std::uint64_t n) const { return spf_[n]; }
  /// Raw table indexed by n; entries 0 and 1 are 0.
  std::span<const std::uint32_t> spf_table() const noexcept { return spf_; }

  bool is_prime(std::uint64_t n) const { return n >= 2 && n <= limit_ && spf_[n] == n; }
  /// If n is p^k with k >= 1 returns p, else 0.
  std::uint32_t prime_power_base(std::uint64_t n) const;
  /// Number of primes <= x (x clamped to limit).
  std::size_t prime_pi(double x) const;

  /// Cache format: "SPF1", u32 reserved (0), u64 limit, then (limit + 1) little-endian u32
  /// entries for n = 0..limit.
  void save_spf(const std::filesystem::path& path) const;
  static PrimeSet load_spf(const std::filesystem::path& path);

  friend PrimeSet sieve_primes(std::uint64_t limit, const SieveOptions& options);

 private:
  static PrimeSet from_spf(std::uint64_t limit, std::vector<std::uint32_t> spf);

  std::uint64_t limit_ = 0;
  std::vector<std::uint32_t> primes_;
  std::vector<std::uint32_t> spf_;
};

/// Throws DomainError when limit < 2 or limit >= 2^32.
PrimeSet sieve_primes(std::uint64_t limit, const SieveOptions& options = {});

/// Weight attached to a prime power q = p^k; called with (q, p).
using PrimePowerWeight = std::function<double(std::uint64_t q, std::uint64_t p)>;

enum class PrimeDomain { Primes, PrimePowers };

/// Sum of weight(q) * log q over primes (or prime powers) q <= x.
double chebyshev_sum(const PrimeSet& primes, double x, const PrimePowerWeight& weight,
                     PrimeDomain domain = PrimeDomain::Primes);

/// sup_{1 <= y <= x} y^{-1} sum_{q <= y} weight(q) log q, over prime powers q.
/// The supremum only moves at prime powers, so one ascending pass suffices.
double chebyshev_supremum(const PrimeSet& primes, double x, const PrimePowerWeight& weight);

/// sum_{u < p <= v} weight(p) / p.
double prime_reciprocal_sum(const PrimeSet& primes, double u, double v,
                            const std::function<double(std::uint64_t)>& weight);

}  // namespace multmean
