#include "multmean/primes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "multmean/errors.hpp"
#include "multmean/numeric.hpp"

namespace multmean {
namespace {

std::vector<std::uint32_t> linear_spf(std::uint64_t limit) {
  std::vector<std::uint32_t> spf(limit + 1, 0);
  std::vector<std::uint32_t> primes;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (spf[i] == 0) {
      spf[i] = static_cast<std::uint32_t>(i);
      primes.push_back(static_cast<std::uint32_t>(i));
    }
    for (std::uint32_t p : primes) {
      const std::uint64_t m = i * p;
      if (p > spf[i] || m > limit) break;
      spf[m] = p;
    }
  }
  return spf;
}

// Fills spf[lo, hi) using the base primes; anything left unmarked is prime.
void fill_segment(std::vector<std::uint32_t>& spf, std::uint64_t lo, std::uint64_t hi,
                  std::span<const std::uint32_t> base) {
  for (std::uint32_t p : base) {
    const std::uint64_t pp = std::uint64_t{p} * p;
    if (pp >= hi) break;
    std::uint64_t start = std::max(pp, (lo + p - 1) / p * p);
    for (std::uint64_t m = start; m < hi; m += p) {
      if (spf[m] == 0) spf[m] = p;
    }
  }
  for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n < hi; ++n) {
    if (spf[n] == 0) spf[n] = static_cast<std::uint32_t>(n);
  }
}

std::vector<std::uint32_t> segmented_spf(std::uint64_t limit, const SieveOptions& options) {
  std::vector<std::uint32_t> spf(limit + 1, 0);
  const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(limit))) + 1;
  const auto small = linear_spf(std::min(root, limit));
  std::vector<std::uint32_t> base;
  for (std::uint64_t i = 2; i < small.size(); ++i) {
    if (small[i] == i) base.push_back(static_cast<std::uint32_t>(i));
  }
  const std::uint64_t seg = std::max<std::uint32_t>(options.segment_size, 1024);
  const std::uint64_t segments = (limit + 1 + seg - 1) / seg;
  // Segments write disjoint slices of spf, so they can run concurrently.
  parallel_ranges(0, segments, options.workers, [&](std::uint64_t s0, std::uint64_t s1) {
    for (std::uint64_t s = s0; s < s1; ++s) {
      const std::uint64_t lo = s * seg;
      const std::uint64_t hi = std::min(limit + 1, lo + seg);
      fill_segment(spf, lo, hi, base);
    }
  });
  return spf;
}

}  // namespace

PrimeSet PrimeSet::from_spf(std::uint64_t limit, std::vector<std::uint32_t> spf) {
  PrimeSet set;
  set.limit_ = limit;
  set.spf_ = std::move(spf);
  for (std::uint64_t n = 2; n <= limit; ++n) {
    if (set.spf_[n] == n) set.primes_.push_back(static_cast<std::uint32_t>(n));
  }
  return set;
}

PrimeSet sieve_primes(std::uint64_t limit, const SieveOptions& options) {
  if (limit < 2) throw DomainError("sieve_primes: limit must be >= 2");
  if (limit >= (std::uint64_t{1} << 32)) throw DomainError("sieve_primes: limit must be < 2^32");
  auto spf = limit > options.segment_threshold ? segmented_spf(limit, options) : linear_spf(limit);
  return PrimeSet::from_spf(limit, std::move(spf));
}

std::uint32_t PrimeSet::prime_power_base(std::uint64_t n) const {
  if (n < 2 || n > limit_) return 0;
  const std::uint32_t p = spf_[n];
  while (n % p == 0) n /= p;
  return n == 1 ? p : 0;
}

std::size_t PrimeSet::prime_pi(double x) const {
  if (x < 2) return 0;
  const auto bound = static_cast<std::uint64_t>(std::min(std::floor(x), static_cast<double>(limit_)));
  return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), bound) - primes_.begin());
}

void PrimeSet::save_spf(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  static_assert(std::endian::native == std::endian::little, "SPF cache writer assumes little-endian host");
  const char magic[4] = {'S', 'P', 'F', '1'};
  const std::uint32_t reserved = 0;
  const std::uint64_t limit = limit_;
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&reserved), sizeof reserved);
  out.write(reinterpret_cast<const char*>(&limit), sizeof limit);
  out.write(reinterpret_cast<const char*>(spf_.data()),
            static_cast<std::streamsize>(spf_.size() * sizeof(std::uint32_t)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

PrimeSet PrimeSet::load_spf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  char magic[4];
  std::uint32_t reserved = 0;
  std::uint64_t limit = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&reserved), sizeof reserved);
  in.read(reinterpret_cast<char*>(&limit), sizeof limit);
  if (!in || std::memcmp(magic, "SPF1", 4) != 0) throw ParseError("not an SPF1 cache: " + path.string(), 0);
  if (limit < 2 || limit >= (std::uint64_t{1} << 32)) throw ParseError("SPF1 cache has invalid limit", 0);
  std::vector<std::uint32_t> spf(limit + 1);
  in.read(reinterpret_cast<char*>(spf.data()), static_cast<std::streamsize>(spf.size() * sizeof(std::uint32_t)));
  if (!in) throw ParseError("SPF1 cache truncated: " + path.string(), 0);
  for (std::uint64_t n = 2; n <= limit; ++n) {
    const std::uint32_t p = spf[n];
    if (p < 2 || n % p != 0 || (p != n && spf[p] != p)) {
      throw ParseError("SPF1 cache entry inconsistent at n=" + std::to_string(n), 0);
    }
  }
  return from_spf(limit, std::move(spf));
}

double chebyshev_sum(const PrimeSet& primes, double x, const PrimePowerWeight& weight, PrimeDomain domain) {
  if (x < 1) throw DomainError("chebyshev_sum: x must be >= 1");
  if (std::floor(x) > static_cast<double>(primes.limit())) throw DomainError("chebyshev_sum: x exceeds sieve limit");
  const auto bound = static_cast<std::uint64_t>(std::floor(x));
  KahanSum<double> acc;
  for (std::uint32_t p : primes.primes()) {
    if (p > bound) break;
    std::uint64_t q = p;
    while (true) {
      acc += weight(q, p) * std::log(static_cast<double>(q));
      if (domain == PrimeDomain::Primes || q > bound / p) break;
      q *= p;
    }
  }
  return acc.value();
}

double chebyshev_supremum(const PrimeSet& primes, double x, const PrimePowerWeight& weight) {
  if (x < 1) throw DomainError("chebyshev_supremum: x must be >= 1");
  const auto bound = static_cast<std::uint64_t>(std::floor(x));
  if (bound > primes.limit()) throw DomainError("chebyshev_supremum: x exceeds sieve limit");
  KahanSum<double> acc;
  double sup = 0.0;
  for (std::uint64_t n = 2; n <= bound; ++n) {
    const std::uint32_t p = primes.prime_power_base(n);
    if (p == 0) continue;
    acc += weight(n, p) * std::log(static_cast<double>(n));
    sup = std::max(sup, acc.value() / static_cast<double>(n));
  }
  return sup;
}

double prime_reciprocal_sum(const PrimeSet& primes, double u, double v,
                            const std::function<double(std::uint64_t)>& weight) {
  if (u < 0 || u > v) throw DomainError("prime_reciprocal_sum: need 0 <= u <= v");
  if (std::floor(v) > primes.limit()) throw DomainError("prime_reciprocal_sum: v exceeds sieve limit");
  KahanSum<double> acc;
  auto ps = primes.primes();
  auto it = std::upper_bound(ps.begin(), ps.end(), static_cast<std::uint64_t>(std::floor(u)),
                             [](std::uint64_t a, std::uint32_t b) { return a < b; });
  for (; it != ps.end() && *it <= v; ++it) {
    acc += weight(*it) / static_cast<double>(*it);
  }
  return acc.value();
}

}  // namespace multmean
