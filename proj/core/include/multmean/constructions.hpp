#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "multmean/halasz.hpp"
#include "multmean/multcore.hpp"
#include "multmean/primes.hpp"

namespace multmean {

/// b_1 = 3/2, b_{n+1} = b_n (1 + 1/log b_n). Stored 0-based: b[0] is b_1.
struct BnSequence {
  std::vector<double> b;
  std::size_t count() const { return b.size(); }
  /// 1-based access matching the recurrence's indexing.
  double at(std::size_t n) const;
};

BnSequence generate_bn(std::size_t count);
/// Extends the sequence until it first exceeds `bound`.
BnSequence generate_bn_until(double bound);

/// exp(e^2), the lower end of beta's domain.
double beta_threshold();
/// (log log log y)^{1/2} for y >= exp(e^2).
double beta_fn(double y);

struct IntervalAssignment {
  std::size_t n = 0;  // interval (b_n, b_{n+1}]
  double lo = 0;
  double hi = 0;
  std::int64_t y = 0;         // floor(b_n (beta(b_{n+1}) - beta(b_n)))
  std::size_t prime_count = 0;
  std::size_t cap = 0;        // floor(c (pi(b_{n+1}) - pi(b_n)))
  std::size_t minus_count = 0;
  std::size_t plus_count = 0;
  bool truncated = false;     // y exceeded the cap
  std::size_t first_prime = 0;  // index into PrimeSet::primes()
};

/// The +-1/0 function on primes: in each interval (b_n, b_{n+1}] inside [exp(e^2), x_max] the first
/// y_n primes get -1, the next ones up to the cap get +1, the rest 0. Primes outside those intervals
/// get 0.
class ExampleThreeFunction {
 public:
  double c() const { return c_; }
  double x_max() const { return x_max_; }
  const std::vector<IntervalAssignment>& intervals() const { return intervals_; }
  /// Value at a prime p <= x_max (0 for non-primes).
  int value(std::uint64_t p) const;
  /// ZeroBeyondFirstPower spec with these prime values.
  MultSpec<double> as_spec() const;
  /// "p,value" rows for every prime <= x_max.
  void export_csv(const std::filesystem::path& path) const;

  friend ExampleThreeFunction build_example3(double c, double x_max, const PrimeSet& primes);

 private:
  double c_ = 0.5;
  double x_max_ = 0;
  std::vector<std::int8_t> values_;  // indexed by p
  std::vector<std::uint8_t> is_prime_;
  std::vector<IntervalAssignment> intervals_;
};

ExampleThreeFunction build_example3(double c, double x_max, const PrimeSet& primes);

struct BracketingResult {
  std::size_t n = 0;
  double b_n = 0;
  std::int64_t y = 0;
  double lower = 0;  // b_n (2 log b_n)^{-4}
  double upper = 0;  // b_n (log b_n)^{-2}
  bool holds = false;
};

/// Evaluates b_n (2 log b_n)^-4 <= y <= b_n (log b_n)^-2 at 1-based index n.
BracketingResult verify_bracketing(const BnSequence& seq, std::size_t n);

struct BracketingScan {
  std::optional<std::size_t> first_holding;  // smallest n from which it holds through the scan
  std::size_t scanned_from = 0;
  std::size_t scanned_to = 0;
  std::vector<std::size_t> failures;
};

/// Scans every n with b_threshold <= b_n and b_{n+1} defined, b_n <= b_max.
BracketingScan scan_bracketing(const BnSequence& seq, double b_max);

struct LambdaGrowth {
  double x = 0;
  double defect_sum = 0;   // sum_{p <= x} (|g(p)| - g(p)) / p
  double beta_x = 0;
  double defect_ratio = 0;  // defect_sum / (2 beta(x))
  double mass_ratio = 0;    // x^{-1} sum_{p <= x} |g(p)| log p
  LambdaReport lambda;
  double lambda_ratio = 0;  // lambda / (2 beta(x))
};

LambdaGrowth lambda_growth_diagnostic(const ExampleThreeFunction& f, const PrimeSet& primes, double x, double T,
                                      double grid_step = 0, int refine = 40);

}  // namespace multmean
