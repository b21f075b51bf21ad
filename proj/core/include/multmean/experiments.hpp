#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "multmean/characters.hpp"
#include "multmean/heckeforms.hpp"
#include "multmean/multcore.hpp"
#include "multmean/primes.hpp"

namespace multmean {

/// {1e4, 1e5, 1e6}
std::vector<double> default_checkpoints();
/// Sorted ascending; throws DomainError on an empty list, a value < 2 or one above `limit`.
std::vector<double> validate_checkpoints(std::vector<double> checkpoints, std::uint64_t limit);

// ---------------------------------------------------------------------------
// Sign equidistribution

struct SignCheckpoint {
  double x = 0;
  std::uint64_t nonvanishing = 0;  // S(x)
  std::uint64_t negative = 0;
  std::uint64_t positive = 0;
  double frac_neg = 0;
  double frac_pos = 0;
  double deviation = 0;  // |frac_neg - 1/2|
};

struct SignReport {
  std::vector<SignCheckpoint> checkpoints;
  double gamma_const = 1.0 / 24000.0;  // recorded only
  double slack = 0.01;
  bool trend_nonincreasing = true;  // deviation(x_{i+1}) <= deviation(x_i) + slack
  bool generic = true;              // false when one sign never occurs
  std::vector<std::uint64_t> vanishing;  // n <= max checkpoint with a_n = 0
  bool passed() const { return trend_nonincreasing && generic; }
};

SignReport run_sign_equidistribution(const CoeffTable& coeffs, std::vector<double> checkpoints, double slack = 0.01);
/// Same report for any real table: counts the sign of t[n].
SignReport run_sign_equidistribution(const SieveTable<double>& t, std::vector<double> checkpoints, double slack = 0.01);

// ---------------------------------------------------------------------------
// Residue-class densities

struct ClassShare {
  std::uint64_t residue = 0;
  double sum = 0;
  double gamma_hat = 0;
  std::uint64_t terms = 0;  // n <= x in the class with nonzero weight
  bool small_sample = false;
};

struct DensityCheckpoint {
  double x = 0;
  double s_d = 0;     // sum over n <= x coprime to D
  double scaled = 0;  // s_d (log x)^{1/2} / x
  std::vector<ClassShare> classes;
  double partition_error = 0;  // |sum gamma_hat - 1|
  double max_uniform_error = 0;  // max_a |gamma_hat(a) phi(D) - 1|
};

struct CaseTwoPrediction {
  std::uint64_t character_index = 0;
  double psi_cutoff = 0;
  double psi_product = 0;  // prod over p <= cutoff, chi(p) = -1, of psi_p
  std::vector<std::pair<std::uint64_t, double>> predicted;  // residue -> gamma(a)
  double max_deviation = 0;  // against the last checkpoint's gamma_hat
};

struct DensityReport {
  std::uint64_t modulus = 1;
  std::string weighting;  // "indicator" or "abs-normalized"
  std::vector<DensityCheckpoint> checkpoints;
  std::optional<ExceptionalDetection> exceptional;
  std::optional<CaseTwoPrediction> case_two;
  bool nonnegative = true;
  bool degenerate = false;  // S_D(x) = 0 at some checkpoint
  std::size_t small_sample_threshold = 100;
};

struct DensityOptions {
  bool detect = true;
  double psi_cutoff = 1e4;
  std::size_t small_sample_threshold = 100;
};

/// Residue-class shares of a nonnegative table (normally an indicator). Runs the exceptional
/// quadratic character search at the top checkpoint and, when a character is flagged, the
/// truncated psi_p product prediction.
DensityReport run_progression_density(const SieveTable<double>& g, std::uint64_t modulus,
                                      std::vector<double> checkpoints, const PrimeSet& primes,
                                      const DensityOptions& options = {});

/// Same report with weights |a^_n|.
DensityReport run_abs_mean_progressions(const NormalizedCoeffs& nc, std::uint64_t modulus,
                                        std::vector<double> checkpoints, const PrimeSet& primes,
                                        const DensityOptions& options = {});

struct ScalingCheck {
  std::vector<double> x;
  std::vector<double> scaled;        // S(x) (log x)^{1/2} / x
  std::vector<double> step_ratios;   // scaled[i+1] / scaled[i]
  bool degenerate = false;           // g vanishes beyond 1
  /// max |step_ratio - 1| over steps starting at or above `from`.
  double drift_from(double from) const;
};

ScalingCheck run_scaling_check(const SieveTable<double>& g, std::vector<double> checkpoints);

// ---------------------------------------------------------------------------
// Prime-sum inequality chain

struct Lemma10Checkpoint {
  double x = 0;
  double L = 0;  // log log x
  double square_sum = 0;   // sum_{|a_p| <= sqrt 6} a_p^2 / p
  double abs_sum = 0;      // sum_{|a_p| <= sqrt 6} |a_p| / p
  double negative_sum = 0; // sum_{a_p < 0} 1/p
  double full_square_sum = 0;  // sum_p a_p^2 / p, for the hypothesis check
  double diff_square = 0;  // square_sum - (1 - 2/6) L
  double diff_abs = 0;     // abs_sum - (2/3)(1/sqrt 6) L
  double diff_negative = 0;  // negative_sum - 6^{-3} L
};

struct Lemma10Report {
  std::vector<Lemma10Checkpoint> checkpoints;
  bool hypothesis_failure = false;  // sum a_p^2/p / L outside [0.5, 1.5]
  double drift_square = 0;  // max - min across checkpoints
  double drift_abs = 0;
  double drift_negative = 0;
};

Lemma10Report run_lemma10_chain(const NormalizedCoeffs& nc, const PrimeSet& primes, std::vector<double> checkpoints);

// ---------------------------------------------------------------------------
// Wirsing asymptotic

struct WirsingCheckpoint {
  double x = 0;
  double sum = 0;        // sum_{n <= x} lambda(n)
  double tau_hat = 0;    // sum_{p <= x} lambda(p) log p / p / log x
  double euler = 0;      // prod_{p <= x} (1 + sum_{p^k <= x} lambda(p^k) / p^k)
  double predicted = 0;  // e^{-kappa tau} / Gamma(tau) x / log x * euler
  double ratio = 0;
};

struct WirsingReport {
  std::string spec_id;
  std::optional<double> declared_tau;
  double tau_used = 0;
  std::vector<WirsingCheckpoint> checkpoints;
  /// max |ratio(x_i) - ratio(x_j)| over checkpoints at or above `from`.
  double spread_from(double from) const;
};

/// Ratio of sum lambda(n) to the Wirsing main term. Uses `declared_tau` when given, otherwise the
/// empirical tau at the top checkpoint. A tau <= 0 is a DomainError.
WirsingReport run_wirsing_check(const SieveTable<double>& lambda, const PrimeSet& primes,
                                std::vector<double> checkpoints, std::optional<double> declared_tau = std::nullopt);

// ---------------------------------------------------------------------------
// D sweep

struct SweepRow {
  std::uint64_t modulus = 0;
  double max_error = 0;  // max_a |gamma_hat(a) phi(D) - 1|
  double envelope = 0;   // (log D / log x)^{1/49}
  std::size_t small_classes = 0;
  std::uint64_t min_class_terms = 0;
};

struct SweepReport {
  double x = 0;
  std::vector<SweepRow> rows;
  bool all_finite = true;
  void write_csv(const std::string& path) const;
};

SweepReport run_d_sweep(const SieveTable<double>& g, const std::vector<std::uint64_t>& moduli, double x,
                        std::size_t small_sample_threshold = 100);

// ---------------------------------------------------------------------------
// Jobs

/// Runs independent jobs on up to `workers` threads; the first exception is rethrown after all
/// jobs finish.
void run_jobs(const std::vector<std::function<void()>>& jobs, unsigned workers);

}  // namespace multmean
