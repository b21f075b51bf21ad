#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "multmean/multcore.hpp"
#include "multmean/numeric.hpp"
#include "multmean/primes.hpp"

namespace multmean {

/// Weight of a Hecke eigenform: an even integer k, or "normalized" (Euler factor 1 - a_p p^-s + p^-2s).
struct Weight {
  std::optional<int> k;

  static Weight integral(int k) { return Weight{k}; }
  static Weight normalized() { return Weight{std::nullopt}; }
  bool is_normalized() const { return !k.has_value(); }
  std::string label() const { return k ? std::to_string(*k) : std::string("normalized"); }
  friend bool operator==(const Weight&, const Weight&) = default;
};

enum class CoeffSourceKind { Eta24, HeckeExtend, ExternalFile };

struct CoeffSource {
  CoeffSourceKind kind = CoeffSourceKind::Eta24;
  std::filesystem::path path;  // ExternalFile only
  std::string sha256;          // ExternalFile only
  std::string label() const;
};

/// Exact Hecke eigenvalues a_1..a_limit (a_1 = 1). Integer or rational valued.
class CoeffTable {
 public:
  CoeffTable(std::vector<BigInt> values, Weight weight, CoeffSource source);
  CoeffTable(std::vector<BigRational> values, Weight weight, CoeffSource source);

  std::uint64_t limit() const noexcept;
  bool is_rational() const noexcept { return std::holds_alternative<std::vector<BigRational>>(values_); }
  /// Index 0 is padding. Throws std::logic_error when the table is rational.
  const std::vector<BigInt>& integers() const;
  const std::vector<BigRational>& rationals() const;

  int sign(std::uint64_t n) const;
  bool is_zero(std::uint64_t n) const { return sign(n) == 0; }
  double as_double(std::uint64_t n) const;
  std::string value_string(std::uint64_t n) const;

  const Weight& weight() const noexcept { return weight_; }
  const CoeffSource& source() const noexcept { return source_; }

  friend bool operator==(const CoeffTable& a, const CoeffTable& b) { return a.values_ == b.values_; }

 private:
  std::variant<std::vector<BigInt>, std::vector<BigRational>> values_;
  Weight weight_;
  CoeffSource source_;
};

/// a_n n^{-(k-1)/2} as doubles; identity conversion for normalized tables.
struct NormalizedCoeffs {
  std::uint64_t limit = 0;
  std::vector<double> values;  // index 0 padding
  Weight weight;
  double operator[](std::uint64_t n) const { return values[n]; }
};

struct ExpansionOptions {
  unsigned workers = 1;
  /// When false, a product that no longer fits in 128 bits raises OverflowError instead of
  /// switching to arbitrary-size integers.
  bool allow_bigint = true;
  /// When false, the 128-bit stage is skipped: products leave 64 bits straight for
  /// arbitrary-size integers (or fail, when allow_bigint is also false).
  bool allow_int128 = true;
};

/// Euler's pentagonal series: coefficients of prod_{j>=1} (1 - x^j) through x^degree.
std::vector<BigInt> pentagonal_series(std::uint64_t degree);
/// Jacobi: prod (1 - x^j)^3 = sum_{m>=0} (-1)^m (2m+1) x^{m(m+1)/2}, through x^degree.
std::vector<BigInt> jacobi_cube_series(std::uint64_t degree);

/// tau(1..limit) from x prod (1 - x^j)^24 = x (prod (1 - x^j)^3)^8. Each factor is the sparse
/// Jacobi series; intermediate products run in 64-bit, then 128-bit, then arbitrary-size
/// integers, promoting whenever a coefficient bound says the next product could overflow.
CoeffTable eta24_expand(std::uint64_t limit, const ExpansionOptions& options = {});

/// Same coefficients through 23 multiplications by the sparse pentagonal series, all in
/// arbitrary-size integers. Slow; an independent route for cross-checks.
std::vector<BigInt> eta24_expand_pentagonal(std::uint64_t limit);

/// Completes prime values by the Hecke recurrence and multiplicativity.
CoeffTable hecke_extend(const std::function<BigInt(std::uint64_t)>& prime_values, Weight weight,
                        std::uint64_t limit);
CoeffTable hecke_extend(const std::function<BigRational(std::uint64_t)>& prime_values, Weight weight,
                        std::uint64_t limit);

NormalizedCoeffs normalize(const CoeffTable& table);

/// g(p^k) = sign(a_{p^k}) extended multiplicatively; verified against sign(a_n) for every n.
SieveTable<double> sign_function(const CoeffTable& table);
/// g(n) = 1 if a_n != 0, else 0; built multiplicatively and verified.
SieveTable<double> nonvanish_indicator(const CoeffTable& table);
/// Indices n with a_n = 0, at most `max_count` of them.
std::vector<std::uint64_t> vanishing_indices(const CoeffTable& table, std::size_t max_count = 100);

/// Coefficient file: header "n,a_n", consecutive rows from n = 1, exact integers or "p/q".
/// Verifies a_1 = 1, multiplicativity for every n (naming the failing coprime pair) and the
/// Hecke recurrence of the declared weight at every prime power.
CoeffTable load_coeff_table(const std::filesystem::path& path, Weight declared);
void save_coeff_table(const CoeffTable& table, const std::filesystem::path& path);

/// SHA-256 of a file's bytes, lowercase hex.
std::string sha256_file(const std::filesystem::path& path);

enum class MomentWeight { LogP, Reciprocal, Unit };

/// sum_{p <= x} |a_p|^power * weight(p) over normalized coefficients.
double moment_sum(const NormalizedCoeffs& coeffs, const PrimeSet& primes, double x, int power,
                  MomentWeight weighting);

}  // namespace multmean
