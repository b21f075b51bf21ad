#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multmean/multcore.hpp"
#include "multmean/numeric.hpp"
#include "multmean/primes.hpp"

namespace multmean {

std::uint64_t euler_phi(std::uint64_t n);

/// Structure of (Z/DZ)^* as a product of cyclic factors, built by CRT over the prime powers of D.
/// Odd p^k contributes one factor generated by a primitive root; 4 contributes <-1>;
/// 2^k, k >= 3, contributes <-1> x <5>. Factors are ordered by prime, -1 before 5.
class CharacterGroup {
 public:
  struct Factor {
    std::uint64_t generator;  // residue mod D
    std::uint64_t order;
  };

  explicit CharacterGroup(std::uint64_t modulus);

  std::uint64_t modulus() const noexcept { return modulus_; }
  std::span<const Factor> factors() const noexcept { return factors_; }
  /// lcm of the factor orders; character values are powers of exp(2 pi i / exponent()).
  std::uint64_t exponent() const noexcept { return exponent_; }
  /// phi(D).
  std::uint64_t size() const noexcept { return size_; }
  /// Exponent vector of a mod D on the generators, or empty when gcd(a, D) > 1.
  std::span<const std::uint32_t> discrete_log(std::uint64_t a) const;
  bool is_unit(std::uint64_t a) const { return units_[a % modulus_] != 0; }

 private:
  std::uint64_t modulus_;
  std::uint64_t exponent_ = 1;
  std::uint64_t size_ = 1;
  std::vector<Factor> factors_;
  std::vector<std::uint8_t> units_;
  std::vector<std::uint32_t> logs_;  // modulus_ * factors_.size()
};

/// An element of Z[zeta_E] held reduced modulo the E-th cyclotomic polynomial.
class CyclotomicInteger {
 public:
  /// sum_j counts[j] zeta_E^j, counts.size() == E.
  CyclotomicInteger(std::uint64_t order, std::span<const std::int64_t> counts);

  bool is_zero() const;
  /// The value when it lies in Z.
  std::optional<std::int64_t> as_integer() const;
  std::uint64_t order() const noexcept { return order_; }

 private:
  std::uint64_t order_;
  std::vector<std::int64_t> coeffs_;  // degree < phi(order)
};

/// E-th cyclotomic polynomial, coefficients lowest degree first.
std::vector<std::int64_t> cyclotomic_polynomial(std::uint64_t order);

/// A Dirichlet character mod D. Values are stored as exact exponents over the group exponent.
class DirichletCharacter {
 public:
  DirichletCharacter(std::shared_ptr<const CharacterGroup> group, std::vector<std::uint64_t> exponents);

  std::uint64_t modulus() const noexcept { return group_->modulus(); }
  const CharacterGroup& group() const noexcept { return *group_; }
  /// Exponent e_i of each generator: chi(g_i) = exp(2 pi i e_i / ord(g_i)).
  std::span<const std::uint64_t> generator_exponents() const noexcept { return exponents_; }
  /// Position in the canonical order: lexicographic over generator exponents, first factor most significant.
  std::uint64_t index() const noexcept { return index_; }
  std::uint64_t order() const noexcept { return order_; }
  bool is_principal() const noexcept { return order_ == 1; }
  bool is_quadratic() const noexcept { return order_ == 2; }
  bool is_real() const noexcept { return order_ <= 2; }
  bool is_primitive() const noexcept { return primitive_; }

  /// chi(n) = exp(2 pi i k / group().exponent()); returns k, or nullopt when gcd(n, D) > 1.
  std::optional<std::uint64_t> value_exponent(std::uint64_t n) const;
  Complex operator()(std::uint64_t n) const;
  /// Value as an integer in {-1, 0, 1}; throws DomainError for non-real characters.
  int real_value(std::uint64_t n) const;

  DirichletCharacter conj() const;

 private:
  std::shared_ptr<const CharacterGroup> group_;
  std::vector<std::uint64_t> exponents_;
  std::vector<std::int64_t> value_exp_;  // per residue, -1 off the unit group
  std::vector<Complex> roots_;
  std::uint64_t index_ = 0;
  std::uint64_t order_ = 1;
  bool primitive_ = true;
};

/// All phi(D) characters mod D in canonical order (index 0 is principal). D = 0 throws DomainError.
std::vector<DirichletCharacter> enumerate_characters(std::uint64_t modulus);
DirichletCharacter character_by_index(std::uint64_t modulus, std::uint64_t index);

/// sum_{a mod D} chi(a) conj(psi(a)), exactly.
CyclotomicInteger character_inner_product(const DirichletCharacter& chi, const DirichletCharacter& psi);

/// v[n] chi(n).
template <class T>
SieveTable<Complex> twist(const SieveTable<T>& t, const DirichletCharacter& chi) {
  std::vector<Complex> out(t.limit() + 1, Complex(0));
  for (std::uint64_t n = 1; n <= t.limit(); ++n) {
    const Complex c = chi(n);
    if (c == Complex(0)) continue;
    if constexpr (std::is_same_v<T, Complex>) {
      out[n] = t[n] * c;
    } else {
      out[n] = real_part(t[n]) * c;
    }
  }
  return SieveTable<Complex>(t.spec_id() + "@chi(" + std::to_string(chi.modulus()) + "," +
                                 std::to_string(chi.index()) + ")",
                             std::move(out));
}

/// Exact twist by a real character; keeps the value type.
template <class T>
SieveTable<T> twist_real(const SieveTable<T>& t, const DirichletCharacter& chi) {
  if (!chi.is_real()) throw DomainError("twist_real: character is not real-valued");
  std::vector<T> out(t.limit() + 1, T(0));
  for (std::uint64_t n = 1; n <= t.limit(); ++n) {
    const int c = chi.real_value(n);
    if (c == 1) {
      out[n] = t[n];
    } else if (c == -1) {
      out[n] = -t[n];
    }
  }
  return SieveTable<T>(t.spec_id() + "@chi(" + std::to_string(chi.modulus()) + "," + std::to_string(chi.index()) +
                           ")",
                       std::move(out));
}

struct QuadraticEvidence {
  std::uint64_t character_index = 0;
  std::vector<double> checkpoints;     // ascending y values
  std::vector<double> partial_sums;    // sum_{p <= y, chi(p) = -1} g(p)/p at each checkpoint
  std::vector<double> increments;      // consecutive differences over the last windows
  bool flagged = false;
};

struct ExceptionalDetection {
  std::optional<DirichletCharacter> character;  // flagged character, if any
  std::vector<QuadraticEvidence> candidates;    // every quadratic character examined
  double threshold = 0.05;
  int window_count = 3;
  std::string note;  // always labels the verdict as evidence
};

/// Looks for a quadratic chi mod D whose series sum_{chi(p) = -1} g(p)/p appears convergent: the
/// increments over the last `window_count` decades below x must all fall under `threshold`.
ExceptionalDetection detect_exceptional_quadratic(const std::function<double(std::uint64_t)>& g_on_primes,
                                                  std::uint64_t modulus, double x, int window_count,
                                                  const PrimeSet& primes, double threshold = 0.05);

}  // namespace multmean
