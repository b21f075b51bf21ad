#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "multmean/errors.hpp"
#include "multmean/numeric.hpp"
#include "multmean/primes.hpp"

namespace multmean {

// ---------------------------------------------------------------------------
// Value types

template <class T>
struct ValueTraits;

template <>
struct ValueTraits<double> {
  static constexpr std::string_view mode = "float";
  static std::string format(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }
  static double parse(std::string_view s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad float");
    return v;
  }
};

/// Complex values are written as "re:im".
template <>
struct ValueTraits<Complex> {
  static constexpr std::string_view mode = "complex";
  static std::string format(Complex v) {
    return ValueTraits<double>::format(v.real()) + ":" + ValueTraits<double>::format(v.imag());
  }
  static Complex parse(std::string_view s) {
    const auto colon = s.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("bad complex");
    return {ValueTraits<double>::parse(s.substr(0, colon)), ValueTraits<double>::parse(s.substr(colon + 1))};
  }
};

template <>
struct ValueTraits<BigInt> {
  static constexpr std::string_view mode = "exact-integer";
  static std::string format(const BigInt& v) { return v.str(); }
  static BigInt parse(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty integer");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("bad integer");
    for (std::size_t j = i; j < s.size(); ++j) {
      if (s[j] < '0' || s[j] > '9') throw std::invalid_argument("bad integer");
    }
    return BigInt(std::string(s));
  }
};

/// Rationals are written "p/q" (or a bare integer).
template <>
struct ValueTraits<BigRational> {
  static constexpr std::string_view mode = "exact-rational";
  static std::string format(const BigRational& v) { return to_decimal(v); }
  static BigRational parse(std::string_view s) {
    const auto slash = s.find('/');
    if (slash == std::string_view::npos) return BigRational(ValueTraits<BigInt>::parse(s));
    const BigInt den = ValueTraits<BigInt>::parse(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return BigRational(ValueTraits<BigInt>::parse(s.substr(0, slash)), den);
  }
};

template <class T>
inline constexpr bool is_exact_value_v = std::is_same_v<T, BigInt> || std::is_same_v<T, BigRational>;

template <class T>
double real_part(const T& v) {
  if constexpr (std::is_same_v<T, Complex>) {
    return v.real();
  } else if constexpr (std::is_same_v<T, double>) {
    return v;
  } else {
    return to_double(v);
  }
}

// ---------------------------------------------------------------------------
// MultSpec: a multiplicative function given by its values on prime powers

struct ZeroBeyondFirstPower {};
struct CompletelyMultiplicative {};
/// g(p^k) = g(p)^k / k!
struct Exponential {};
/// a(p^{j+1}) = a(p) a(p^j) - m a(p^{j-1}); m = p^{k-1} for weight k, 1 when normalized.
struct HeckeRecurrence {
  std::optional<int> weight;
  static HeckeRecurrence normalized() { return {std::nullopt}; }
  static HeckeRecurrence integral(int k) { return {k}; }
};
/// Every prime power's value given explicitly (including the primes themselves).
template <class T>
struct ExplicitTable {
  std::map<std::uint64_t, T> values;
};

template <class T>
using Completion = std::variant<ZeroBeyondFirstPower, CompletelyMultiplicative, Exponential, HeckeRecurrence,
                                ExplicitTable<T>>;

template <class T>
struct MultSpec {
  std::string id;
  std::function<T(std::uint64_t)> prime_rule;
  Completion<T> completion = ZeroBeyondFirstPower{};
};

/// Dense values v[1..limit] of a multiplicative function; v[0] is an unused zero.
template <class T>
class SieveTable {
 public:
  SieveTable() = default;
  SieveTable(std::string spec_id, std::vector<T> values) : spec_id_(std::move(spec_id)), values_(std::move(values)) {
    if (values_.size() < 2) throw DomainError("SieveTable needs at least v[1]");
  }

  std::uint64_t limit() const noexcept { return values_.empty() ? 0 : values_.size() - 1; }
  const T& operator[](std::uint64_t n) const { return values_[n]; }
  const T& at(std::uint64_t n) const {
    if (n == 0 || n > limit()) throw DomainError("SieveTable index out of range: " + std::to_string(n));
    return values_[n];
  }
  /// Indexed by n; element 0 is padding.
  std::span<const T> raw() const noexcept { return values_; }
  const std::string& spec_id() const noexcept { return spec_id_; }
  static constexpr std::string_view mode() { return ValueTraits<T>::mode; }

  friend bool operator==(const SieveTable& a, const SieveTable& b) { return a.values_ == b.values_; }

 private:
  std::string spec_id_;
  std::vector<T> values_;
};

namespace detail {

inline std::uint64_t floor_to_index(double x) {
  return x < 1 ? 0 : static_cast<std::uint64_t>(std::floor(x));
}

template <class T>
T power_of(std::uint64_t p, int e) {
  if constexpr (std::is_same_v<T, BigInt>) {
    return boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(e));
  } else if constexpr (std::is_same_v<T, BigRational>) {
    return BigRational(boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(e)));
  } else {
    return T(std::pow(static_cast<double>(p), e));
  }
}

template <class T>
T prime_power_value(const MultSpec<T>& spec, std::uint64_t p, std::uint64_t q, unsigned k, const T& at_p,
                    const T& at_prev, const T& at_prev2) {
  return std::visit(
      [&](const auto& c) -> T {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ZeroBeyondFirstPower>) {
          return T(0);
        } else if constexpr (std::is_same_v<C, CompletelyMultiplicative>) {
          return at_prev * at_p;
        } else if constexpr (std::is_same_v<C, Exponential>) {
          if constexpr (std::is_same_v<T, BigInt>) {
            throw SpecError("exponential completion needs rational or floating values (" + spec.id + ")");
          } else {
            return at_prev * at_p / T(static_cast<int>(k));
          }
        } else if constexpr (std::is_same_v<C, HeckeRecurrence>) {
          if (c.weight) {
            if (*c.weight < 2 || *c.weight % 2 != 0) throw SpecError("Hecke weight must be a positive even integer");
            return at_p * at_prev - power_of<T>(p, *c.weight - 1) * at_prev2;
          }
          return at_p * at_prev - at_prev2;
        } else {
          auto it = c.values.find(q);
          if (it == c.values.end()) {
            throw SpecError("spec '" + spec.id + "' has no value for prime power " + std::to_string(q) + " = " +
                            std::to_string(p) + "^" + std::to_string(k));
          }
          return it->second;
        }
      },
      spec.completion);
}

template <class T>
T value_at_prime(const MultSpec<T>& spec, std::uint64_t p) {
  if (const auto* table = std::get_if<ExplicitTable<T>>(&spec.completion)) {
    auto it = table->values.find(p);
    if (it == table->values.end()) {
      throw SpecError("spec '" + spec.id + "' has no value for prime power " + std::to_string(p) + " = " +
                      std::to_string(p) + "^1");
    }
    return it->second;
  }
  if (!spec.prime_rule) throw SpecError("spec '" + spec.id + "' has no prime rule");
  return spec.prime_rule(p);
}

}  // namespace detail

/// Values of `spec` on 1..limit through the smallest-prime-factor decomposition n = p^k m.
template <class T>
SieveTable<T> sieve_values(const MultSpec<T>& spec, std::uint64_t limit, const PrimeSet& primes) {
  if (limit < 1) throw DomainError("sieve_values: limit must be >= 1");
  if (limit >= 2 && primes.limit() < limit) throw DomainError("sieve_values: prime set too small");
  std::vector<T> v(limit + 1, T(0));
  v[1] = T(1);
  // p-part of n: the largest power of spf(n) dividing n.
  std::vector<std::uint32_t> ppart(limit + 1, 1);
  for (std::uint64_t n = 2; n <= limit; ++n) {
    const std::uint32_t p = primes.spf(n);
    const std::uint64_t m = n / p;
    ppart[n] = (m % p == 0) ? ppart[m] * p : p;
    const std::uint64_t rest = n / ppart[n];
    if (rest != 1) {
      v[n] = v[ppart[n]] * v[rest];
      continue;
    }
    if (m == 1) {
      v[n] = detail::value_at_prime(spec, p);
      continue;
    }
    unsigned k = 1;
    for (std::uint64_t q = p; q < n; q *= p) ++k;
    const std::uint64_t prev2 = m / p;  // p^{k-2}, equals 1 when k == 2
    v[n] = detail::prime_power_value(spec, p, n, k, v[p], v[m], v[prev2]);
  }
  return SieveTable<T>(spec.id, std::move(v));
}

template <class T>
SieveTable<T> sieve_values(const MultSpec<T>& spec, std::uint64_t limit) {
  if (limit < 2) return sieve_values(spec, limit, PrimeSet{});
  return sieve_values(spec, limit, sieve_primes(limit));
}

/// (f*g)(n) = sum_{d | n} f(d) g(n/d).
template <class T>
SieveTable<T> dirichlet_convolve(const SieveTable<T>& f, const SieveTable<T>& g) {
  if (f.limit() != g.limit()) throw DomainError("dirichlet_convolve: limit mismatch");
  const std::uint64_t limit = f.limit();
  std::vector<T> h(limit + 1, T(0));
  for (std::uint64_t d = 1; d <= limit; ++d) {
    if (f[d] == T(0)) continue;
    for (std::uint64_t e = 1, m = d; m <= limit; ++e, m += d) {
      h[m] += f[d] * g[e];
    }
  }
  return SieveTable<T>("(" + f.spec_id() + ")*(" + g.spec_id() + ")", std::move(h));
}

/// M(x) = sum_{n <= x} g(n).
template <class T>
T mean_sum(const SieveTable<T>& t, double x) {
  if (std::floor(x) > static_cast<double>(t.limit())) throw DomainError("mean_sum: x exceeds table limit");
  const std::uint64_t n_max = detail::floor_to_index(x);
  if constexpr (std::is_same_v<T, double>) {
    KahanSum<double> acc;
    for (std::uint64_t n = 1; n <= n_max; ++n) acc += t[n];
    return acc.value();
  } else if constexpr (std::is_same_v<T, Complex>) {
    ComplexKahanSum acc;
    for (std::uint64_t n = 1; n <= n_max; ++n) acc += t[n];
    return acc.value();
  } else {
    T acc(0);
    for (std::uint64_t n = 1; n <= n_max; ++n) acc += t[n];
    return acc;
  }
}

/// N(x) = sum_{n <= x} g(n) log n, in double precision.
template <class T>
auto log_weighted_sum(const SieveTable<T>& t, double x) {
  if (std::floor(x) > static_cast<double>(t.limit())) throw DomainError("log_weighted_sum: x exceeds table limit");
  const std::uint64_t n_max = detail::floor_to_index(x);
  if constexpr (std::is_same_v<T, Complex>) {
    ComplexKahanSum acc;
    for (std::uint64_t n = 2; n <= n_max; ++n) acc += t[n] * std::log(static_cast<double>(n));
    return acc.value();
  } else {
    KahanSum<double> acc;
    for (std::uint64_t n = 2; n <= n_max; ++n) acc += real_part(t[n]) * std::log(static_cast<double>(n));
    return acc.value();
  }
}

/// M(u) - g(1) - N(u)/log u - int_2^u N(w) / (w log^2 w) dw, with the integral taken exactly on
/// each piece where N is constant. Evaluated in extended precision.
double partial_summation_residual(const SieveTable<double>& t, double u);

struct Lemma19Result {
  double lhs = 0;
  double rhs = 0;
  double delta = 0;
  double harmonic = 0;  // sum_{n <= x} g(n)/n
  bool holds() const { return lhs <= rhs; }
};

/// lhs = sum_{2 <= n <= x} g(n); rhs = (x/log x + 10x/log^2 x) * Delta * sum_{n <= x} g(n)/n
/// with Delta the prime-power Chebyshev supremum. Table must be nonnegative, 2 <= x <= limit.
Lemma19Result lemma19_evaluate(const SieveTable<double>& t, double x, const PrimeSet& primes);

/// (sum_{n<=x} g(n)/n) / prod_{p<=x} (1 + g(p)/p).
double lemma20_ratio(const SieveTable<double>& t, double x, const PrimeSet& primes);

struct Lemma21Result {
  double ratio = 0;        // M(x) / (x exp(-sum_{p<=x} (1-g(p))/p))
  double empirical_c = 0;  // x^{-1} sum_{p<=x} g(p) log p
};
Lemma21Result lemma21_ratio(const SieveTable<double>& t, double x, const PrimeSet& primes);

// ---------------------------------------------------------------------------
// CSV persistence: "# spec_id=<id> mode=<mode>" then "n,value" then one row per n.

template <class T>
void export_csv(const SieveTable<T>& t, std::ostream& out) {
  out << "# spec_id=" << t.spec_id() << " mode=" << ValueTraits<T>::mode << "\n";
  out << "n,value\n";
  for (std::uint64_t n = 1; n <= t.limit(); ++n) out << n << ',' << ValueTraits<T>::format(t[n]) << '\n';
}

template <class T>
void export_csv(const SieveTable<T>& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  export_csv(t, out);
}

template <class T>
SieveTable<T> import_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind("# spec_id=", 0) != 0) throw ParseError("missing '# spec_id=' header", 1);
  const auto mode_pos = line.rfind(" mode=");
  if (mode_pos == std::string::npos) throw ParseError("header lacks mode", 1);
  std::string spec_id = line.substr(10, mode_pos - 10);
  const std::string mode = line.substr(mode_pos + 6);
  if (mode != ValueTraits<T>::mode) throw ParseError("mode '" + mode + "' does not match requested table type", 1);
  ++lineno;
  if (!std::getline(in, line) || line != "n,value") throw ParseError("expected column header 'n,value'", lineno);
  std::vector<T> values{T(0)};
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'n,value'", lineno);
    std::uint64_t n = 0;
    auto res = std::from_chars(line.data(), line.data() + comma, n);
    if (res.ec != std::errc{} || res.ptr != line.data() + comma) throw ParseError("bad index", lineno);
    if (n != values.size()) throw ParseError("rows must be consecutive starting at n=1", lineno);
    try {
      values.push_back(ValueTraits<T>::parse(std::string_view(line).substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError("bad value", lineno);
    }
  }
  if (values.size() < 2) throw ParseError("table is empty", lineno);
  return SieveTable<T>(std::move(spec_id), std::move(values));
}

template <class T>
SieveTable<T> import_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return import_csv<T>(in);
}

/// Checks v[mn] == v[m] v[n] on `pairs` random coprime pairs with mn <= limit. Returns the first
/// failing pair. Floating tables compare with relative tolerance `rel_tol`.
template <class T>
std::optional<std::pair<std::uint64_t, std::uint64_t>> find_multiplicativity_failure(const SieveTable<T>& t,
                                                                                     std::size_t pairs,
                                                                                     std::uint64_t seed,
                                                                                     double rel_tol = 1e-12) {
  const std::uint64_t limit = t.limit();
  if (limit < 6) return std::nullopt;
  std::mt19937_64 rng(seed);
  std::size_t checked = 0;
  std::size_t attempts = 0;
  while (checked < pairs && attempts < pairs * 200) {
    ++attempts;
    std::uniform_int_distribution<std::uint64_t> first(2, limit / 2);
    const std::uint64_t m = first(rng);
    std::uniform_int_distribution<std::uint64_t> second(2, std::max<std::uint64_t>(2, limit / m));
    const std::uint64_t n = second(rng);
    if (m * n > limit || std::gcd(m, n) != 1) continue;
    ++checked;
    const T lhs = t[m * n];
    const T rhs = t[m] * t[n];
    bool ok;
    if constexpr (is_exact_value_v<T>) {
      ok = lhs == rhs;
    } else {
      ok = std::abs(lhs - rhs) <= rel_tol * std::max(1.0, std::abs(rhs));
    }
    if (!ok) return std::pair{m, n};
  }
  return std::nullopt;
}

}  // namespace multmean
