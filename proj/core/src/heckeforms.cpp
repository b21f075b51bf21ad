#include "multmean/heckeforms.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "multmean/errors.hpp"

namespace multmean {
namespace {

using Int128 = __int128;

struct SparseTerm {
  std::uint64_t exponent;
  std::int64_t coeff;
};

std::vector<SparseTerm> pentagonal_terms(std::uint64_t degree) {
  std::vector<SparseTerm> terms{{0, 1}};
  for (std::uint64_t k = 1;; ++k) {
    const std::uint64_t e1 = k * (3 * k - 1) / 2;
    const std::uint64_t e2 = k * (3 * k + 1) / 2;
    if (e1 > degree) break;
    const std::int64_t sign = (k % 2 == 0) ? 1 : -1;
    terms.push_back({e1, sign});
    if (e2 <= degree) terms.push_back({e2, sign});
  }
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.exponent < b.exponent; });
  return terms;
}

std::vector<SparseTerm> jacobi_terms(std::uint64_t degree) {
  std::vector<SparseTerm> terms;
  for (std::uint64_t m = 0;; ++m) {
    const std::uint64_t e = m * (m + 1) / 2;
    if (e > degree) break;
    const auto c = static_cast<std::int64_t>(2 * m + 1);
    terms.push_back({e, m % 2 == 0 ? c : -c});
  }
  return terms;
}

template <class T>
std::vector<BigInt> densify(const std::vector<SparseTerm>& terms, std::uint64_t degree) {
  std::vector<BigInt> out(degree + 1);
  for (const auto& t : terms) out[t.exponent] += t.coeff;
  return out;
}

template <class T>
long double max_abs(const std::vector<T>& v) {
  long double m = 0;
  for (const auto& x : v) {
    if constexpr (std::is_same_v<T, BigInt>) {
      m = std::max(m, boost::multiprecision::abs(x).template convert_to<long double>());
    } else {
      const long double a = x < 0 ? -static_cast<long double>(x) : static_cast<long double>(x);
      m = std::max(m, a);
    }
  }
  return m;
}

// out[n] = sum_k coeff_k * a[n - exponent_k], n <= degree. Output is tiled so the input window
// for consecutive sparse terms stays cache resident.
template <class In, class Out>
std::vector<Out> multiply_sparse(const std::vector<In>& a, const std::vector<SparseTerm>& terms,
                                 std::uint64_t degree, unsigned workers) {
  std::vector<Out> out(degree + 1, Out(0));
  constexpr std::uint64_t kBlock = 1 << 14;
  const std::uint64_t blocks = (degree + kBlock) / kBlock;
  parallel_ranges(0, blocks, workers, [&](std::uint64_t b0, std::uint64_t b1) {
    for (std::uint64_t b = b0; b < b1; ++b) {
      const std::uint64_t lo = b * kBlock;
      const std::uint64_t hi = std::min(degree + 1, lo + kBlock);
      for (const auto& term : terms) {
        if (term.exponent >= hi) break;
        const std::uint64_t start = std::max(lo, term.exponent);
        const In* src = a.data() + (start - term.exponent);
        Out* dst = out.data() + start;
        const std::uint64_t len = hi - start;
        if constexpr (std::is_same_v<Out, BigInt>) {
          for (std::uint64_t i = 0; i < len; ++i) dst[i] += BigInt(src[i]) * term.coeff;
        } else {
          const Out c = term.coeff;
          for (std::uint64_t i = 0; i < len; ++i) dst[i] += c * static_cast<Out>(src[i]);
        }
      }
    }
  });
  return out;
}

using Stage = std::variant<std::vector<std::int64_t>, std::vector<Int128>, std::vector<BigInt>>;

template <class From, class To>
std::vector<To> widen(const std::vector<From>& v) {
  std::vector<To> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(To(x));
  return out;
}

Stage multiply_stage(const Stage& in, const std::vector<SparseTerm>& terms, std::uint64_t degree,
                     const ExpansionOptions& options) {
  long double coeff_mass = 0;
  for (const auto& t : terms) coeff_mass += std::abs(static_cast<long double>(t.coeff));
  const long double bound = std::visit([](const auto& v) { return max_abs(v); }, in) * coeff_mass;
  const long double int64_safe = std::ldexp(1.0L, 62);
  const long double int128_safe = std::ldexp(1.0L, 125);

  if (bound < int64_safe) {
    if (const auto* v = std::get_if<std::vector<std::int64_t>>(&in)) {
      return multiply_sparse<std::int64_t, std::int64_t>(*v, terms, degree, options.workers);
    }
  }
  if (options.allow_int128 && bound < int128_safe) {
    if (const auto* v = std::get_if<std::vector<std::int64_t>>(&in)) {
      return multiply_sparse<std::int64_t, Int128>(*v, terms, degree, options.workers);
    }
    if (const auto* v = std::get_if<std::vector<Int128>>(&in)) {
      return multiply_sparse<Int128, Int128>(*v, terms, degree, options.workers);
    }
  }
  if (!options.allow_bigint) {
    throw OverflowError(std::string("eta24_expand: coefficients exceed the ") +
                        (options.allow_int128 ? "128" : "64") + "-bit range at degree " + std::to_string(degree));
  }
  return std::visit(
      [&](const auto& v) -> Stage {
        using T = typename std::decay_t<decltype(v)>::value_type;
        if constexpr (std::is_same_v<T, BigInt>) {
          return multiply_sparse<BigInt, BigInt>(v, terms, degree, options.workers);
        } else {
          return multiply_sparse<BigInt, BigInt>(widen<T, BigInt>(v), terms, degree, options.workers);
        }
      },
      in);
}

std::string hex_digest(const unsigned char* data, unsigned len) {
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(data[i]);
  return os.str();
}

// Values of a multiplicative function from its prime-power values, via n = (p-part) * rest.
std::vector<double> assemble_multiplicative(const PrimeSet& primes, std::uint64_t limit,
                                            const std::function<double(std::uint64_t)>& at_prime_power) {
  std::vector<double> v(limit + 1, 0.0);
  v[1] = 1.0;
  std::vector<std::uint32_t> ppart(limit + 1, 1);
  for (std::uint64_t n = 2; n <= limit; ++n) {
    const std::uint32_t p = primes.spf(n);
    const std::uint64_t m = n / p;
    ppart[n] = (m % p == 0) ? ppart[m] * p : p;
    const std::uint64_t rest = n / ppart[n];
    v[n] = rest == 1 ? at_prime_power(n) : v[ppart[n]] * v[rest];
  }
  return v;
}

PrimeSet primes_for(std::uint64_t limit) { return sieve_primes(std::max<std::uint64_t>(limit, 2)); }

template <class T>
void verify_table(const std::vector<T>& a, const Weight& weight, const PrimeSet& primes) {
  const std::uint64_t limit = a.size() - 1;
  if (a[1] != T(1)) throw SpecError("coefficient table must have a_1 = 1 (found " + to_decimal(a[1]) + ")");
  std::vector<std::uint32_t> ppart(limit + 1, 1);
  for (std::uint64_t n = 2; n <= limit; ++n) {
    const std::uint32_t p = primes.spf(n);
    const std::uint64_t m = n / p;
    ppart[n] = (m % p == 0) ? ppart[m] * p : p;
    const std::uint64_t q = ppart[n];
    const std::uint64_t rest = n / q;
    if (rest != 1) {
      if (a[n] != a[q] * a[rest]) throw MultiplicativityError(q, rest);
      continue;
    }
    if (q == p) continue;
    const std::uint64_t prev = q / p;
    const std::uint64_t prev2 = prev / p;
    T second = a[prev2];
    if (weight.k) second *= T(boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(*weight.k - 1)));
    if (a[q] != a[p] * a[prev] - second) {
      throw SpecError("Hecke recurrence for weight " + weight.label() + " fails at prime power " + std::to_string(q));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string CoeffSource::label() const {
  switch (kind) {
    case CoeffSourceKind::Eta24:
      return "eta24";
    case CoeffSourceKind::HeckeExtend:
      return "hecke-extend";
    case CoeffSourceKind::ExternalFile:
      return "file:" + path.string();
  }
  return "unknown";
}

CoeffTable::CoeffTable(std::vector<BigInt> values, Weight weight, CoeffSource source)
    : values_(std::move(values)), weight_(weight), source_(std::move(source)) {
  if (std::get<0>(values_).size() < 2) throw DomainError("CoeffTable needs a_1");
}

CoeffTable::CoeffTable(std::vector<BigRational> values, Weight weight, CoeffSource source)
    : values_(std::move(values)), weight_(weight), source_(std::move(source)) {
  if (std::get<1>(values_).size() < 2) throw DomainError("CoeffTable needs a_1");
}

std::uint64_t CoeffTable::limit() const noexcept {
  return std::visit([](const auto& v) { return static_cast<std::uint64_t>(v.size() - 1); }, values_);
}

const std::vector<BigInt>& CoeffTable::integers() const {
  if (is_rational()) throw std::logic_error("CoeffTable holds rationals");
  return std::get<0>(values_);
}

const std::vector<BigRational>& CoeffTable::rationals() const {
  if (!is_rational()) throw std::logic_error("CoeffTable holds integers");
  return std::get<1>(values_);
}

int CoeffTable::sign(std::uint64_t n) const {
  return std::visit([n](const auto& v) { return v[n].sign(); }, values_);
}

double CoeffTable::as_double(std::uint64_t n) const {
  return std::visit([n](const auto& v) { return to_double(v[n]); }, values_);
}

std::string CoeffTable::value_string(std::uint64_t n) const {
  return std::visit([n](const auto& v) { return to_decimal(v[n]); }, values_);
}

// ---------------------------------------------------------------------------

std::vector<BigInt> pentagonal_series(std::uint64_t degree) {
  return densify<BigInt>(pentagonal_terms(degree), degree);
}

std::vector<BigInt> jacobi_cube_series(std::uint64_t degree) {
  return densify<BigInt>(jacobi_terms(degree), degree);
}

CoeffTable eta24_expand(std::uint64_t limit, const ExpansionOptions& options) {
  if (limit < 1) throw DomainError("eta24_expand: limit must be >= 1");
  if (limit >= (std::uint64_t{1} << 32)) throw DomainError("eta24_expand: limit must be < 2^32");
  const std::uint64_t degree = limit - 1;
  const auto terms = jacobi_terms(degree);

  // Square of the sparse factor directly: O(terms^2).
  std::vector<std::int64_t> square(degree + 1, 0);
  for (const auto& s : terms) {
    for (const auto& t : terms) {
      if (s.exponent + t.exponent > degree) break;
      square[s.exponent + t.exponent] += s.coeff * t.coeff;
    }
  }
  Stage stage = std::move(square);
  for (int power = 3; power <= 8; ++power) stage = multiply_stage(stage, terms, degree, options);

  std::vector<BigInt> tau(limit + 1);
  std::visit(
      [&](const auto& v) {
        for (std::uint64_t n = 1; n <= limit; ++n) tau[n] = BigInt(v[n - 1]);
      },
      stage);
  return CoeffTable(std::move(tau), Weight::integral(12), CoeffSource{CoeffSourceKind::Eta24, {}, {}});
}

std::vector<BigInt> eta24_expand_pentagonal(std::uint64_t limit) {
  if (limit < 1) throw DomainError("eta24_expand_pentagonal: limit must be >= 1");
  const std::uint64_t degree = limit - 1;
  const auto terms = pentagonal_terms(degree);
  std::vector<BigInt> series = densify<BigInt>(terms, degree);
  for (int power = 2; power <= 24; ++power) series = multiply_sparse<BigInt, BigInt>(series, terms, degree, 1);
  std::vector<BigInt> tau(limit + 1);
  for (std::uint64_t n = 1; n <= limit; ++n) tau[n] = series[n - 1];
  return tau;
}

CoeffTable hecke_extend(const std::function<BigInt(std::uint64_t)>& prime_values, Weight weight,
                        std::uint64_t limit) {
  MultSpec<BigInt> spec{"hecke", prime_values, HeckeRecurrence{weight.k}};
  auto table = limit < 2 ? sieve_values(spec, limit) : sieve_values(spec, limit, primes_for(limit));
  auto raw = table.raw();
  return CoeffTable(std::vector<BigInt>(raw.begin(), raw.end()), weight,
                    CoeffSource{CoeffSourceKind::HeckeExtend, {}, {}});
}

CoeffTable hecke_extend(const std::function<BigRational(std::uint64_t)>& prime_values, Weight weight,
                        std::uint64_t limit) {
  MultSpec<BigRational> spec{"hecke", prime_values, HeckeRecurrence{weight.k}};
  auto table = limit < 2 ? sieve_values(spec, limit) : sieve_values(spec, limit, primes_for(limit));
  auto raw = table.raw();
  return CoeffTable(std::vector<BigRational>(raw.begin(), raw.end()), weight,
                    CoeffSource{CoeffSourceKind::HeckeExtend, {}, {}});
}

NormalizedCoeffs normalize(const CoeffTable& table) {
  NormalizedCoeffs out;
  out.limit = table.limit();
  out.weight = table.weight();
  out.values.assign(out.limit + 1, 0.0);
  const double half = table.weight().k ? (*table.weight().k - 1) / 2.0 : 0.0;
  for (std::uint64_t n = 1; n <= out.limit; ++n) {
    const double a = table.as_double(n);
    out.values[n] = half == 0.0 ? a : a / std::pow(static_cast<double>(n), half);
  }
  return out;
}

SieveTable<double> sign_function(const CoeffTable& table) {
  const std::uint64_t limit = table.limit();
  const auto primes = primes_for(limit);
  auto v = assemble_multiplicative(primes, limit, [&](std::uint64_t q) { return static_cast<double>(table.sign(q)); });
  for (std::uint64_t n = 1; n <= limit; ++n) {
    if (v[n] != static_cast<double>(table.sign(n))) {
      throw SpecError("sign function disagrees with sign(a_n) at n=" + std::to_string(n));
    }
  }
  return SieveTable<double>("sign(" + table.source().label() + ")", std::move(v));
}

SieveTable<double> nonvanish_indicator(const CoeffTable& table) {
  const std::uint64_t limit = table.limit();
  const auto primes = primes_for(limit);
  auto v = assemble_multiplicative(primes, limit, [&](std::uint64_t q) { return table.is_zero(q) ? 0.0 : 1.0; });
  for (std::uint64_t n = 1; n <= limit; ++n) {
    if (v[n] != (table.is_zero(n) ? 0.0 : 1.0)) {
      throw SpecError("nonvanishing indicator is not multiplicative at n=" + std::to_string(n));
    }
  }
  return SieveTable<double>("nonzero(" + table.source().label() + ")", std::move(v));
}

std::vector<std::uint64_t> vanishing_indices(const CoeffTable& table, std::size_t max_count) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 1; n <= table.limit() && out.size() < max_count; ++n) {
    if (table.is_zero(n)) out.push_back(n);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 init failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  return hex_digest(digest, len);
}

CoeffTable load_coeff_table(const std::filesystem::path& path, Weight declared) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  if (line != "n,a_n") throw ParseError("expected header 'n,a_n'", 1);

  std::vector<BigRational> values{BigRational(0)};
  bool all_integral = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'n,a_n'", lineno);
    std::uint64_t n = 0;
    auto res = std::from_chars(line.data(), line.data() + comma, n);
    if (res.ec != std::errc{} || res.ptr != line.data() + comma) throw ParseError("bad index", lineno);
    if (n != values.size()) {
      throw ParseError("expected n=" + std::to_string(values.size()) + " (rows must be consecutive)", lineno);
    }
    const std::string_view field = std::string_view(line).substr(comma + 1);
    if (!declared.is_normalized() && field.find('/') != std::string_view::npos) {
      throw ParseError("integral-weight data must be integers", lineno);
    }
    try {
      values.push_back(ValueTraits<BigRational>::parse(field));
    } catch (const std::exception&) {
      throw ParseError("bad coefficient '" + std::string(field) + "'", lineno);
    }
    if (boost::multiprecision::denominator(values.back()) != 1) all_integral = false;
  }
  if (values.size() < 2) throw ParseError("no coefficients", lineno);

  const std::uint64_t limit = values.size() - 1;
  const auto primes = primes_for(limit);
  CoeffSource source{CoeffSourceKind::ExternalFile, path, sha256_file(path)};
  if (all_integral) {
    std::vector<BigInt> ints;
    ints.reserve(values.size());
    for (const auto& v : values) ints.push_back(boost::multiprecision::numerator(v));
    verify_table(ints, declared, primes);
    return CoeffTable(std::move(ints), declared, std::move(source));
  }
  verify_table(values, declared, primes);
  return CoeffTable(std::move(values), declared, std::move(source));
}

void save_coeff_table(const CoeffTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "n,a_n\n";
  for (std::uint64_t n = 1; n <= table.limit(); ++n) out << n << ',' << table.value_string(n) << '\n';
}

double moment_sum(const NormalizedCoeffs& coeffs, const PrimeSet& primes, double x, int power,
                  MomentWeight weighting) {
  if (std::floor(x) > static_cast<double>(coeffs.limit)) throw DomainError("moment_sum: x exceeds table limit");
  if (power != 1 && power != 2 && power != 4) throw DomainError("moment_sum: power must be 1, 2 or 4");
  KahanSum<double> acc;
  for (std::uint32_t p : primes.primes()) {
    if (p > x) break;
    const double a = std::abs(coeffs[p]);
    const double term = power == 1 ? a : (power == 2 ? a * a : a * a * a * a);
    const double pd = static_cast<double>(p);
    switch (weighting) {
      case MomentWeight::LogP:
        acc += term * std::log(pd);
        break;
      case MomentWeight::Reciprocal:
        acc += term / pd;
        break;
      case MomentWeight::Unit:
        acc += term;
        break;
    }
  }
  return acc.value();
}

}  // namespace multmean
