#include "multmean/characters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "multmean/errors.hpp"

namespace multmean {
namespace {

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e > 0) {
    if (e & 1) r = mul_mod(r, a, m);
    a = mul_mod(a, a, m);
    e >>= 1;
  }
  return r;
}

std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    unsigned k = 0;
    while (n % p == 0) {
      n /= p;
      ++k;
    }
    out.emplace_back(p, k);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

std::uint64_t multiplicative_order(std::uint64_t a, std::uint64_t m, std::uint64_t group_order) {
  std::uint64_t ord = group_order;
  for (auto [p, k] : factorize(group_order)) {
    (void)k;
    while (ord % p == 0 && pow_mod(a, ord / p, m) == 1) ord /= p;
  }
  return ord;
}

// Element congruent to r mod q and to 1 mod (D / q), with gcd(q, D/q) = 1.
std::uint64_t crt_lift(std::uint64_t r, std::uint64_t q, std::uint64_t modulus) {
  const std::uint64_t rest = modulus / q;
  if (rest == 1) return r % q;
  // x = 1 + rest * t, need 1 + rest * t = r (mod q)
  std::uint64_t inv = 0;
  for (std::uint64_t t = 1; t < q; ++t) {
    if (mul_mod(rest % q, t, q) == 1) {
      inv = t;
      break;
    }
  }
  const std::uint64_t need = (r % q + q - 1) % q;
  const std::uint64_t t = mul_mod(need, inv, q);
  return (1 + rest * t) % modulus;
}

}  // namespace

std::uint64_t euler_phi(std::uint64_t n) {
  std::uint64_t phi = n;
  for (auto [p, k] : factorize(n)) {
    (void)k;
    phi = phi / p * (p - 1);
  }
  return phi;
}

namespace {

std::vector<std::int64_t> poly_divide_exact(std::vector<std::int64_t> num, const std::vector<std::int64_t>& den) {
  // den is monic.
  const std::size_t dn = den.size() - 1;
  std::vector<std::int64_t> q(num.size() - dn, 0);
  for (std::size_t i = num.size(); i-- > dn;) {
    const std::int64_t c = num[i];
    q[i - dn] = c;
    if (c == 0) continue;
    for (std::size_t j = 0; j <= dn; ++j) num[i - dn + j] -= c * den[j];
  }
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------

CharacterGroup::CharacterGroup(std::uint64_t modulus) : modulus_(modulus) {
  if (modulus == 0) throw DomainError("character modulus must be positive");
  units_.assign(modulus, 0);
  for (std::uint64_t a = 0; a < modulus; ++a) units_[a] = std::gcd(a, modulus) == 1 ? 1 : 0;

  for (auto [p, k] : factorize(modulus)) {
    std::uint64_t q = 1;
    for (unsigned i = 0; i < k; ++i) q *= p;
    if (p == 2) {
      if (k >= 2) factors_.push_back({crt_lift(q - 1, q, modulus), 2});
      if (k >= 3) factors_.push_back({crt_lift(5, q, modulus), q / 4});
      continue;
    }
    const std::uint64_t order = q / p * (p - 1);
    std::uint64_t g = 2;
    while (std::gcd(g, p) != 1 || multiplicative_order(g, q, order) != order) ++g;
    factors_.push_back({crt_lift(g, q, modulus), order});
  }
  for (const auto& f : factors_) {
    size_ *= f.order;
    exponent_ = std::lcm(exponent_, f.order);
  }

  const std::size_t r = factors_.size();
  logs_.assign(modulus * std::max<std::size_t>(r, 1), 0);
  // Walk every exponent tuple in mixed radix, tracking the product of generator powers.
  std::vector<std::uint32_t> digits(r, 0);
  std::uint64_t element = 1 % modulus;
  for (std::uint64_t count = 0; count < size_; ++count) {
    for (std::size_t i = 0; i < r; ++i) logs_[element * r + i] = digits[i];
    for (std::size_t i = r; i-- > 0;) {
      if (++digits[i] < factors_[i].order) {
        element = mul_mod(element, factors_[i].generator, modulus);
        break;
      }
      digits[i] = 0;
      // generator^order == 1, so stepping back to digit 0 multiplies by g^{-(order-1)} = g.
      element = mul_mod(element, factors_[i].generator, modulus);
    }
  }
}

std::span<const std::uint32_t> CharacterGroup::discrete_log(std::uint64_t a) const {
  a %= modulus_;
  if (!units_[a]) return {};
  const std::size_t r = factors_.size();
  return {logs_.data() + a * r, r};
}

// ---------------------------------------------------------------------------

std::vector<std::int64_t> cyclotomic_polynomial(std::uint64_t order) {
  if (order == 0) throw DomainError("cyclotomic order must be positive");
  std::vector<std::int64_t> num(order + 1, 0);
  num[0] = -1;
  num[order] = 1;
  for (std::uint64_t d = 1; d < order; ++d) {
    if (order % d == 0) num = poly_divide_exact(num, cyclotomic_polynomial(d));
  }
  return num;
}

CyclotomicInteger::CyclotomicInteger(std::uint64_t order, std::span<const std::int64_t> counts) : order_(order) {
  if (counts.size() != order) throw DomainError("CyclotomicInteger: need one count per power of zeta");
  const auto phi_poly = cyclotomic_polynomial(order);
  const std::size_t deg = phi_poly.size() - 1;
  std::vector<std::int64_t> work(counts.begin(), counts.end());
  for (std::size_t i = work.size(); i-- > deg;) {
    const std::int64_t c = work[i];
    if (c == 0) continue;
    for (std::size_t j = 0; j <= deg; ++j) work[i - deg + j] -= c * phi_poly[j];
  }
  work.resize(deg);
  coeffs_ = std::move(work);
}

bool CyclotomicInteger::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](std::int64_t c) { return c == 0; });
}

std::optional<std::int64_t> CyclotomicInteger::as_integer() const {
  for (std::size_t i = 1; i < coeffs_.size(); ++i) {
    if (coeffs_[i] != 0) return std::nullopt;
  }
  return coeffs_.empty() ? 0 : coeffs_[0];
}

// ---------------------------------------------------------------------------

DirichletCharacter::DirichletCharacter(std::shared_ptr<const CharacterGroup> group,
                                       std::vector<std::uint64_t> exponents)
    : group_(std::move(group)), exponents_(std::move(exponents)) {
  const auto factors = group_->factors();
  if (exponents_.size() != factors.size()) throw DomainError("character needs one exponent per generator");
  const std::uint64_t e = group_->exponent();
  const std::uint64_t d = group_->modulus();

  order_ = 1;
  index_ = 0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (exponents_[i] >= factors[i].order) throw DomainError("generator exponent out of range");
    order_ = std::lcm(order_, factors[i].order / std::gcd(factors[i].order, exponents_[i]));
    index_ = index_ * factors[i].order + exponents_[i];
  }

  value_exp_.assign(d, -1);
  for (std::uint64_t a = 0; a < d; ++a) {
    const auto logs = group_->discrete_log(a);
    if (!group_->is_unit(a)) continue;
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      k = (k + static_cast<std::uint64_t>(logs[i]) * exponents_[i] % e * (e / factors[i].order)) % e;
    }
    value_exp_[a] = static_cast<std::int64_t>(k);
  }

  roots_.resize(e);
  for (std::uint64_t j = 0; j < e; ++j) {
    if (4 * j % e == 0) {
      static constexpr Complex quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      roots_[j] = quarter[4 * j / e];
    } else {
      roots_[j] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(e));
    }
  }

  // Primitive unless chi is trivial on {a = 1 mod D/p} for some prime p | D.
  primitive_ = true;
  for (auto [p, k] : factorize(d)) {
    (void)k;
    const std::uint64_t sub = d / p;
    bool induced = true;
    for (std::uint64_t a = 1 % d, j = 0; j < p; ++j, a = (a + sub) % d) {
      if (value_exp_[a] > 0) {
        induced = false;
        break;
      }
    }
    if (induced) {
      primitive_ = false;
      break;
    }
  }
}

std::optional<std::uint64_t> DirichletCharacter::value_exponent(std::uint64_t n) const {
  const std::int64_t k = value_exp_[n % group_->modulus()];
  if (k < 0) return std::nullopt;
  return static_cast<std::uint64_t>(k);
}

Complex DirichletCharacter::operator()(std::uint64_t n) const {
  const std::int64_t k = value_exp_[n % group_->modulus()];
  return k < 0 ? Complex(0) : roots_[static_cast<std::size_t>(k)];
}

int DirichletCharacter::real_value(std::uint64_t n) const {
  if (!is_real()) throw DomainError("real_value on a non-real character");
  const std::int64_t k = value_exp_[n % group_->modulus()];
  if (k < 0) return 0;
  return k == 0 ? 1 : -1;
}

DirichletCharacter DirichletCharacter::conj() const {
  std::vector<std::uint64_t> neg(exponents_.size());
  const auto factors = group_->factors();
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = (factors[i].order - exponents_[i]) % factors[i].order;
  return DirichletCharacter(group_, std::move(neg));
}

std::vector<DirichletCharacter> enumerate_characters(std::uint64_t modulus) {
  auto group = std::make_shared<const CharacterGroup>(modulus);
  const auto factors = group->factors();
  std::vector<DirichletCharacter> out;
  out.reserve(group->size());
  std::vector<std::uint64_t> digits(factors.size(), 0);
  for (std::uint64_t count = 0; count < group->size(); ++count) {
    out.emplace_back(group, digits);
    for (std::size_t i = factors.size(); i-- > 0;) {
      if (++digits[i] < factors[i].order) break;
      digits[i] = 0;
    }
  }
  return out;
}

DirichletCharacter character_by_index(std::uint64_t modulus, std::uint64_t index) {
  auto group = std::make_shared<const CharacterGroup>(modulus);
  if (index >= group->size()) throw DomainError("character index out of range");
  const auto factors = group->factors();
  std::vector<std::uint64_t> digits(factors.size(), 0);
  for (std::size_t i = factors.size(); i-- > 0;) {
    digits[i] = index % factors[i].order;
    index /= factors[i].order;
  }
  return DirichletCharacter(group, std::move(digits));
}

CyclotomicInteger character_inner_product(const DirichletCharacter& chi, const DirichletCharacter& psi) {
  if (chi.modulus() != psi.modulus()) throw DomainError("characters have different moduli");
  const std::uint64_t e = chi.group().exponent();
  std::vector<std::int64_t> counts(e, 0);
  for (std::uint64_t a = 0; a < chi.modulus(); ++a) {
    const auto x = chi.value_exponent(a);
    if (!x) continue;
    const auto y = psi.value_exponent(a);
    counts[(*x + e - *y) % e] += 1;
  }
  return CyclotomicInteger(e, counts);
}

// ---------------------------------------------------------------------------

ExceptionalDetection detect_exceptional_quadratic(const std::function<double(std::uint64_t)>& g_on_primes,
                                                  std::uint64_t modulus, double x, int window_count,
                                                  const PrimeSet& primes, double threshold) {
  if (x < 100) throw DomainError("detect_exceptional_quadratic: x must be >= 100");
  if (window_count < 3) throw DomainError("detect_exceptional_quadratic: window_count must be >= 3");
  if (std::floor(x) > static_cast<double>(primes.limit())) {
    throw DomainError("detect_exceptional_quadratic: x exceeds prime limit");
  }
  ExceptionalDetection result;
  result.threshold = threshold;
  result.window_count = window_count;
  if (modulus == 0) throw DomainError("modulus must be positive");

  std::vector<double> checkpoints(static_cast<std::size_t>(window_count) + 1);
  for (int j = 0; j <= window_count; ++j) checkpoints[static_cast<std::size_t>(j)] = x / std::pow(10.0, window_count - j);

  const auto chars = modulus <= 2 ? std::vector<DirichletCharacter>{} : enumerate_characters(modulus);
  double best = 0;
  for (const auto& chi : chars) {
    if (!chi.is_quadratic()) continue;
    QuadraticEvidence ev;
    ev.character_index = chi.index();
    ev.checkpoints = checkpoints;
    KahanSum<double> acc;
    std::size_t next = 0;
    for (std::uint32_t p : primes.primes()) {
      while (next < checkpoints.size() && static_cast<double>(p) > checkpoints[next]) {
        ev.partial_sums.push_back(acc.value());
        ++next;
      }
      if (next == checkpoints.size()) break;
      if (chi.real_value(p) == -1) acc += g_on_primes(p) / static_cast<double>(p);
    }
    while (ev.partial_sums.size() < checkpoints.size()) ev.partial_sums.push_back(acc.value());
    ev.flagged = true;
    double worst = 0;
    for (std::size_t j = 1; j < ev.partial_sums.size(); ++j) {
      const double inc = ev.partial_sums[j] - ev.partial_sums[j - 1];
      ev.increments.push_back(inc);
      worst = std::max(worst, inc);
      if (!(inc < threshold)) ev.flagged = false;
    }
    if (ev.flagged && (!result.character || worst < best)) {
      result.character = chi;
      best = worst;
    }
    result.candidates.push_back(std::move(ev));
  }
  if (result.candidates.empty()) {
    result.note = "no quadratic character mod " + std::to_string(modulus) + "; nothing to test";
  } else if (result.character) {
    result.note = "evidence (not proof): increments of the chi(p)=-1 series stay below threshold over the last " +
                  std::to_string(window_count) + " decades";
  } else {
    result.note = "evidence (not proof): no quadratic character shows a convergent chi(p)=-1 series";
  }
  return result;
}

}  // namespace multmean
