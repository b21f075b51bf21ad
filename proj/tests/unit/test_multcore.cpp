#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "multmean/errors.hpp"
#include "multmean/multcore.hpp"
#include "oracles.hpp"

using namespace multmean;

namespace {

MultSpec<double> constant_one() { return {"one", [](std::uint64_t) { return 1.0; }, CompletelyMultiplicative{}}; }
MultSpec<double> mobius() { return {"mobius", [](std::uint64_t) { return -1.0; }, ZeroBeyondFirstPower{}}; }

// g(p) in [0, 2] from a seeded generator; g(p^k) for k >= 2 also in [0, 2] via an explicit rule.
MultSpec<double> random_nonneg(std::uint64_t seed, std::uint64_t limit) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  ExplicitTable<double> table;
  const auto ps = oracle::primes_upto(limit);
  for (auto p : ps) {
    for (std::uint64_t q = p; q <= limit; q *= p) {
      table.values[q] = u(rng);
      if (q > limit / p) break;
    }
  }
  return {"random" + std::to_string(seed), nullptr, table};
}

}  // namespace

TEST_CASE("sieve_values basic examples") {
  const auto ones = sieve_values(constant_one(), 1000);
  for (std::uint64_t n = 1; n <= 1000; ++n) CHECK(ones[n] == 1.0);

  const auto mu = sieve_values(mobius(), 10);
  const std::vector<double> expect{1, -1, -1, 0, -1, 1, -1, 0, 0, 1};
  for (std::uint64_t n = 1; n <= 10; ++n) CHECK(mu[n] == expect[n - 1]);

  MultSpec<BigInt> hecke{"tau", [](std::uint64_t p) -> BigInt { return p == 2 ? -24 : (p == 3 ? 252 : 0); },
                         HeckeRecurrence::integral(12)};
  const auto tau = sieve_values(hecke, 12);
  CHECK(tau[4] == BigInt(-1472));
  CHECK(tau[12] == BigInt(-370944));
  CHECK(tau[6] == BigInt(-6048));
  CHECK(tau.mode() == "exact-integer");
}

TEST_CASE("sieve_values equals naive factorization for every completion kind") {
  const std::uint64_t N = 10000;
  auto gp = [](std::uint64_t p) { return std::sin(static_cast<double>(p)) + 0.25; };

  SUBCASE("zero beyond first power") {
    const auto t = sieve_values(MultSpec<double>{"z", gp, ZeroBeyondFirstPower{}}, N);
    for (std::uint64_t n = 1; n <= N; ++n) {
      const double ref =
          oracle::multiplicative_value<double>(n, [&](std::uint64_t p, unsigned k) { return k == 1 ? gp(p) : 0.0; });
      CHECK(t[n] == doctest::Approx(ref).epsilon(1e-13));
    }
  }
  SUBCASE("completely multiplicative") {
    const auto t = sieve_values(MultSpec<double>{"c", gp, CompletelyMultiplicative{}}, N);
    for (std::uint64_t n = 1; n <= N; ++n) {
      const double ref =
          oracle::multiplicative_value<double>(n, [&](std::uint64_t p, unsigned k) { return std::pow(gp(p), k); });
      CHECK(t[n] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
  SUBCASE("exponential") {
    const auto t = sieve_values(MultSpec<double>{"e", gp, Exponential{}}, N);
    for (std::uint64_t n = 1; n <= N; ++n) {
      const double ref = oracle::multiplicative_value<double>(
          n, [&](std::uint64_t p, unsigned k) { return std::pow(gp(p), k) / std::tgamma(k + 1.0); });
      CHECK(t[n] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
  SUBCASE("normalized Hecke recurrence") {
    const auto t = sieve_values(MultSpec<double>{"h", gp, HeckeRecurrence::normalized()}, N);
    for (std::uint64_t n = 1; n <= N; ++n) {
      const double ref = oracle::multiplicative_value<double>(n, [&](std::uint64_t p, unsigned k) {
        double prev = 1, cur = gp(p);
        for (unsigned j = 1; j < k; ++j) {
          const double next = gp(p) * cur - prev;
          prev = cur;
          cur = next;
        }
        return cur;
      });
      CHECK(t[n] == doctest::Approx(ref).epsilon(1e-10));
    }
  }
  SUBCASE("explicit table, rational mode") {
    ExplicitTable<BigRational> table;
    for (auto p : oracle::primes_upto(N)) {
      for (std::uint64_t q = p, k = 1; q <= N; q *= p, ++k) {
        table.values[q] = BigRational(static_cast<long>(p % 7) - 3, static_cast<long>(k + 1));
        if (q > N / p) break;
      }
    }
    const auto t = sieve_values(MultSpec<BigRational>{"x", nullptr, table}, N);
    CHECK(t.mode() == "exact-rational");
    for (std::uint64_t n = 1; n <= N; ++n) {
      const BigRational ref = oracle::multiplicative_value<BigRational>(n, [&](std::uint64_t p, unsigned k) {
        return BigRational(static_cast<long>(p % 7) - 3, static_cast<long>(k + 1));
      });
      CHECK(t[n] == ref);
    }
  }
}

TEST_CASE("explicit table with a missing prime power names it") {
  ExplicitTable<double> table;
  table.values = {{2, 1.0}, {3, 1.0}, {5, 1.0}, {7, 1.0}, {8, 1.0}};
  try {
    (void)sieve_values(MultSpec<double>{"gap", nullptr, table}, 10);
    FAIL("expected SpecError");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("4 = 2^2") != std::string::npos);
  }
}

TEST_CASE("exponential completion is rejected for integer mode") {
  CHECK_THROWS_AS(sieve_values(MultSpec<BigInt>{"e", [](std::uint64_t) { return BigInt(2); }, Exponential{}}, 10),
                  SpecError);
}

TEST_CASE("dirichlet_convolve") {
  const std::uint64_t N = 2000;
  const auto one = sieve_values(constant_one(), N);
  const auto mu = sieve_values(mobius(), N);
  const auto d = dirichlet_convolve(one, one);
  CHECK(d[6] == 4.0);
  for (std::uint64_t n = 1; n <= N; ++n) CHECK(d[n] == static_cast<double>(oracle::divisors(n).size()));
  const auto eps = dirichlet_convolve(mu, one);
  CHECK(eps[1] == 1.0);
  for (std::uint64_t n = 2; n <= N; ++n) CHECK(eps[n] == 0.0);

  std::vector<double> ev(N + 1, 0.0);
  ev[1] = 1;
  const SieveTable<double> unit("eps", ev);
  CHECK(dirichlet_convolve(mu, unit) == mu);
  CHECK_THROWS_AS(dirichlet_convolve(mu, sieve_values(mobius(), N - 1)), DomainError);
}

TEST_CASE("dirichlet_convolve is commutative and associative in exact mode") {
  const std::uint64_t N = 600;
  std::mt19937_64 rng(7);
  auto random_table = [&](const char* id) {
    std::uniform_int_distribution<int> u(-5, 5);
    std::vector<BigRational> v(N + 1);
    for (std::uint64_t n = 1; n <= N; ++n) v[n] = BigRational(u(rng), 1 + (n % 3));
    return SieveTable<BigRational>(id, v);
  };
  const auto f = random_table("f");
  const auto g = random_table("g");
  const auto h = random_table("h");
  CHECK(dirichlet_convolve(f, g) == dirichlet_convolve(g, f));
  CHECK(dirichlet_convolve(dirichlet_convolve(f, g), h) == dirichlet_convolve(f, dirichlet_convolve(g, h)));
}

TEST_CASE("mean_sum and log_weighted_sum") {
  const auto one = sieve_values(constant_one(), 100);
  CHECK(mean_sum(one, 10.5) == 10.0);
  CHECK(log_weighted_sum(one, 3) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
  const auto mu = sieve_values(mobius(), 100);
  CHECK(mean_sum(mu, 10) == -1.0);
  CHECK_THROWS_AS(mean_sum(mu, 101), DomainError);
  CHECK_THROWS_AS(log_weighted_sum(mu, 101), DomainError);
}

TEST_CASE("partial_summation_residual") {
  const auto one = sieve_values(constant_one(), 100000);
  CHECK(std::abs(partial_summation_residual(one, 2)) < 1e-12);
  CHECK(std::abs(partial_summation_residual(one, 100)) < 1e-9);
  const auto mu = sieve_values(mobius(), 1000);
  CHECK(std::abs(partial_summation_residual(mu, 1000)) < 1e-9);
  CHECK_THROWS_AS(partial_summation_residual(mu, 1.5), DomainError);

  // Non-integer u and arbitrary values with |v| <= 1000 (the identity does not need multiplicativity).
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  std::vector<double> v(100001);
  for (auto& e : v) e = u(rng);
  const SieveTable<double> big("big", v);
  for (double x : {2.5, 99.9, 1e3, 1e5}) CHECK(std::abs(partial_summation_residual(big, x)) < 1e-9);
}

TEST_CASE("lemma19_evaluate") {
  const auto ps = sieve_primes(10000);
  const auto one = sieve_values(constant_one(), 10000);
  const auto r = lemma19_evaluate(one, 100, ps);
  CHECK(r.lhs == 99.0);
  CHECK(r.rhs > 300);
  CHECK(r.holds());

  const auto zero = sieve_values(MultSpec<double>{"z", [](std::uint64_t) { return 0.0; }, ZeroBeyondFirstPower{}}, 100);
  const auto rz = lemma19_evaluate(zero, 100, ps);
  CHECK(rz.lhs == 0.0);
  CHECK(rz.rhs == 0.0);
  CHECK(rz.holds());

  CHECK_THROWS_AS(lemma19_evaluate(one, 1.5, ps), DomainError);
  CHECK_THROWS_AS(lemma19_evaluate(sieve_values(mobius(), 100), 100, ps), DomainError);

  // Oracle for the pieces: direct sums over n and a direct scan for Delta.
  const auto t = sieve_values(random_nonneg(3, 2000), 2000);
  const auto r2 = lemma19_evaluate(t, 2000, ps);
  long double lhs = 0, harm = 0, acc = 0, delta = 0;
  for (std::uint64_t n = 1; n <= 2000; ++n) {
    if (n >= 2) lhs += t[n];
    harm += t[n] / n;
    if (oracle::factor(n).size() == 1) acc += t[n] * std::log(static_cast<long double>(n));
    delta = std::max(delta, acc / n);
  }
  CHECK(r2.lhs == doctest::Approx(static_cast<double>(lhs)).epsilon(1e-12));
  CHECK(r2.harmonic == doctest::Approx(static_cast<double>(harm)).epsilon(1e-12));
  CHECK(r2.delta == doctest::Approx(static_cast<double>(delta)).epsilon(1e-12));
}

TEST_CASE("Chebyshev-supremum bound holds for random nonnegative specs") {
  const auto ps = sieve_primes(10000);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto t = sieve_values(random_nonneg(seed, 10000), 10000);
    CHECK(lemma19_evaluate(t, 1e4, ps).holds());
  }
}

TEST_CASE("lemma20_ratio") {
  const auto ps = sieve_primes(10000);
  const auto one = sieve_values(constant_one(), 10000);
  const double r3 = lemma20_ratio(one, 1e3, ps);
  const double r4 = lemma20_ratio(one, 1e4, ps);
  CHECK(r4 >= 0.5);
  CHECK(r4 <= 2.0);
  CHECK(std::abs(r4 / r3 - 1) < 0.05);

  const auto zero = sieve_values(MultSpec<double>{"z", [](std::uint64_t) { return 0.0; }, ZeroBeyondFirstPower{}}, 100);
  CHECK(lemma20_ratio(zero, 100, ps) == 1.0);

  const auto half = sieve_values(MultSpec<double>{"h", [](std::uint64_t) { return 0.5; }, ZeroBeyondFirstPower{}}, 10000);
  const double h2 = lemma20_ratio(half, 1e2, ps);
  const double h3 = lemma20_ratio(half, 1e3, ps);
  const double h4 = lemma20_ratio(half, 1e4, ps);
  CHECK(std::abs(h3 / h2 - 1) < 0.1);
  CHECK(std::abs(h4 / h3 - 1) < 0.1);
}

TEST_CASE("lemma21_ratio") {
  const auto ps = sieve_primes(100000);
  const auto one = sieve_values(constant_one(), 100000);
  CHECK(lemma21_ratio(one, 1e5, ps).ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lemma21_ratio(one, 12345.5, ps).ratio == doctest::Approx(12345.0 / 12345.5).epsilon(1e-12));

  const auto cm = sieve_values(
      MultSpec<double>{"cm", [](std::uint64_t p) { return p % 4 == 1 ? 1.0 : 0.0; }, CompletelyMultiplicative{}}, 100000);
  const auto a = lemma21_ratio(cm, 1e4, ps);
  const auto b = lemma21_ratio(cm, 1e5, ps);
  CHECK(a.ratio > 0);
  CHECK(std::abs(b.ratio / a.ratio - 1) < 0.2);
  CHECK(b.empirical_c == doctest::Approx(0.5).epsilon(0.1));

  const auto q = sieve_values(MultSpec<double>{"q", [](std::uint64_t) { return 0.75; }, ZeroBeyondFirstPower{}}, 100000);
  const auto c = lemma21_ratio(q, 1e4, ps);
  const auto d = lemma21_ratio(q, 1e5, ps);
  CHECK(c.ratio > 0);
  CHECK(std::abs(d.ratio / c.ratio - 1) < 0.2);
}

TEST_CASE("CSV round trip keeps spec id, mode and exact values") {
  MultSpec<BigInt> hecke{"tau-ish", [](std::uint64_t p) -> BigInt { return BigInt(p) * 1000003 - 7; },
                         HeckeRecurrence::integral(12)};
  const auto t = sieve_values(hecke, 500);
  std::stringstream ss;
  export_csv(t, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("# spec_id=tau-ish mode=exact-integer\nn,value\n1,1\n", 0) == 0);
  const auto back = import_csv<BigInt>(ss);
  CHECK(back == t);
  CHECK(back.spec_id() == "tau-ish");

  std::stringstream wrong(text);
  CHECK_THROWS_AS(import_csv<double>(wrong), ParseError);

  const auto mu = sieve_values(mobius(), 50);
  std::stringstream fs;
  export_csv(mu, fs);
  CHECK(import_csv<double>(fs) == mu);
}

TEST_CASE("multiplicativity spot check") {
  const auto ps = sieve_primes(100000);
  const auto t = sieve_values(random_nonneg(11, 100000), 100000, ps);
  CHECK_FALSE(find_multiplicativity_failure(t, 10000, 1).has_value());

  std::vector<double> v(t.raw().begin(), t.raw().end());
  v[6] = v[2] * v[3] + 1.0;
  const SieveTable<double> broken("broken", v);
  bool found = false;
  for (std::uint64_t seed = 1; seed <= 200 && !found; ++seed) {
    found = find_multiplicativity_failure(broken, 20000, seed).has_value();
  }
  CHECK(found);
}
