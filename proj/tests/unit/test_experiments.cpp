#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "multmean/errors.hpp"
#include "multmean/experiments.hpp"
#include "oracles.hpp"

using namespace multmean;

namespace {

const MultSpec<double> one{"one", [](std::uint64_t) { return 1.0; }, CompletelyMultiplicative{}};
const MultSpec<double> liouville{"liouville", [](std::uint64_t) { return -1.0; }, CompletelyMultiplicative{}};
const MultSpec<double> cm4{"cm4", [](std::uint64_t p) { return p % 4 == 1 ? 1.0 : 0.0; }, CompletelyMultiplicative{}};
const MultSpec<double> delta{"delta", [](std::uint64_t) { return 0.0; }, ZeroBeyondFirstPower{}};

}  // namespace

TEST_CASE("checkpoint validation") {
  CHECK(default_checkpoints() == std::vector<double>{1e4, 1e5, 1e6});
  CHECK(validate_checkpoints({100, 10, 50}, 100) == std::vector<double>{10, 50, 100});
  CHECK_THROWS_AS(validate_checkpoints({}, 100), DomainError);
  CHECK_THROWS_AS(validate_checkpoints({1.5}, 100), DomainError);
  CHECK_THROWS_AS(validate_checkpoints({101}, 100), DomainError);
}

TEST_CASE("sign equidistribution for tau") {
  const auto tau = eta24_expand(100000);
  const auto r = run_sign_equidistribution(tau, {1e3, 1e4, 1e5});
  REQUIRE(r.checkpoints.size() == 3);
  for (const auto& cp : r.checkpoints) {
    std::uint64_t neg = 0, pos = 0;
    for (std::uint64_t n = 1; n <= cp.x; ++n) (tau.integers()[n] < 0 ? neg : pos) += tau.integers()[n] != 0;
    CHECK(cp.negative == neg);
    CHECK(cp.positive == pos);
    CHECK(cp.nonvanishing == neg + pos);
    CHECK(cp.frac_neg + cp.frac_pos == doctest::Approx(1.0));
    CHECK(cp.deviation == doctest::Approx(std::abs(cp.frac_neg - 0.5)));
  }
  CHECK(r.checkpoints.back().deviation < 0.01);
  CHECK(r.passed());
  CHECK(r.vanishing.empty());
  CHECK(r.gamma_const == doctest::Approx(1.0 / 24000));
}

TEST_CASE("sign equidistribution degenerate and alternating inputs") {
  const auto ps = sieve_primes(10000);
  const auto ones = sieve_values(one, 10000, ps);
  const auto r = run_sign_equidistribution(ones, {100, 10000});
  CHECK(r.checkpoints[1].frac_neg == 0.0);
  CHECK_FALSE(r.generic);
  CHECK_FALSE(r.passed());

  const auto lam = sieve_values(liouville, 10000, ps);
  const auto rl = run_sign_equidistribution(lam, {1000, 10000});
  CHECK(rl.generic);
  CHECK(rl.checkpoints[1].deviation < 0.02);

  // A sign trend that worsens beyond the slack is reported.
  std::vector<double> bv(10001, 1.0);
  for (std::uint64_t n = 1; n <= 100; n += 2) bv[n] = -1;
  const SieveTable<double> bad("bad", bv);
  const auto rb = run_sign_equidistribution(bad, {100, 10000});
  CHECK(rb.checkpoints[0].deviation == 0.0);
  CHECK_FALSE(rb.trend_nonincreasing);

  const auto cm = sieve_values(cm4, 10000, ps);
  const auto rc = run_sign_equidistribution(cm, {10000});
  CHECK(rc.vanishing.size() == 100);
  CHECK(rc.vanishing.front() == 2);
}

TEST_CASE("progression density against direct class counts") {
  const auto ps = sieve_primes(100000);
  const auto cm = sieve_values(cm4, 100000, ps);
  for (std::uint64_t D : {1, 3, 5, 8, 12}) {
    const auto r = run_progression_density(cm, D, {1e3, 1e5}, ps);
    CHECK(r.weighting == "indicator");
    REQUIRE(r.checkpoints.size() == 2);
    for (const auto& cp : r.checkpoints) {
      CHECK(cp.classes.size() == oracle::phi(D));
      std::vector<double> sums(D, 0.0);
      double total = 0;
      for (std::uint64_t n = 1; n <= cp.x; ++n) {
        if (oracle::gcd(n, D) != 1) continue;
        sums[n % D] += cm[n];
        total += cm[n];
      }
      CHECK(cp.s_d == total);
      CHECK(cp.partition_error <= 1e-12);
      CHECK(cp.scaled == doctest::Approx(total * std::sqrt(std::log(cp.x)) / cp.x));
      for (const auto& c : cp.classes) {
        CHECK(c.sum == sums[c.residue]);
        CHECK(c.gamma_hat == doctest::Approx(sums[c.residue] / total));
        CHECK(c.gamma_hat >= 0.0);
        CHECK(c.gamma_hat <= 1.0);
      }
    }
    CHECK(r.nonnegative);
    CHECK_FALSE(r.degenerate);
  }
  const auto d1 = run_progression_density(cm, 1, {1e5}, ps);
  CHECK(d1.checkpoints[0].classes[0].gamma_hat == 1.0);

  // Sums of two squares live in the class 1 mod 4 once 2 is excluded; chi_4 is flagged.
  const auto r4 = run_progression_density(cm, 4, {1e4, 1e5}, ps);
  CHECK(r4.checkpoints[1].classes[0].gamma_hat == 1.0);
  CHECK(r4.checkpoints[1].classes[1].gamma_hat == 0.0);
  REQUIRE(r4.exceptional.has_value());
  REQUIRE(r4.exceptional->character.has_value());
  REQUIRE(r4.case_two.has_value());
  CHECK(r4.case_two->psi_product == doctest::Approx(1.0));
  CHECK(r4.case_two->max_deviation <= 1e-12);

  const auto zero = sieve_values(delta, 1000, ps);
  const auto rz = run_progression_density(zero, 7, {1000}, ps);
  CHECK_FALSE(rz.degenerate);
  CHECK(rz.checkpoints[0].classes[0].gamma_hat == 1.0);
  const SieveTable<double> none("none", std::vector<double>(1001, 0.0));
  const auto rn = run_progression_density(none, 7, {1000}, ps);
  CHECK(rn.degenerate);
  for (const auto& c : rn.checkpoints[0].classes) CHECK(c.gamma_hat == 0.0);

  DensityOptions small;
  small.small_sample_threshold = 1000000;
  small.detect = false;
  const auto rs = run_progression_density(cm, 5, {1e4}, ps, small);
  CHECK_FALSE(rs.exceptional.has_value());
  for (const auto& c : rs.checkpoints[0].classes) CHECK(c.small_sample);
  CHECK_THROWS_AS(run_progression_density(cm, 0, {1e4}, ps), DomainError);
}

TEST_CASE("abs-mean progressions use |a^_n| weights") {
  const auto ps = sieve_primes(20000);
  const auto nc = normalize(eta24_expand(20000));
  const auto r = run_abs_mean_progressions(nc, 7, {2e4}, ps);
  CHECK(r.weighting == "abs-normalized");
  std::vector<double> sums(7, 0.0);
  for (std::uint64_t n = 1; n <= 20000; ++n) {
    if (n % 7 != 0) sums[n % 7] += std::abs(nc[n]);
  }
  for (const auto& c : r.checkpoints[0].classes) CHECK(c.sum == doctest::Approx(sums[c.residue]).epsilon(1e-12));
  CHECK(r.checkpoints[0].max_uniform_error < 0.1);
  CHECK(r.nonnegative);
}

TEST_CASE("scaling check") {
  const auto ps = sieve_primes(100000);
  const auto ones = sieve_values(one, 100000, ps);
  const auto s = run_scaling_check(ones, {1e3, 1e4, 1e5});
  for (std::size_t i = 0; i < 3; ++i) CHECK(s.scaled[i] == doctest::Approx(std::sqrt(std::log(s.x[i]))));
  REQUIRE(s.step_ratios.size() == 2);
  CHECK(s.step_ratios[0] == doctest::Approx(s.scaled[1] / s.scaled[0]));
  CHECK(s.drift_from(1e4) == doctest::Approx(std::abs(s.step_ratios[1] - 1)));
  CHECK_FALSE(s.degenerate);

  const auto d = run_scaling_check(sieve_values(delta, 1000, ps), {100, 1000});
  CHECK(d.degenerate);

  const auto cm = run_scaling_check(sieve_values(cm4, 100000, ps), {1e4, 1e5});
  CHECK(std::abs(cm.step_ratios[0] - 1) < 0.02);
}

TEST_CASE("inequality chain sums") {
  const auto ps = sieve_primes(100000);
  const auto nc = normalize(eta24_expand(100000));
  const auto r = run_lemma10_chain(nc, ps, {1e4, 1e5});
  REQUIRE(r.checkpoints.size() == 2);
  for (const auto& cp : r.checkpoints) {
    double sq = 0, ab = 0, ng = 0, full = 0;
    for (auto p : oracle::primes_upto(static_cast<std::uint64_t>(cp.x))) {
      const double a = nc[p];
      full += a * a / p;
      if (std::abs(a) <= std::sqrt(6.0)) {
        sq += a * a / p;
        ab += std::abs(a) / p;
      }
      if (a < 0) ng += 1.0 / p;
    }
    CHECK(cp.square_sum == doctest::Approx(sq).epsilon(1e-12));
    CHECK(cp.abs_sum == doctest::Approx(ab).epsilon(1e-12));
    CHECK(cp.negative_sum == doctest::Approx(ng).epsilon(1e-12));
    CHECK(cp.full_square_sum == doctest::Approx(full).epsilon(1e-12));
    CHECK(cp.L == doctest::Approx(std::log(std::log(cp.x))));
    CHECK(cp.diff_negative == doctest::Approx(ng - cp.L / 216));
    // Deligne's bound puts every |a_p| <= 2 < sqrt 6.
    CHECK(cp.square_sum == cp.full_square_sum);
  }
  CHECK_FALSE(r.hypothesis_failure);
  CHECK(r.drift_negative == doctest::Approx(std::abs(r.checkpoints[1].diff_negative - r.checkpoints[0].diff_negative)));

  NormalizedCoeffs zero{100000, std::vector<double>(100001, 0.0), Weight::normalized()};
  const auto z = run_lemma10_chain(zero, ps, {1e4, 1e5});
  CHECK(z.hypothesis_failure);
  CHECK(z.checkpoints[1].negative_sum == 0.0);

  // a_p alternating in sign by index of the prime.
  NormalizedCoeffs alt{100000, std::vector<double>(100001, 0.0), Weight::normalized()};
  for (std::size_t i = 0; i < ps.count(); ++i) alt.values[ps.primes()[i]] = i % 2 ? 1.0 : -1.0;
  const auto ra = run_lemma10_chain(alt, ps, {1e4, 1e5});
  CHECK_FALSE(ra.hypothesis_failure);
  CHECK(ra.checkpoints[1].negative_sum > 0.4 * ra.checkpoints[1].full_square_sum);
  CHECK_THROWS_AS(run_lemma10_chain(nc, ps, {2.5}), DomainError);
}

TEST_CASE("Wirsing main term") {
  const auto ps = sieve_primes(100000);
  const auto ones = sieve_values(one, 100000, ps);
  const auto r = run_wirsing_check(ones, ps, {1e3, 1e4, 1e5}, 1.0);
  CHECK(r.tau_used == 1.0);
  for (const auto& cp : r.checkpoints) {
    CHECK(cp.sum == std::floor(cp.x));
    CHECK(cp.ratio == doctest::Approx(cp.sum / cp.predicted));
  }
  CHECK(std::abs(r.checkpoints.back().ratio - 1) < 0.01);
  CHECK(r.spread_from(1e4) == doctest::Approx(std::abs(r.checkpoints[2].ratio - r.checkpoints[1].ratio)));

  const auto cm = sieve_values(cm4, 100000, ps);
  const auto rc = run_wirsing_check(cm, ps, {1e4, 1e5});
  CHECK_FALSE(rc.declared_tau.has_value());
  CHECK(rc.tau_used == doctest::Approx(rc.checkpoints.back().tau_hat));
  CHECK(rc.tau_used == doctest::Approx(0.5).epsilon(0.1));

  const auto zero = sieve_values(delta, 1000, ps);
  CHECK_THROWS_AS(run_wirsing_check(zero, ps, {1000}), DomainError);
  CHECK_THROWS_AS(run_wirsing_check(ones, ps, {1000}, -1.0), DomainError);
}

TEST_CASE("D sweep") {
  const auto ps = sieve_primes(10000);
  const auto cm = sieve_values(one, 10000, ps);
  std::vector<std::uint64_t> moduli{1, 2, 3, 10, 5000};
  const auto s = run_d_sweep(cm, moduli, 1e4);
  REQUIRE(s.rows.size() == 5);
  CHECK(s.rows[0].max_error == 0.0);
  CHECK(s.rows[0].envelope == 0.0);
  CHECK(s.rows[3].envelope == doctest::Approx(std::pow(std::log(10.0) / std::log(1e4), 1.0 / 49)));
  CHECK(s.rows[4].small_classes == oracle::phi(5000));
  CHECK(s.rows[4].min_class_terms == 2);
  CHECK(s.all_finite);

  const auto path = (std::filesystem::temp_directory_path() / "multmean_sweep.csv").string();
  s.write_csv(path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "D,max_error,envelope,small_classes,min_class_terms");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
  std::filesystem::remove(path);
}

TEST_CASE("run_jobs") {
  std::vector<int> out(50, 0);
  std::vector<std::function<void()>> jobs;
  for (int i = 0; i < 50; ++i) jobs.push_back([&out, i] { out[i] = i * i; });
  run_jobs(jobs, 4);
  for (int i = 0; i < 50; ++i) CHECK(out[i] == i * i);

  std::atomic<int> done{0};
  std::vector<std::function<void()>> failing{[&] { ++done; }, [] { throw std::runtime_error("boom"); },
                                            [&] { ++done; }};
  CHECK_THROWS_WITH(run_jobs(failing, 2), "boom");
  CHECK(done == 2);
  run_jobs({}, 3);
}
