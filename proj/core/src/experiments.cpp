#include "multmean/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <thread>

#include "multmean/errors.hpp"

namespace multmean {

std::vector<double> default_checkpoints() { return {1e4, 1e5, 1e6}; }

std::vector<double> validate_checkpoints(std::vector<double> checkpoints, std::uint64_t limit) {
  if (checkpoints.empty()) throw DomainError("checkpoint list is empty");
  std::sort(checkpoints.begin(), checkpoints.end());
  for (double x : checkpoints) {
    if (!(x >= 2)) throw DomainError("checkpoints must be >= 2");
    if (std::floor(x) > static_cast<double>(limit)) {
      throw DomainError("checkpoint " + ValueTraits<double>::format(x) + " exceeds table limit " +
                        std::to_string(limit));
    }
  }
  return checkpoints;
}

// ---------------------------------------------------------------------------
// Sign equidistribution

namespace {

template <class SignOf>
SignReport sign_report(std::uint64_t limit, std::vector<double> checkpoints, double slack, SignOf sign_of) {
  checkpoints = validate_checkpoints(std::move(checkpoints), limit);
  SignReport report;
  report.slack = slack;
  std::uint64_t neg = 0;
  std::uint64_t pos = 0;
  std::uint64_t n = 1;
  for (double x : checkpoints) {
    const auto top = detail::floor_to_index(x);
    for (; n <= top; ++n) {
      const int s = sign_of(n);
      if (s < 0) {
        ++neg;
      } else if (s > 0) {
        ++pos;
      } else if (report.vanishing.size() < 100) {
        report.vanishing.push_back(n);
      }
    }
    SignCheckpoint cp;
    cp.x = x;
    cp.negative = neg;
    cp.positive = pos;
    cp.nonvanishing = neg + pos;
    if (cp.nonvanishing > 0) {
      cp.frac_neg = static_cast<double>(neg) / static_cast<double>(cp.nonvanishing);
      cp.frac_pos = static_cast<double>(pos) / static_cast<double>(cp.nonvanishing);
    }
    cp.deviation = std::abs(cp.frac_neg - 0.5);
    report.checkpoints.push_back(cp);
  }
  for (std::size_t i = 1; i < report.checkpoints.size(); ++i) {
    if (report.checkpoints[i].deviation > report.checkpoints[i - 1].deviation + slack) {
      report.trend_nonincreasing = false;
    }
  }
  report.generic = neg > 0 && pos > 0;
  return report;
}

}  // namespace

SignReport run_sign_equidistribution(const CoeffTable& coeffs, std::vector<double> checkpoints, double slack) {
  return sign_report(coeffs.limit(), std::move(checkpoints), slack, [&](std::uint64_t n) { return coeffs.sign(n); });
}

SignReport run_sign_equidistribution(const SieveTable<double>& t, std::vector<double> checkpoints, double slack) {
  return sign_report(t.limit(), std::move(checkpoints), slack,
                     [&](std::uint64_t n) { return (t[n] > 0) - (t[n] < 0); });
}

// ---------------------------------------------------------------------------
// Residue-class densities

namespace {

DensityReport density_report(std::span<const double> weights, std::uint64_t modulus, std::vector<double> checkpoints,
                             std::size_t small_threshold) {
  if (modulus == 0) throw DomainError("modulus must be >= 1");
  const std::uint64_t limit = weights.size() - 1;
  checkpoints = validate_checkpoints(std::move(checkpoints), limit);

  DensityReport report;
  report.modulus = modulus;
  report.small_sample_threshold = small_threshold;

  std::vector<std::uint64_t> residues;
  std::vector<std::int64_t> slot(modulus, -1);
  for (std::uint64_t a = 0; a < modulus; ++a) {
    if (std::gcd(a, modulus) == 1) {
      slot[a] = static_cast<std::int64_t>(residues.size());
      residues.push_back(a);
    }
  }
  std::vector<KahanSum<double>> sums(residues.size());
  std::vector<std::uint64_t> terms(residues.size(), 0);
  const double phi = static_cast<double>(residues.size());

  std::uint64_t n = 1;
  for (double x : checkpoints) {
    const auto top = detail::floor_to_index(x);
    for (; n <= top; ++n) {
      const double w = weights[n];
      if (w < 0) report.nonnegative = false;
      const auto s = slot[n % modulus];
      if (s < 0 || w == 0) continue;
      sums[static_cast<std::size_t>(s)] += w;
      ++terms[static_cast<std::size_t>(s)];
    }
    DensityCheckpoint cp;
    cp.x = x;
    KahanSum<double> total;
    for (const auto& s : sums) total += s.value();
    cp.s_d = total.value();
    cp.scaled = cp.s_d * std::sqrt(std::log(x)) / x;
    if (cp.s_d == 0) report.degenerate = true;
    KahanSum<double> share_total;
    for (std::size_t i = 0; i < residues.size(); ++i) {
      ClassShare c;
      c.residue = residues[i];
      c.sum = sums[i].value();
      c.gamma_hat = cp.s_d != 0 ? c.sum / cp.s_d : 0.0;
      c.terms = terms[i];
      c.small_sample = terms[i] < small_threshold;
      share_total += c.gamma_hat;
      cp.max_uniform_error = std::max(cp.max_uniform_error, std::abs(c.gamma_hat * phi - 1.0));
      cp.classes.push_back(c);
    }
    cp.partition_error = cp.s_d != 0 ? std::abs(share_total.value() - 1.0) : 0.0;
    report.checkpoints.push_back(std::move(cp));
  }
  return report;
}

CaseTwoPrediction case_two_prediction(const SieveTable<double>& g, const DirichletCharacter& chi,
                                      const PrimeSet& primes, double cutoff, const DensityCheckpoint& last) {
  CaseTwoPrediction pred;
  pred.character_index = chi.index();
  pred.psi_cutoff = std::min(cutoff, static_cast<double>(g.limit()));
  const std::uint64_t D = chi.modulus();
  double log_product = 0;
  for (std::uint32_t p : primes.primes()) {
    if (p > pred.psi_cutoff) break;
    if (D % p == 0 || chi.real_value(p) != -1) continue;
    double num = 1;
    double den = 1;
    double sign = 1;
    for (std::uint64_t q = p; q <= g.limit(); q *= p) {
      sign = -sign;
      const double term = g[q] / static_cast<double>(q);
      num += sign * term;
      den += term;
      if (q > g.limit() / p) break;
    }
    if (num <= 0) {
      // psi_p vanishes or changes sign; carry the product exactly through zero.
      log_product = -INFINITY;
      break;
    }
    log_product += std::log(num) - std::log(den);
  }
  pred.psi_product = std::exp(log_product);
  const double phi = static_cast<double>(euler_phi(D));
  for (const auto& c : last.classes) {
    const double gamma = (1.0 + chi.real_value(c.residue) * pred.psi_product) / phi;
    pred.predicted.emplace_back(c.residue, gamma);
    pred.max_deviation = std::max(pred.max_deviation, std::abs(gamma - c.gamma_hat));
  }
  return pred;
}

}  // namespace

DensityReport run_progression_density(const SieveTable<double>& g, std::uint64_t modulus,
                                      std::vector<double> checkpoints, const PrimeSet& primes,
                                      const DensityOptions& options) {
  DensityReport report = density_report(g.raw(), modulus, std::move(checkpoints), options.small_sample_threshold);
  report.weighting = "indicator";
  const double top = report.checkpoints.back().x;
  if (options.detect && top >= 100) {
    report.exceptional = detect_exceptional_quadratic([&g](std::uint64_t p) { return g[p]; }, modulus, top, 3, primes);
    if (report.exceptional->character) {
      report.case_two =
          case_two_prediction(g, *report.exceptional->character, primes, options.psi_cutoff, report.checkpoints.back());
    }
  }
  return report;
}

DensityReport run_abs_mean_progressions(const NormalizedCoeffs& nc, std::uint64_t modulus,
                                        std::vector<double> checkpoints, const PrimeSet& primes,
                                        const DensityOptions& options) {
  std::vector<double> weights(nc.values.size());
  std::transform(nc.values.begin(), nc.values.end(), weights.begin(), [](double v) { return std::abs(v); });
  weights[0] = 0;
  DensityReport report = density_report(weights, modulus, std::move(checkpoints), options.small_sample_threshold);
  report.weighting = "abs-normalized";
  const double top = report.checkpoints.back().x;
  if (options.detect && top >= 100) {
    report.exceptional =
        detect_exceptional_quadratic([&weights](std::uint64_t p) { return weights[p]; }, modulus, top, 3, primes);
  }
  return report;
}

double ScalingCheck::drift_from(double from) const {
  double worst = 0;
  for (std::size_t i = 0; i < step_ratios.size(); ++i) {
    if (x[i] >= from) worst = std::max(worst, std::abs(step_ratios[i] - 1.0));
  }
  return worst;
}

ScalingCheck run_scaling_check(const SieveTable<double>& g, std::vector<double> checkpoints) {
  checkpoints = validate_checkpoints(std::move(checkpoints), g.limit());
  ScalingCheck check;
  check.degenerate = true;
  KahanSum<double> acc;
  std::uint64_t n = 1;
  for (double x : checkpoints) {
    const auto top = detail::floor_to_index(x);
    for (; n <= top; ++n) {
      acc += g[n];
      if (n >= 2 && g[n] != 0) check.degenerate = false;
    }
    check.x.push_back(x);
    check.scaled.push_back(acc.value() * std::sqrt(std::log(x)) / x);
  }
  for (std::size_t i = 0; i + 1 < check.scaled.size(); ++i) {
    check.step_ratios.push_back(check.scaled[i] != 0 ? check.scaled[i + 1] / check.scaled[i] : 0.0);
  }
  return check;
}

// ---------------------------------------------------------------------------
// Prime-sum inequality chain

Lemma10Report run_lemma10_chain(const NormalizedCoeffs& nc, const PrimeSet& primes, std::vector<double> checkpoints) {
  checkpoints = validate_checkpoints(std::move(checkpoints), std::min<std::uint64_t>(nc.limit, primes.limit()));
  for (double x : checkpoints) {
    if (x <= std::exp(1.0)) throw DomainError("run_lemma10_chain: checkpoints must exceed e");
  }
  const double root6 = std::sqrt(6.0);
  Lemma10Report report;
  KahanSum<double> sq;
  KahanSum<double> ab;
  KahanSum<double> ng;
  KahanSum<double> full;
  const auto ps = primes.primes();
  std::size_t i = 0;
  for (double x : checkpoints) {
    for (; i < ps.size() && ps[i] <= x; ++i) {
      const double a = nc[ps[i]];
      const double inv = 1.0 / static_cast<double>(ps[i]);
      full += a * a * inv;
      if (std::abs(a) <= root6) {
        sq += a * a * inv;
        ab += std::abs(a) * inv;
      }
      if (a < 0) ng += inv;
    }
    Lemma10Checkpoint cp;
    cp.x = x;
    cp.L = std::log(std::log(x));
    cp.square_sum = sq.value();
    cp.abs_sum = ab.value();
    cp.negative_sum = ng.value();
    cp.full_square_sum = full.value();
    cp.diff_square = cp.square_sum - (1.0 - 2.0 / 6.0) * cp.L;
    cp.diff_abs = cp.abs_sum - (2.0 / 3.0) / root6 * cp.L;
    cp.diff_negative = cp.negative_sum - cp.L / 216.0;
    report.checkpoints.push_back(cp);
  }
  const auto& last = report.checkpoints.back();
  const double h = last.full_square_sum / last.L;
  report.hypothesis_failure = !(h >= 0.5 && h <= 1.5);
  auto drift = [&](double Lemma10Checkpoint::*field) {
    const auto [lo, hi] = std::minmax_element(report.checkpoints.begin(), report.checkpoints.end(),
                                              [field](const auto& a, const auto& b) { return a.*field < b.*field; });
    return (*hi).*field - (*lo).*field;
  };
  report.drift_square = drift(&Lemma10Checkpoint::diff_square);
  report.drift_abs = drift(&Lemma10Checkpoint::diff_abs);
  report.drift_negative = drift(&Lemma10Checkpoint::diff_negative);
  return report;
}

// ---------------------------------------------------------------------------
// Wirsing

double WirsingReport::spread_from(double from) const {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& cp : checkpoints) {
    if (cp.x < from) continue;
    lo = std::min(lo, cp.ratio);
    hi = std::max(hi, cp.ratio);
  }
  return hi >= lo ? hi - lo : 0.0;
}

WirsingReport run_wirsing_check(const SieveTable<double>& lambda, const PrimeSet& primes,
                                std::vector<double> checkpoints, std::optional<double> declared_tau) {
  checkpoints = validate_checkpoints(std::move(checkpoints), std::min<std::uint64_t>(lambda.limit(), primes.limit()));
  for (double x : checkpoints) {
    if (x <= std::exp(1.0)) throw DomainError("run_wirsing_check: checkpoints must exceed e");
  }
  WirsingReport report;
  report.spec_id = lambda.spec_id();
  report.declared_tau = declared_tau;
  const std::uint64_t limit = lambda.limit();

  struct Row {
    double x;
    double sum;
    double tau_sum;
    double log_euler;
  };
  std::vector<Row> rows;
  KahanSum<double> sum;
  KahanSum<double> tau_sum;
  KahanSum<double> log_euler;
  const auto ps = primes.primes();
  std::size_t i = 0;
  std::uint64_t n = 1;
  for (double x : checkpoints) {
    const auto top = detail::floor_to_index(x);
    for (; n <= top; ++n) {
      if (lambda[n] < 0) throw DomainError("run_wirsing_check: lambda must be nonnegative");
      sum += lambda[n];
    }
    for (; i < ps.size() && ps[i] <= top; ++i) {
      const std::uint64_t p = ps[i];
      const double pd = static_cast<double>(p);
      tau_sum += lambda[p] * std::log(pd) / pd;
      double local = 0;
      for (std::uint64_t q = p;; q *= p) {
        local += lambda[q] / static_cast<double>(q);
        if (q > limit / p) break;
      }
      log_euler += std::log1p(local);
    }
    rows.push_back({x, sum.value(), tau_sum.value(), log_euler.value()});
  }

  report.tau_used = declared_tau ? *declared_tau : rows.back().tau_sum / std::log(rows.back().x);
  if (!(report.tau_used > 0)) throw DomainError("run_wirsing_check: tau must be positive");
  const double lead = std::exp(-kEulerGamma * report.tau_used) / std::tgamma(report.tau_used);
  for (const auto& r : rows) {
    WirsingCheckpoint cp;
    cp.x = r.x;
    cp.sum = r.sum;
    cp.tau_hat = r.tau_sum / std::log(r.x);
    cp.euler = std::exp(r.log_euler);
    cp.predicted = lead * r.x / std::log(r.x) * cp.euler;
    cp.ratio = cp.sum / cp.predicted;
    report.checkpoints.push_back(cp);
  }
  return report;
}

// ---------------------------------------------------------------------------
// D sweep

SweepReport run_d_sweep(const SieveTable<double>& g, const std::vector<std::uint64_t>& moduli, double x,
                        std::size_t small_sample_threshold) {
  validate_checkpoints({x}, g.limit());
  SweepReport report;
  report.x = x;
  for (std::uint64_t D : moduli) {
    const DensityReport d = density_report(g.raw(), D, {x}, small_sample_threshold);
    const auto& cp = d.checkpoints.back();
    SweepRow row;
    row.modulus = D;
    row.max_error = cp.max_uniform_error;
    row.envelope = std::pow(std::log(static_cast<double>(D)) / std::log(x), 1.0 / 49.0);
    row.min_class_terms = cp.classes.empty() ? 0 : cp.classes.front().terms;
    for (const auto& c : cp.classes) {
      row.min_class_terms = std::min(row.min_class_terms, c.terms);
      if (c.small_sample) ++row.small_classes;
    }
    if (!std::isfinite(row.max_error) || d.degenerate) report.all_finite = false;
    report.rows.push_back(row);
  }
  return report;
}

void SweepReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "D,max_error,envelope,small_classes,min_class_terms\n";
  for (const auto& r : rows) {
    out << r.modulus << ',' << ValueTraits<double>::format(r.max_error) << ','
        << ValueTraits<double>::format(r.envelope) << ',' << r.small_classes << ',' << r.min_class_terms << '\n';
  }
}

// ---------------------------------------------------------------------------

void run_jobs(const std::vector<std::function<void()>>& jobs, unsigned workers) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        jobs[j]();
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace multmean
