#include "multmean/constructions.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "multmean/errors.hpp"

namespace multmean {

double BnSequence::at(std::size_t n) const {
  if (n == 0 || n > b.size()) throw DomainError("BnSequence index out of range: " + std::to_string(n));
  return b[n - 1];
}

BnSequence generate_bn(std::size_t count) {
  if (count < 1) throw DomainError("generate_bn: count must be >= 1");
  BnSequence seq;
  seq.b.reserve(count);
  seq.b.push_back(1.5);
  while (seq.b.size() < count) {
    const double prev = seq.b.back();
    seq.b.push_back(prev * (1.0 + 1.0 / std::log(prev)));
  }
  return seq;
}

BnSequence generate_bn_until(double bound) {
  BnSequence seq = generate_bn(1);
  while (seq.b.back() <= bound) {
    const double prev = seq.b.back();
    seq.b.push_back(prev * (1.0 + 1.0 / std::log(prev)));
  }
  return seq;
}

double beta_threshold() { return std::exp(std::numbers::e * std::numbers::e); }

double beta_fn(double y) {
  if (!(y >= beta_threshold())) throw DomainError("beta_fn: y must be >= exp(e^2)");
  return std::sqrt(std::log(std::log(std::log(y))));
}

int ExampleThreeFunction::value(std::uint64_t p) const { return p < values_.size() ? values_[p] : 0; }

MultSpec<double> ExampleThreeFunction::as_spec() const {
  auto values = values_;
  return MultSpec<double>{"example3(c=" + ValueTraits<double>::format(c_) + ")",
                          [values](std::uint64_t p) { return p < values.size() ? double(values[p]) : 0.0; },
                          ZeroBeyondFirstPower{}};
}

void ExampleThreeFunction::export_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "p,value\n";
  for (std::uint64_t n = 2; n < values_.size(); ++n) {
    if (is_prime_[n]) out << n << ',' << int(values_[n]) << '\n';
  }
}

ExampleThreeFunction build_example3(double c, double x_max, const PrimeSet& primes) {
  if (!(c > 0 && c < 1)) throw DomainError("build_example3: c must lie in (0, 1)");
  if (std::floor(x_max) > static_cast<double>(primes.limit())) throw DomainError("build_example3: x_max exceeds prime limit");
  const double start = beta_threshold();
  const BnSequence seq = generate_bn_until(std::max(x_max, start));
  std::size_t first = 0;
  while (first < seq.b.size() && seq.b[first] < start) ++first;
  if (first >= seq.b.size() || seq.b[first] > x_max) {
    throw DomainError("build_example3: x_max must reach the first b_n above exp(e^2)");
  }

  ExampleThreeFunction f;
  f.c_ = c;
  f.x_max_ = x_max;
  const auto top = static_cast<std::uint64_t>(std::floor(x_max));
  f.values_.assign(top + 1, 0);
  f.is_prime_.assign(top + 1, 0);
  const auto ps = primes.primes();
  for (std::uint32_t p : ps) {
    if (p > top) break;
    f.is_prime_[p] = 1;
  }

  for (std::size_t i = first; i + 1 < seq.b.size(); ++i) {
    const double lo = seq.b[i];
    const double hi = seq.b[i + 1];
    if (hi > x_max) break;
    IntervalAssignment a;
    a.n = i + 1;
    a.lo = lo;
    a.hi = hi;
    a.y = static_cast<std::int64_t>(std::floor(lo * (beta_fn(hi) - beta_fn(lo))));
    const std::size_t begin = primes.prime_pi(lo);
    const std::size_t end = primes.prime_pi(hi);
    a.first_prime = begin;
    a.prime_count = end - begin;
    a.cap = static_cast<std::size_t>(std::floor(c * static_cast<double>(a.prime_count)));
    a.truncated = a.y > static_cast<std::int64_t>(a.cap);
    const auto minus = std::min<std::size_t>(static_cast<std::size_t>(std::max<std::int64_t>(a.y, 0)), a.prime_count);
    for (std::size_t j = 0; j < a.prime_count; ++j) {
      const std::uint32_t q = ps[begin + j];
      if (j < minus) {
        f.values_[q] = -1;
        ++a.minus_count;
      } else if (j < a.cap) {
        f.values_[q] = 1;
        ++a.plus_count;
      }
    }
    f.intervals_.push_back(a);
  }
  return f;
}

BracketingResult verify_bracketing(const BnSequence& seq, std::size_t n) {
  if (n == 0 || n + 1 > seq.count()) throw DomainError("verify_bracketing: n out of range");
  BracketingResult r;
  r.n = n;
  r.b_n = seq.at(n);
  if (r.b_n < beta_threshold()) throw DomainError("verify_bracketing: b_n below exp(e^2)");
  const double next = seq.at(n + 1);
  r.y = static_cast<std::int64_t>(std::floor(r.b_n * (beta_fn(next) - beta_fn(r.b_n))));
  const double lb = std::log(r.b_n);
  r.lower = r.b_n / std::pow(2.0 * lb, 4);
  r.upper = r.b_n / (lb * lb);
  const auto y = static_cast<double>(r.y);
  r.holds = r.lower <= y && y <= r.upper;
  return r;
}

BracketingScan scan_bracketing(const BnSequence& seq, double b_max) {
  BracketingScan scan;
  for (std::size_t n = 1; n + 1 <= seq.count(); ++n) {
    const double b = seq.at(n);
    if (b < beta_threshold()) continue;
    if (b > b_max) break;
    if (scan.scanned_from == 0) scan.scanned_from = n;
    scan.scanned_to = n;
    if (!verify_bracketing(seq, n).holds) scan.failures.push_back(n);
  }
  if (scan.scanned_from != 0) {
    scan.first_holding = scan.failures.empty() ? scan.scanned_from : scan.failures.back() + 1;
    if (*scan.first_holding > scan.scanned_to) scan.first_holding.reset();
  }
  return scan;
}

LambdaGrowth lambda_growth_diagnostic(const ExampleThreeFunction& f, const PrimeSet& primes, double x, double T,
                                      double grid_step, int refine) {
  if (x > f.x_max()) throw DomainError("lambda_growth_diagnostic: x exceeds the construction's range");
  if (x < 2) throw DomainError("lambda_growth_diagnostic: x must be >= 2");
  LambdaGrowth r;
  r.x = x;
  KahanSum<double> defect;
  KahanSum<double> mass;
  for (std::uint32_t p : primes.primes()) {
    if (p > x) break;
    const int v = f.value(p);
    const double pd = static_cast<double>(p);
    defect += static_cast<double>(std::abs(v) - v) / pd;
    mass += std::abs(v) * std::log(pd);
  }
  r.defect_sum = defect.value();
  r.mass_ratio = mass.value() / x;
  r.beta_x = x >= beta_threshold() ? beta_fn(x) : 0.0;
  r.defect_ratio = r.beta_x > 0 ? r.defect_sum / (2.0 * r.beta_x) : 0.0;
  const double step = grid_step > 0 ? grid_step : default_grid_step(x);
  r.lambda = minimize_lambda(primes, [&f](std::uint64_t p) { return Complex(f.value(p)); }, 1.5, x, T, step, refine);
  r.lambda_ratio = r.beta_x > 0 ? r.lambda.lambda / (2.0 * r.beta_x) : 0.0;
  return r;
}

}  // namespace multmean
