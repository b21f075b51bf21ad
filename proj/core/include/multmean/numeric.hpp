#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace multmean {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Compensated (Kahan-Babuska/Neumaier) accumulator.
template <class Float>
class KahanSum {
 public:
  KahanSum() = default;
  explicit KahanSum(Float init) : sum_(init) {}

  KahanSum& operator+=(Float x) {
    const Float t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }
  KahanSum& operator-=(Float x) { return *this += -x; }

  Float value() const { return sum_ + comp_; }

 private:
  Float sum_{0};
  Float comp_{0};
};

/// Kahan accumulation of complex values, componentwise.
class ComplexKahanSum {
 public:
  ComplexKahanSum& operator+=(Complex z) {
    re_ += z.real();
    im_ += z.imag();
    return *this;
  }
  Complex value() const { return {re_.value(), im_.value()}; }

 private:
  KahanSum<double> re_;
  KahanSum<double> im_;
};

inline double to_double(const BigInt& v) { return v.convert_to<double>(); }
inline double to_double(const BigRational& v) { return v.convert_to<double>(); }

inline std::string to_decimal(const BigInt& v) { return v.str(); }
inline std::string to_decimal(const BigRational& v) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  if (denominator(v) == 1) return numerator(v).str();
  return numerator(v).str() + "/" + denominator(v).str();
}

/// Splits [begin, end) into `workers` contiguous chunks and runs `body(lo, hi)` on each.
/// Chunk boundaries depend only on the range and worker count.
inline void parallel_ranges(std::uint64_t begin, std::uint64_t end, unsigned workers,
                            const std::function<void(std::uint64_t, std::uint64_t)>& body) {
  if (end <= begin) return;
  const std::uint64_t n = end - begin;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(n, 256))));
  if (workers == 1) {
    body(begin, end);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t lo = begin + n * w / workers;
      const std::uint64_t hi = begin + n * (w + 1) / workers;
      pool.emplace_back([&body, &errors, w, lo, hi] {
        try {
          body(lo, hi);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline unsigned default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

}  // namespace multmean
