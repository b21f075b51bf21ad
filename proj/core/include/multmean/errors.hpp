#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace multmean {

/// Precondition on a numeric argument was violated (bad range, empty interval, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A multiplicative-function specification cannot produce a requested value.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact arithmetic would exceed its representation.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A table claimed to be multiplicative fails a_{mn} = a_m a_n for a coprime pair.
class MultiplicativityError : public SpecError {
 public:
  MultiplicativityError(std::uint64_t m, std::uint64_t n)
      : SpecError("multiplicativity violated at (" + std::to_string(m) + "," + std::to_string(n) + ")"),
        pair_(m, n) {}
  std::pair<std::uint64_t, std::uint64_t> pair() const noexcept { return pair_; }

 private:
  std::pair<std::uint64_t, std::uint64_t> pair_;
};

}  // namespace multmean
