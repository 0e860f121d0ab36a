#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lcmt {

/// Error type thrown by every module. Messages are meant for the CLI user
/// and always name the offending input (file, line, op, shape).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  throw Error(os.str());
}

template <typename... Args>
void check(bool cond, Args&&... args) {
  if (!cond) fail(std::forward<Args>(args)...);
}

// ---------------------------------------------------------------- strings

std::vector<std::string> split_ws(std::string_view s);
std::vector<std::string> split_on(std::string_view s, char sep);
std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");
std::string lowercase_ascii(std::string_view s);

/// Splits a UTF-8 string into codepoint-sized chunks. Invalid bytes are
/// passed through as single-byte chunks rather than rejected.
std::vector<std::string> utf8_chars(std::string_view s);

// ---------------------------------------------------------------- hashing

/// FNV-1a over raw bytes; used for parameter checksums (freeze law).
/// Passing a previous digest as the seed chains blocks.
inline constexpr std::uint64_t kFnvBasis = 1469598103934665603ULL;
std::uint64_t fnv1a(const void* data, std::size_t nbytes, std::uint64_t seed = kFnvBasis);

// -------------------------------------------------------------------- rng

/// All shuffles and subsamples in the pipeline go through these helpers so
/// that artifacts do not depend on the standard library's unspecified
/// std::shuffle/std::sample algorithms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t next_below(std::size_t n);

  /// Uniform real in [0, 1).
  double next_real();

  /// Uniform real in [-a, a).
  float next_symmetric(float a) {
    return static_cast<float>((next_real() * 2.0 - 1.0) * a);
  }

private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

/// First k entries of a seeded permutation, restored to ascending order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace lcmt
