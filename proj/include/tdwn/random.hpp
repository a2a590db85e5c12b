#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace tdwn {

/// Independent stream seeds derived from one master seed (splitmix64 mixing),
/// so adding draws to one component never shifts another component's stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

namespace stream {
inline constexpr std::uint64_t kResolver = 1;
inline constexpr std::uint64_t kAttacker = 2;
inline constexpr std::uint64_t kUpdates = 3;
inline constexpr std::uint64_t kAuthTtl = 4;
inline constexpr std::uint64_t kWorkload = 5;
inline constexpr std::uint64_t kMalformed = 6;
}  // namespace stream

/// TTL distribution: constant:X or uniform:lo:hi (seconds).
class TtlDistribution {
 public:
  enum class Kind { Constant, Uniform };

  static TtlDistribution constant(double value);
  static TtlDistribution uniform(double lo, double hi);
  /// Parses "constant:X" or "uniform:lo:hi"; throws std::invalid_argument.
  static TtlDistribution parse(std::string_view text);

  Kind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mean() const { return 0.5 * (lo_ + hi_); }
  double draw(std::mt19937_64& rng) const;
  std::string str() const;

 private:
  TtlDistribution(Kind kind, double lo, double hi) : kind_(kind), lo_(lo), hi_(hi) {}

  Kind kind_;
  double lo_;
  double hi_;
};

/// Shortest round-trip decimal form of a double; identical across runs.
std::string format_double(double value);

}  // namespace tdwn
