#include "tdwn/random.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tdwn {

namespace {

double parse_seconds(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value))
    throw std::invalid_argument("bad number '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  for (;;) {
    const auto next = text.find(sep, pos);
    parts.push_back(text.substr(pos, next - pos));
    if (next == std::string_view::npos) return parts;
    pos = next + 1;
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TtlDistribution TtlDistribution::constant(double value) {
  if (!(value > 0.0)) throw std::invalid_argument("constant TTL must be positive");
  return {Kind::Constant, value, value};
}

TtlDistribution TtlDistribution::uniform(double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("uniform TTL needs 0 < lo < hi");
  return {Kind::Uniform, lo, hi};
}

TtlDistribution TtlDistribution::parse(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() == 2 && parts[0] == "constant") return constant(parse_seconds(parts[1]));
  if (parts.size() == 3 && parts[0] == "uniform")
    return uniform(parse_seconds(parts[1]), parse_seconds(parts[2]));
  throw std::invalid_argument("ttl must be constant:X or uniform:lo:hi, got '" + std::string(text) + "'");
}

double TtlDistribution::draw(std::mt19937_64& rng) const {
  if (kind_ == Kind::Constant) return lo_;
  return std::uniform_real_distribution<double>(lo_, hi_)(rng);
}

std::string TtlDistribution::str() const {
  if (kind_ == Kind::Constant) return "constant:" + format_double(lo_);
  return "uniform:" + format_double(lo_) + ":" + format_double(hi_);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

}  // namespace tdwn
