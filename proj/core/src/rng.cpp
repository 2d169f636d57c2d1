#include "bregman/rng.hpp"

#include <cmath>
#include <numbers>

namespace bregman {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

std::uint64_t RngStream::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  ++counter_;
  return mix64(state_);
}

double RngStream::uniform01() {
  // ((x >> 11) + 1) * 2^-53 lies in (0, 1]; never zero, safe for log().
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double RngStream::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::uniform_int(std::uint64_t bound) {
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  shuffle(idx);
  return idx;
}

Vector RngStream::normal_vector(std::size_t n, double stddev) {
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = stddev * normal();
  return out;
}

RngStream RngStream::derive(std::uint64_t stream_id) const {
  return RngStream(mix64(state_ ^ mix64(stream_id + 0x632BE59BD9B4E019ULL)));
}

}  // namespace bregman
