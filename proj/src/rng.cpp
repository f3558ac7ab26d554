#include "fedsim/rng.hpp"

#include <cassert>
#include <cmath>

namespace fedsim {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + kGolden + (h << 6) + (h >> 2)));
}

std::uint64_t hash_string(std::string_view s) {
  // FNV-1a.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t RngStream::next_u64() {
  // splitmix64 step.
  std::uint64_t z = (state_ += kGolden);
  return mix64(z);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
  double u;
  do {
    u = uniform();
  } while (u <= 0.0);
  return u;
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
  assert(n > 0);
  // Lemire's multiply-shift reduction.
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double RngStream::normal() {
  double u1 = uniform_pos();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

double RngStream::gamma(double shape) {
  assert(shape > 0.0);
  if (shape < 1.0) {
    // Boost by one and scale back.
    double u = uniform_pos();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

RngStream derive_stream(std::uint64_t root_seed, std::string_view purpose,
                        std::uint64_t client, std::uint64_t round) {
  std::uint64_t h = mix64(root_seed);
  h = hash_combine(h, hash_string(purpose));
  h = hash_combine(h, client);
  h = hash_combine(h, round);
  return RngStream(h);
}

}  // namespace fedsim
