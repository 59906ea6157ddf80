#include "mflqg/rng.hpp"

#include <cmath>
#include <numbers>

namespace mflqg {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline PhiloxCounter round(const PhiloxCounter& c, const PhiloxKey& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// Uniform on the open interval (0, 1) with 53 random bits.
inline double to_open_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(a >> 5) << 26) | static_cast<std::uint64_t>(b >> 6);
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) {
  counter = round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = round(counter, key);
  }
  return counter;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t run,
                               std::uint32_t agent, std::uint32_t step,
                               NoiseKind kind) {
  const std::uint64_t k = splitmix64(seed ^ splitmix64(run));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  counter_ = {0u, step, agent, static_cast<std::uint32_t>(kind)};
}

void GaussianStream::refill() {
  const PhiloxCounter bits = philox4x32_10(counter_, key_);
  ++counter_[0];
  // Box-Muller on two 53-bit uniforms.
  const double u1 = to_open_unit(bits[0], bits[1]);
  const double u2 = to_open_unit(bits[2], bits[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  buffer_ = {radius * std::cos(angle), radius * std::sin(angle)};
  available_ = 2;
}

double GaussianStream::next() {
  if (available_ == 0) {
    refill();
  }
  return buffer_[static_cast<std::size_t>(2 - available_--)];
}

Vector GaussianStream::draw(Eigen::Index size) {
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    v(i) = next();
  }
  return v;
}

}  // namespace mflqg
