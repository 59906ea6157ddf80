#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "mflqg/linalg.hpp"

namespace mflqg {

// Identifies the generator and the mapping from (seed, run, agent, step,
// kind) to draws. Bump the version if that mapping changes.
inline constexpr std::string_view kGeneratorName = "philox4x32-10/v1";

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

std::uint64_t splitmix64(std::uint64_t x);

enum class NoiseKind : std::uint32_t {
  kInitialState = 0,
  kProcess = 1,
  kObservation = 2,
};

// Standard normal draws for one (run, agent, step, kind) substream. Streams
// with different coordinates never share counter blocks, so draws do not
// depend on the order in which streams are consumed.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t run, std::uint32_t agent,
                 std::uint32_t step, NoiseKind kind);

  double next();
  Vector draw(Eigen::Index size);

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter counter_;
  std::array<double, 2> buffer_{};
  int available_ = 0;
};

}  // namespace mflqg
