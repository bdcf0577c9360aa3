#pragma once

#include <cstdint>

namespace ccr {

// SplitMix64 output function (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept
{
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Counter-based uniform source: draw number c of a stream is a pure
//! function of (seed, c). SplitMix64 evaluated at an arbitrary position,
//! so any unit's draws can be produced without generating its predecessors.
class CounterRng
{
public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept
    : key_(splitmix64_mix(seed ^ 0x6a09e667f3bcc909ULL))
  {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept
  {
    return splitmix64_mix(key_ + (counter + 1) * kGamma);
  }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  constexpr double uniform(std::uint64_t counter) const noexcept
  {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
};

} // namespace ccr
