#ifndef LICORM_RANDOM_HPP
#define LICORM_RANDOM_HPP

#include <cstddef>
#include <cstdint>

namespace licorm {

/// SplitMix64: state advances by the golden-ratio increment and each output
/// is a mixed copy of the state. Bit-identical on every platform, so a seed
/// alone reproduces a generated instance.
class SplitMix64
{
public:
  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next() noexcept
  {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) noexcept { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

  /// Uniform integer in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) noexcept { return lo + index(hi - lo + 1); }

private:
  std::uint64_t state_;
};

} // namespace licorm

#endif // LICORM_RANDOM_HPP
