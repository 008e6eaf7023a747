#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace dlgn {

// Deterministic random source. Wraps mt19937_64 but implements the
// real-valued draws itself (uniform via 53-bit mantissa, normal via
// Box-Muller): std::normal_distribution's sequence is implementation-defined,
// which would break the bitwise-determinism guarantees across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Unbiased via rejection.
    std::uint64_t uniform_int(std::uint64_t n);

    double normal(double mean = 0.0, double sd = 1.0);

    // Derive an independent deterministic stream (e.g., one per layer).
    static Rng stream(std::uint64_t root_seed, std::uint64_t stream_id);

    // State round-trip for checkpoint resume.
    std::string serialize() const;
    static Rng deserialize(const std::string& text);

    bool operator==(const Rng& other) const = default;

  private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64 finalizer; used for seed derivation.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace dlgn
