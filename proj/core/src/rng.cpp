#include "dlgn/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dlgn {

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal(double mean, double sd) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + sd * spare_;
    }
    // Box-Muller; u1 in (0,1] so the log is finite.
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + sd * r * std::cos(theta);
}

Rng Rng::stream(std::uint64_t root_seed, std::uint64_t stream_id) {
    return Rng(mix_seed(root_seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1)));
}

std::string Rng::serialize() const {
    std::ostringstream out;
    out << eng_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
    // Exact double round-trip via bit pattern.
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(spare_));
    std::memcpy(&bits, &spare_, sizeof(bits));
    out << bits;
    return out.str();
}

Rng Rng::deserialize(const std::string& text) {
    Rng r(0);
    std::istringstream in(text);
    int has_spare = 0;
    std::uint64_t bits = 0;
    in >> r.eng_ >> has_spare >> bits;
    if (!in) throw std::invalid_argument("malformed rng state");
    r.has_spare_ = has_spare != 0;
    std::memcpy(&r.spare_, &bits, sizeof(bits));
    return r;
}

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace dlgn
