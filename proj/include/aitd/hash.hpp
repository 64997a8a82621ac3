#pragma once

#include <cstdint>
#include <string_view>

namespace aitd {

/// 64-bit FNV-1a. Used for corpus fingerprints, stopword-list hashes and the
/// model file checksum.
class Fnv1a64 {
public:
    static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

    constexpr Fnv1a64& update(std::string_view bytes) noexcept {
        for (const char c : bytes) {
            h_ ^= static_cast<unsigned char>(c);
            h_ *= kPrime;
        }
        return *this;
    }

    constexpr std::uint64_t digest() const noexcept { return h_; }

private:
    std::uint64_t h_ = kOffset;
};

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    return Fnv1a64{}.update(bytes).digest();
}

} // namespace aitd
