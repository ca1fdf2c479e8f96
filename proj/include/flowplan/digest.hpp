#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace flowplan {

/// SHA-256 of `data`.
std::array<unsigned char, 32> sha256(std::string_view data);

/// SHA-256 of `data` as 64 lowercase hex characters.
std::string sha256_hex(std::string_view data);

/// Low 64 bits of SHA-256(data): the digest read as a big-endian 256-bit
/// integer, truncated. Used to derive per-sample RNG seeds.
std::uint64_t sha256_low64(std::string_view data);

}  // namespace flowplan
