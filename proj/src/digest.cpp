#include "flowplan/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace flowplan {

std::array<unsigned char, 32> sha256(std::string_view data) {
    std::array<unsigned char, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    static const char* kHex = "0123456789abcdef";
    auto digest = sha256(data);
    std::string hex;
    hex.reserve(64);
    for (unsigned char byte : digest) {
        hex.push_back(kHex[byte >> 4]);
        hex.push_back(kHex[byte & 0x0f]);
    }
    return hex;
}

std::uint64_t sha256_low64(std::string_view data) {
    auto digest = sha256(data);
    std::uint64_t value = 0;
    for (int i = 24; i < 32; ++i) {
        value = (value << 8) | digest[static_cast<std::size_t>(i)];
    }
    return value;
}

}  // namespace flowplan
