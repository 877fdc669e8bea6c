#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kexlab::crypto {

inline constexpr std::size_t kTagLength = 16;

using Bytes = std::vector<std::uint8_t>;

// HMAC over `message` with the named digest ("SHA256", "SHA512",
// "SHA3-256", ...), truncated to kTagLength bytes. Throws Error(InvalidArgument)
// for an unknown digest.
Bytes keyed_tag(std::string_view digest, std::span<const std::uint8_t> key, std::span<const std::uint8_t> message);

bool tags_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

std::string sha256_hex(std::string_view data);

std::string to_hex(std::span<const std::uint8_t> bytes);
// Throws Error(InvalidArgument) on odd length or a non-hex character.
Bytes from_hex(std::string_view text);

}  // namespace kexlab::crypto
