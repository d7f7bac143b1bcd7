#pragma once

#include "toonforge/modelio.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toonforge {

class ArchiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uncompressed ("stored") zip with fixed timestamps, entries in the given
/// order, so equal inputs give equal bytes.
std::vector<std::uint8_t> zip_store(const Bundle& files);

/// Reads archives written by zip_store (stored entries only; CRCs checked).
Bundle zip_read(const std::vector<std::uint8_t>& archive);

std::string sha256_hex(const std::vector<std::uint8_t>& bytes);

/// Digest over every path and content, length-prefixed.
std::string bundle_digest(const Bundle& bundle);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
/// Throws ArchiveError on malformed input. Whitespace is ignored.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace toonforge
