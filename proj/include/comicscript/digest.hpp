#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace comicscript {

// Lowercase hex SHA-256.
std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& data);
std::string sha256_hex(const std::vector<std::uint8_t>& data);

// Canonical serialization for digesting: object keys sorted, no
// insignificant whitespace, shortest-round-trip number formatting.
std::string canonical_json(const nlohmann::json& value);

// Digest of a request payload: sha256 over the canonical form.
std::string request_digest(const nlohmann::json& request);

std::string base64_encode(const std::uint8_t* data, size_t len);
std::string base64_encode(const std::vector<std::uint8_t>& data);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace comicscript
