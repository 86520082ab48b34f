#pragma once

#include <string>

namespace obeskit::digest {

// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(const std::string& data);

// Truncated digest used for pseudonymous tags: first `hex_chars` of
// sha256(salt || ":" || value).
std::string salted_tag(const std::string& salt, const std::string& value, int hex_chars = 16);

}  // namespace obeskit::digest
