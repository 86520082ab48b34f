#include "obeskit/core/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace obeskit::digest {

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string salted_tag(const std::string& salt, const std::string& value, int hex_chars) {
    std::string h = sha256_hex(salt + ":" + value);
    if (hex_chars > 0 && static_cast<std::size_t>(hex_chars) < h.size())
        h.resize(static_cast<std::size_t>(hex_chars));
    return h;
}

}  // namespace obeskit::digest
