#include "rbs/hash.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <stdexcept>

namespace rbs {

std::string to_hex(const uint8_t* data, size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(n * 2);
    for (size_t i = 0; i < n; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

Hash256 sha256(const uint8_t* data, size_t n) {
    Hash256 out{};
    unsigned int len = 0;
    if (!EVP_Digest(data, n, out.data(), &len, EVP_sha256(), nullptr) || len != 32)
        throw std::runtime_error("sha256 failed");
    return out;
}

Hash256 hash_domain(HashDomain d, const uint8_t* data, size_t n) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    Hash256 out{};
    unsigned int len = 0;
    uint8_t prefix = static_cast<uint8_t>(d);
    bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) &&
              EVP_DigestUpdate(ctx, &prefix, 1) && EVP_DigestUpdate(ctx, data, n) &&
              EVP_DigestFinal_ex(ctx, out.data(), &len);
    EVP_MD_CTX_free(ctx);
    if (!ok || len != 32) throw std::runtime_error("sha256 failed");
    return out;
}

Hash256 hash_domain2(HashDomain d, const Hash256& a, const Hash256& b) {
    Bytes buf;
    buf.reserve(64);
    buf.insert(buf.end(), a.begin(), a.end());
    buf.insert(buf.end(), b.begin(), b.end());
    return hash_domain(d, buf);
}

std::string hash_hex(const Hash256& h) { return to_hex(h.data(), h.size()); }

static uint8_t nibble(char c) {
    if (c >= '0' && c <= '9') return static_cast<uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<uint8_t>(c - 'A' + 10);
    throw std::invalid_argument("bad hex digit");
}

Hash256 hash_from_hex(const std::string& hex) {
    if (hex.size() != 64) throw std::invalid_argument("hash hex must be 64 chars");
    Hash256 out{};
    for (size_t i = 0; i < 32; ++i)
        out[i] = static_cast<uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    return out;
}

HashWriter::HashWriter() {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 init failed");
    ctx_ = ctx;
}

HashWriter::~HashWriter() {
    if (ctx_) EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void HashWriter::update(const uint8_t* data, size_t n) {
    if (!EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, n))
        throw std::runtime_error("sha256 update failed");
}

Hash256 HashWriter::finish() {
    Hash256 out{};
    unsigned int len = 0;
    if (!EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len) || len != 32)
        throw std::runtime_error("sha256 final failed");
    return out;
}

}  // namespace rbs
