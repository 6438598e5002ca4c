#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

#include "rbs/bytes.hpp"

namespace rbs {

using Hash256 = std::array<uint8_t, 32>;

// Domain separation prefixes. Every hash in the system goes through exactly
// one of these so digests from different contexts can never collide.
enum class HashDomain : uint8_t {
    MerkleLeaf = 0x00,
    MerkleNode = 0x01,
    Key = 0x02,
    Commitment = 0x03,
    Prf = 0x04,
    Object = 0x05,
};

// Raw SHA-256, no domain prefix. Only used by hash_domain and tests that pin
// the primitive against its published vectors.
Hash256 sha256(const uint8_t* data, size_t n);
inline Hash256 sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

Hash256 hash_domain(HashDomain d, const uint8_t* data, size_t n);
inline Hash256 hash_domain(HashDomain d, const Bytes& b) {
    return hash_domain(d, b.data(), b.size());
}

// Two-input convenience for interior Merkle nodes and keyed constructions.
Hash256 hash_domain2(HashDomain d, const Hash256& a, const Hash256& b);

std::string hash_hex(const Hash256& h);
Hash256 hash_from_hex(const std::string& hex);

// Incremental SHA-256, used for trace digests.
class HashWriter {
public:
    HashWriter();
    ~HashWriter();
    HashWriter(const HashWriter&) = delete;
    HashWriter& operator=(const HashWriter&) = delete;
    void update(const uint8_t* data, size_t n);
    void update(std::string_view s) {
        update(reinterpret_cast<const uint8_t*>(s.data()), s.size());
    }
    Hash256 finish();

private:
    void* ctx_;
};

}  // namespace rbs
