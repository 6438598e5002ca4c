#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

#include "rbs/hash.hpp"

namespace rbs {

// 256-bit unsigned integer, the point type of the partitioned key space.
// Stored as four 64-bit limbs, least significant first; hash digests are
// interpreted big-endian.
struct Key256 {
    std::array<uint64_t, 4> limb{0, 0, 0, 0};

    static Key256 from_u64(uint64_t v) {
        Key256 k;
        k.limb[0] = v;
        return k;
    }
    static Key256 from_hash(const Hash256& h);
    static Key256 max();  // 2^256 - 1

    // floor(2^bits / n) and 2^bits mod n, for 1 <= bits <= 256.
    static void div_pow2(unsigned bits, uint64_t n, Key256& quot, uint64_t& rem);

    uint64_t low_u64() const { return limb[0]; }
    bool is_zero() const { return !(limb[0] | limb[1] | limb[2] | limb[3]); }

    Key256 add(const Key256& o) const;  // wraps mod 2^256
    Key256 sub(const Key256& o) const;  // wraps mod 2^256
    Key256 add_u64(uint64_t v) const { return add(from_u64(v)); }

    std::string hex() const;  // 64 hex chars, big-endian

    friend std::strong_ordering operator<=>(const Key256& a, const Key256& b) {
        for (int i = 3; i >= 0; --i) {
            if (a.limb[i] != b.limb[i]) return a.limb[i] <=> b.limb[i];
        }
        return std::strong_ordering::equal;
    }
    friend bool operator==(const Key256&, const Key256&) = default;
};

// Deterministic key derivation for account ids, node ids and transactions.
// Throws std::invalid_argument on empty input.
Key256 hash_key(const Bytes& input);
Key256 hash_key(std::string_view input);

}  // namespace rbs
