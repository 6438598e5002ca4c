#include "rbs/key256.hpp"

#include <stdexcept>

namespace rbs {

Key256 Key256::from_hash(const Hash256& h) {
    Key256 k;
    for (int i = 0; i < 4; ++i) {
        uint64_t v = 0;
        for (int j = 0; j < 8; ++j) v = (v << 8) | h[static_cast<size_t>(i * 8 + j)];
        k.limb[static_cast<size_t>(3 - i)] = v;  // first digest byte is most significant
    }
    return k;
}

Key256 Key256::max() {
    Key256 k;
    k.limb = {~0ull, ~0ull, ~0ull, ~0ull};
    return k;
}

void Key256::div_pow2(unsigned bits, uint64_t n, Key256& quot, uint64_t& rem) {
    if (bits == 0 || bits > 256) throw std::invalid_argument("bits out of range");
    if (n == 0) throw std::invalid_argument("division by zero");
    // Long division of the 320-bit value 2^bits by n, most significant limb first.
    std::array<uint64_t, 5> dividend{0, 0, 0, 0, 0};  // little-endian limbs
    dividend[bits / 64] = (bits % 64 == 0) ? 1ull : (1ull << (bits % 64));
    std::array<uint64_t, 5> q{0, 0, 0, 0, 0};
    unsigned __int128 r = 0;
    for (int i = 4; i >= 0; --i) {
        unsigned __int128 cur = (r << 64) | dividend[static_cast<size_t>(i)];
        q[static_cast<size_t>(i)] = static_cast<uint64_t>(cur / n);
        r = cur % n;
    }
    if (q[4] != 0) throw std::overflow_error("quotient exceeds 256 bits");
    quot.limb = {q[0], q[1], q[2], q[3]};
    rem = static_cast<uint64_t>(r);
}

Key256 Key256::add(const Key256& o) const {
    Key256 out;
    unsigned __int128 carry = 0;
    for (int i = 0; i < 4; ++i) {
        unsigned __int128 s = carry + limb[static_cast<size_t>(i)] + o.limb[static_cast<size_t>(i)];
        out.limb[static_cast<size_t>(i)] = static_cast<uint64_t>(s);
        carry = s >> 64;
    }
    return out;
}

Key256 Key256::sub(const Key256& o) const {
    Key256 out;
    unsigned __int128 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        unsigned __int128 d = static_cast<unsigned __int128>(limb[static_cast<size_t>(i)]) -
                              o.limb[static_cast<size_t>(i)] - borrow;
        out.limb[static_cast<size_t>(i)] = static_cast<uint64_t>(d);
        borrow = (d >> 64) ? 1 : 0;
    }
    return out;
}

std::string Key256::hex() const {
    Bytes be;
    be.reserve(32);
    for (int i = 3; i >= 0; --i) {
        for (int j = 7; j >= 0; --j)
            be.push_back(static_cast<uint8_t>(limb[static_cast<size_t>(i)] >> (8 * j)));
    }
    return to_hex(be);
}

Key256 hash_key(const Bytes& input) {
    if (input.empty()) throw std::invalid_argument("hash_key: empty input");
    return Key256::from_hash(hash_domain(HashDomain::Key, input));
}

Key256 hash_key(std::string_view input) { return hash_key(from_string(input)); }

}  // namespace rbs
