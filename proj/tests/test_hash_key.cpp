#include <doctest.h>

#include <stdexcept>

#include <set>
#include <string>

#include "rbs/key256.hpp"

using namespace rbs;

TEST_CASE("sha256 primitive matches the published vector") {
    CHECK(hash_hex(sha256(from_string("abc"))) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hash_key is deterministic") {
    CHECK(hash_key("hello") == hash_key("hello"));
    CHECK(hash_key("hello") != hash_key("hellp"));
}

TEST_CASE("hash_key golden value") {
    // Pinned from an independent reference run of SHA-256 over 0x02 || "abc".
    CHECK(hash_key("abc").hex() ==
          "909ac45e439911193205994d09399c29fede977ab212605f29ead5250a812e73");
}

TEST_CASE("hash_key rejects empty input") {
    CHECK_THROWS_AS(hash_key(""), std::invalid_argument);
}

TEST_CASE("10000 distinct inputs give 10000 distinct keys") {
    std::set<Key256> keys;
    for (int i = 0; i < 10000; ++i) keys.insert(hash_key("account-" + std::to_string(i)));
    CHECK(keys.size() == 10000);
}

TEST_CASE("Key256 ordering follows the integer value") {
    CHECK(Key256::from_u64(1) < Key256::from_u64(2));
    Key256 high;
    high.limb[3] = 1;  // 2^192
    CHECK(Key256::from_u64(~0ull) < high);
}

TEST_CASE("Key256 add/sub round-trip and div_pow2") {
    Key256 a = Key256::from_u64(123456789);
    Key256 b = Key256::from_u64(987654321);
    CHECK(a.add(b).sub(b) == a);

    Key256 q;
    uint64_t r = 0;
    Key256::div_pow2(8, 3, q, r);
    CHECK(q.low_u64() == 85);
    CHECK(r == 1);

    CHECK_THROWS_AS(Key256::div_pow2(256, 1, q, r), std::overflow_error);

    Key256::div_pow2(64, 2, q, r);
    CHECK(q.low_u64() == (1ull << 63));
    CHECK(r == 0);
}
