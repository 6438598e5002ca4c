#include <doctest.h>

#include <stdexcept>

#include <string>
#include <vector>

#include "rbs/merkle.hpp"

using namespace rbs;

namespace {

std::vector<Bytes> make_leaves(int n) {
    std::vector<Bytes> leaves;
    for (int i = 0; i < n; ++i) leaves.push_back(from_string("leaf-" + std::to_string(i)));
    return leaves;
}

// Straight-line oracle: recompute the root bottom-up without sharing any code
// with merkle_root beyond the hash primitives it is specified against.
Hash256 oracle_root(const std::vector<Bytes>& leaves) {
    std::vector<Hash256> layer;
    for (const auto& l : leaves) layer.push_back(hash_domain(HashDomain::MerkleLeaf, l));
    while (layer.size() > 1) {
        std::vector<Hash256> up;
        for (size_t i = 0; i < layer.size(); i += 2) {
            Hash256 l = layer[i];
            Hash256 r = (i + 1 < layer.size()) ? layer[i + 1] : layer[i];
            Bytes buf;
            buf.insert(buf.end(), l.begin(), l.end());
            buf.insert(buf.end(), r.begin(), r.end());
            up.push_back(hash_domain(HashDomain::MerkleNode, buf));
        }
        layer = up;
    }
    return layer[0];
}

}  // namespace

TEST_CASE("single leaf root is the leaf hash") {
    std::vector<Bytes> leaves{from_string("only")};
    CHECK(merkle_root(leaves) == merkle_leaf_hash(leaves[0]));
    MerkleProof p = merkle_prove(leaves, 0);
    CHECK(p.siblings.empty());
    CHECK(merkle_verify(p, leaves[0], merkle_root(leaves)));
}

TEST_CASE("two leaf root is the interior hash of the leaf hashes") {
    std::vector<Bytes> leaves{from_string("a"), from_string("b")};
    Hash256 expect = hash_domain2(HashDomain::MerkleNode, merkle_leaf_hash(leaves[0]),
                                  merkle_leaf_hash(leaves[1]));
    CHECK(merkle_root(leaves) == expect);
}

TEST_CASE("empty leaf list is a domain error") {
    CHECK_THROWS_AS(merkle_root({}), std::invalid_argument);
    CHECK_THROWS_AS(merkle_prove(make_leaves(3), 3), std::out_of_range);
}

TEST_CASE("roots match the straight-line oracle for 1..17 leaves") {
    for (int n = 1; n <= 17; ++n) {
        auto leaves = make_leaves(n);
        CHECK(merkle_root(leaves) == oracle_root(leaves));
    }
}

TEST_CASE("every proof of an 8-leaf tree verifies; wrong leaf fails") {
    auto leaves = make_leaves(8);
    Hash256 root = merkle_root(leaves);
    for (size_t i = 0; i < leaves.size(); ++i) {
        MerkleProof p = merkle_prove(leaves, i);
        CHECK(p.siblings.size() == 3);
        CHECK(merkle_verify(p, leaves[i], root));
        CHECK_FALSE(merkle_verify(p, leaves[(i + 1) % leaves.size()], root));
    }
}

TEST_CASE("proof round-trip holds for ragged tree sizes") {
    for (int n : {2, 3, 5, 6, 7, 9, 12, 13}) {
        auto leaves = make_leaves(n);
        Hash256 root = merkle_root(leaves);
        for (size_t i = 0; i < leaves.size(); ++i)
            CHECK(merkle_verify(merkle_prove(leaves, i), leaves[i], root));
    }
}

TEST_CASE("all single-bit corruptions of a 4-leaf proof are rejected") {
    auto leaves = make_leaves(4);
    Hash256 root = merkle_root(leaves);
    MerkleProof proof = merkle_prove(leaves, 1);
    for (size_t s = 0; s < proof.siblings.size(); ++s) {
        for (size_t byte = 0; byte < 32; ++byte) {
            for (int bit = 0; bit < 8; ++bit) {
                MerkleProof bad = proof;
                bad.siblings[s].first[byte] ^= static_cast<uint8_t>(1 << bit);
                CHECK_FALSE(merkle_verify(bad, leaves[1], root));
            }
        }
    }
    // Flipping a side flag must also fail.
    MerkleProof flipped = proof;
    flipped.siblings[0].second =
        flipped.siblings[0].second == Side::Left ? Side::Right : Side::Left;
    CHECK_FALSE(merkle_verify(flipped, leaves[1], root));
}
