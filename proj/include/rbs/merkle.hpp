#pragma once

#include <cstdint>
#include <vector>

#include "rbs/hash.hpp"

namespace rbs {

// Binary Merkle tree over byte-string leaves. Leaf and interior hashing are
// domain separated; an odd layer duplicates its last node.

enum class Side : uint8_t { Left = 0, Right = 1 };

struct MerkleProof {
    size_t leaf_index = 0;
    std::vector<std::pair<Hash256, Side>> siblings;  // bottom-up; Side is the sibling's position
};

Hash256 merkle_leaf_hash(const Bytes& leaf);

// Throws std::invalid_argument on an empty leaf list.
Hash256 merkle_root(const std::vector<Bytes>& leaves);

// Throws std::out_of_range when index >= leaves.size().
MerkleProof merkle_prove(const std::vector<Bytes>& leaves, size_t index);

bool merkle_verify(const MerkleProof& proof, const Bytes& leaf, const Hash256& root);

}  // namespace rbs
