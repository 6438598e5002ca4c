#include "rbs/merkle.hpp"

#include <stdexcept>

namespace rbs {

Hash256 merkle_leaf_hash(const Bytes& leaf) {
    return hash_domain(HashDomain::MerkleLeaf, leaf);
}

static std::vector<Hash256> leaf_layer(const std::vector<Bytes>& leaves) {
    std::vector<Hash256> layer;
    layer.reserve(leaves.size());
    for (const auto& l : leaves) layer.push_back(merkle_leaf_hash(l));
    return layer;
}

static std::vector<Hash256> next_layer(const std::vector<Hash256>& layer) {
    std::vector<Hash256> up;
    up.reserve((layer.size() + 1) / 2);
    for (size_t i = 0; i < layer.size(); i += 2) {
        const Hash256& left = layer[i];
        const Hash256& right = (i + 1 < layer.size()) ? layer[i + 1] : layer[i];
        up.push_back(hash_domain2(HashDomain::MerkleNode, left, right));
    }
    return up;
}

Hash256 merkle_root(const std::vector<Bytes>& leaves) {
    if (leaves.empty()) throw std::invalid_argument("merkle_root: no leaves");
    std::vector<Hash256> layer = leaf_layer(leaves);
    while (layer.size() > 1) layer = next_layer(layer);
    return layer[0];
}

MerkleProof merkle_prove(const std::vector<Bytes>& leaves, size_t index) {
    if (index >= leaves.size()) throw std::out_of_range("merkle_prove: index out of bounds");
    MerkleProof proof;
    proof.leaf_index = index;
    std::vector<Hash256> layer = leaf_layer(leaves);
    size_t pos = index;
    while (layer.size() > 1) {
        size_t sib = (pos % 2 == 0) ? pos + 1 : pos - 1;
        if (sib >= layer.size()) sib = pos;  // duplicated odd node
        proof.siblings.emplace_back(layer[sib], pos % 2 == 0 ? Side::Right : Side::Left);
        layer = next_layer(layer);
        pos /= 2;
    }
    return proof;
}

bool merkle_verify(const MerkleProof& proof, const Bytes& leaf, const Hash256& root) {
    Hash256 cur = merkle_leaf_hash(leaf);
    for (const auto& [sib, side] : proof.siblings) {
        switch (side) {
            case Side::Right:
                cur = hash_domain2(HashDomain::MerkleNode, cur, sib);
                break;
            case Side::Left:
                cur = hash_domain2(HashDomain::MerkleNode, sib, cur);
                break;
            default:
                return false;  // malformed side flag
        }
    }
    return cur == root;
}

}  // namespace rbs
