#include "rbs/ledger.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace rbs {

Bytes Block::encode() const {
    Bytes out;
    put_u32(out, shard);
    put_u64(out, height);
    out.insert(out.end(), parent_hash.begin(), parent_hash.end());
    put_u32(out, static_cast<uint32_t>(txs.size()));
    for (const auto& tx : txs) put_bytes(out, tx.encode());
    out.insert(out.end(), state_root.begin(), state_root.end());
    put_u32(out, proposer);
    put_u64(out, size_bytes);
    return out;
}

Hash256 Block::hash() const { return hash_domain(HashDomain::Object, encode()); }

Bytes encode_account_leaf(AccountId account, uint64_t balance, bool locked) {
    Bytes out;
    put_u64(out, account);
    put_u64(out, balance);
    put_u8(out, locked ? 1 : 0);
    return out;
}

static const Key256& account_key_cached(AccountId a) {
    thread_local std::unordered_map<AccountId, Key256> cache;
    auto it = cache.find(a);
    if (it == cache.end()) it = cache.emplace(a, key_of_account(a)).first;
    return it->second;
}

static std::vector<AccountId> accounts_by_key(const std::map<AccountId, uint64_t>& balances) {
    std::vector<AccountId> ids;
    ids.reserve(balances.size());
    for (const auto& [a, b] : balances) ids.push_back(a);
    std::sort(ids.begin(), ids.end(), [](AccountId x, AccountId y) {
        return account_key_cached(x) < account_key_cached(y);
    });
    return ids;
}

std::vector<Bytes> ShardState::merkle_leaves() const {
    std::vector<Bytes> leaves;
    leaves.reserve(balances.size());
    for (AccountId a : accounts_by_key(balances))
        leaves.push_back(encode_account_leaf(a, balances.at(a), is_locked(a)));
    return leaves;
}

Hash256 ShardState::state_root() const {
    auto leaves = merkle_leaves();
    if (leaves.empty()) return Hash256{};
    return merkle_root(leaves);
}

ShardState::AccountProof ShardState::prove_account(AccountId account) const {
    if (!balances.contains(account)) throw std::out_of_range("prove_account: unknown account");
    auto ids = accounts_by_key(balances);
    auto it = std::find(ids.begin(), ids.end(), account);
    size_t index = static_cast<size_t>(it - ids.begin());
    std::vector<Bytes> leaves;
    leaves.reserve(ids.size());
    for (AccountId a : ids) leaves.push_back(encode_account_leaf(a, balances.at(a), is_locked(a)));
    AccountProof out;
    out.proof = merkle_prove(leaves, index);
    out.leaf = leaves[index];
    out.root = merkle_root(leaves);
    return out;
}

uint64_t ShardState::total_balance() const {
    uint64_t sum = 0;
    for (const auto& [a, b] : balances) sum += b;
    for (const auto& [tx, credit] : staged_credits) sum += credit.second;
    return sum;
}

Block form_block(std::vector<Transaction> pending, uint64_t limit_bytes,
                 const Hash256& parent_hash, uint64_t height, ShardId shard, NodeId proposer,
                 uint64_t tx_size, uint64_t header_size) {
    std::sort(pending.begin(), pending.end(), [](const Transaction& a, const Transaction& b) {
        if (a.fee != b.fee) return a.fee > b.fee;
        return a.id < b.id;
    });
    Block block;
    block.shard = shard;
    block.height = height;
    block.parent_hash = parent_hash;
    block.proposer = proposer;
    uint64_t size = header_size;
    std::vector<TxId> seen;
    for (auto& tx : pending) {
        if (size + tx_size > limit_bytes) break;
        if (std::find(seen.begin(), seen.end(), tx.id) != seen.end()) continue;
        seen.push_back(tx.id);
        size += tx_size;
        block.txs.push_back(std::move(tx));
    }
    block.size_bytes = size;
    return block;
}

bool chain_links_ok(const std::vector<Block>& chain) {
    for (size_t i = 0; i < chain.size(); ++i) {
        if (chain[i].height != i) return false;
        if (i > 0 && chain[i].parent_hash != chain[i - 1].hash()) return false;
    }
    return true;
}

}  // namespace rbs
