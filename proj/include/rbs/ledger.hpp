#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "rbs/merkle.hpp"
#include "rbs/partitioning.hpp"
#include "rbs/types.hpp"

namespace rbs {

struct Block {
    ShardId shard = 0;
    uint64_t height = 0;
    Hash256 parent_hash{};
    std::vector<Transaction> txs;
    Hash256 state_root{};
    NodeId proposer = 0;
    uint64_t size_bytes = kBlockHeaderSize;

    Bytes encode() const;
    Hash256 hash() const;
};

enum class LockMode : uint8_t { FineGrained = 0, FullShard = 1 };

struct LockRecord {
    AccountId account = 0;
    TxId holder = 0;
    Tick acquired_at = 0;
    Tick expires_at = 0;
    LockMode mode = LockMode::FineGrained;
};

Bytes encode_account_leaf(AccountId account, uint64_t balance, bool locked);

// Per-shard ledger state. Merkle leaves are the account entries sorted
// ascending by account key, so the state root commits to balances and lock
// flags alike.
struct ShardState {
    ShardId shard = 0;
    Range range;
    std::map<AccountId, uint64_t> balances;
    std::vector<Block> chain;
    std::map<AccountId, LockRecord> lock_table;
    // Tentative cross-shard credits held out of the live balance until the
    // coordinator's decision.
    std::map<TxId, std::pair<AccountId, uint64_t>> staged_credits;
    // FullShard baseline: the whole shard is exclusively held by one tx.
    std::optional<LockRecord> shard_lock;

    bool owns(AccountId account) const { return range.contains(key_of_account(account)); }
    bool is_locked(AccountId account) const { return lock_table.contains(account); }

    std::vector<Bytes> merkle_leaves() const;
    Hash256 state_root() const;  // all-zero hash for an empty shard

    struct AccountProof {
        MerkleProof proof;
        Bytes leaf;
        Hash256 root;
    };
    AccountProof prove_account(AccountId account) const;

    uint64_t total_balance() const;
    const Block* head() const { return chain.empty() ? nullptr : &chain.back(); }
    uint64_t next_height() const { return chain.size(); }
    Hash256 head_hash() const { return chain.empty() ? Hash256{} : chain.back().hash(); }
};

// Greedy packing in (fee desc, id asc) order until the next transaction would
// exceed the byte limit. Height, parent and proposer are filled in; the state
// root is set by the caller after tentative application.
Block form_block(std::vector<Transaction> pending, uint64_t limit_bytes,
                 const Hash256& parent_hash, uint64_t height, ShardId shard, NodeId proposer,
                 uint64_t tx_size = kTxWireSize, uint64_t header_size = kBlockHeaderSize);

// Chain integrity: heights increase by one and parent hashes link.
bool chain_links_ok(const std::vector<Block>& chain);

}  // namespace rbs
