#pragma once

#include <cstdint>

#include "rbs/bytes.hpp"
#include "rbs/key256.hpp"

namespace rbs {

using AccountId = uint64_t;
using NodeId = uint32_t;
using ShardId = uint32_t;
using TxId = uint64_t;
using Tick = int64_t;

// Fixed wire sizes used for block capacity accounting.
inline constexpr uint64_t kTxWireSize = 256;
inline constexpr uint64_t kBlockHeaderSize = 128;

enum class TxKind : uint8_t { IntraShard = 0, CrossShard = 1 };

struct Transaction {
    TxId id = 0;
    AccountId sender = 0;
    AccountId receiver = 0;
    uint64_t amount = 0;
    uint64_t fee = 0;
    TxKind kind = TxKind::IntraShard;
    ShardId source_shard = 0;
    ShardId dest_shard = 0;
    Tick submitted_at = 0;

    Bytes encode() const {
        Bytes out;
        put_u64(out, id);
        put_u64(out, sender);
        put_u64(out, receiver);
        put_u64(out, amount);
        put_u64(out, fee);
        put_u8(out, static_cast<uint8_t>(kind));
        put_u32(out, source_shard);
        put_u32(out, dest_shard);
        put_u64(out, static_cast<uint64_t>(submitted_at));
        return out;
    }

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

// Key derivations route every identifier through the same hash domain with a
// one-byte kind tag so account, node and tx keys never collide.
inline Key256 key_of_account(AccountId a) {
    Bytes b;
    put_u8(b, 'a');
    put_u64(b, a);
    return hash_key(b);
}

inline Key256 key_of_node(NodeId n) {
    Bytes b;
    put_u8(b, 'n');
    put_u64(b, n);
    return hash_key(b);
}

inline Key256 key_of_tx(TxId t) {
    Bytes b;
    put_u8(b, 't');
    put_u64(b, t);
    return hash_key(b);
}

}  // namespace rbs
