#pragma once

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "rbs/ledger.hpp"
#include "rbs/prf.hpp"

namespace rbs {

enum class CrossPhase : uint8_t { Locking, Validating, Committing, Finalized, Aborted };

enum class RejectReason : uint8_t {
    InsufficientBalance,
    LockConflict,
    BadProof,
    StaleProof,
    Timeout,
    Injected,  // fault-injection hook for tests
};

const char* to_string(RejectReason r);

// The Phase-1 message: transaction plus proof that the sender's leaf, with the
// lock flag set, is included under the source shard's state root.
struct CrossShardMsg {
    Transaction tx;
    MerkleProof proof;
    Bytes leaf;
    Hash256 root{};
    uint64_t source_height = 0;  // chain height the root was finalized at
};

enum class AckStatus : uint8_t { Validated, Rejected };

struct Ack {
    TxId tx = 0;
    ShardId shard = 0;
    AckStatus status = AckStatus::Rejected;
    RejectReason reason = RejectReason::Timeout;
};

struct CrossShardTx {
    Transaction tx;
    CrossPhase phase = CrossPhase::Locking;
    std::optional<CrossShardMsg> lock_msg;
    std::map<ShardId, Ack> acks;
    uint32_t attempt = 1;
    std::optional<RejectReason> reject_reason;
    Tick initiated_at = 0;
};

struct LockOutcome {
    bool acquired = false;
    TxId conflict_holder = 0;
};

// All-or-nothing lock acquisition over the requested accounts. FullShard mode
// additionally takes the shard-wide exclusive lock. Throws std::logic_error
// when an account is outside the shard's range (a routing bug).
LockOutcome acquire_locks(ShardState& state, const std::vector<AccountId>& accounts,
                          TxId holder, Tick now, Tick ttl, LockMode mode);

void release_locks(ShardState& state, TxId holder);

// Phase 1 on the source shard: balance check, sender lock, proof over the
// updated leaves. On success the returned message is ready to send to the
// destination shard.
std::variant<CrossShardMsg, RejectReason> initiate(const Transaction& tx, ShardState& source,
                                                   Tick now, Tick ttl, LockMode mode);

// Phase 2 on the destination shard: verify the proof-of-lock, lock the
// receiver, stage the tentative credit. Rejection leaves no state behind.
Ack validate_and_execute(const CrossShardMsg& msg, ShardState& dest, Tick now, Tick ttl,
                         LockMode mode);

enum class FinalizeOutcome : uint8_t { Finalized, Aborted };

// Phase 3: with unanimous Validated acks, debit the sender (amount + fee, fee
// burned), promote the staged credit, release every lock on both shards.
// Otherwise roll the tentative credit back and release the locks.
FinalizeOutcome finalize(CrossShardTx& ctx, ShardState& source, ShardState& dest);

struct RetryParams {
    Tick base = 4;
    Tick max_delay = 256;
    uint32_t max_attempts = 6;
    double fee_weight = 1.0;
};

// Exponential backoff scaled down by fee priority. jitter multiplies the
// exponential term; pass 1.0 for the deterministic schedule.
Tick retry_schedule(uint32_t attempt, uint64_t fee, const RetryParams& params, double jitter);

inline bool retry_exhausted(uint32_t attempt, const RetryParams& params) {
    return attempt > params.max_attempts;
}

// Removes every lock with expires_at <= now (including an expired shard-wide
// lock) and returns the released records.
std::vector<LockRecord> expire_locks(ShardState& state, Tick now);

}  // namespace rbs
