#include "rbs/cross_shard.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbs {

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::InsufficientBalance: return "insufficient_balance";
        case RejectReason::LockConflict: return "lock_conflict";
        case RejectReason::BadProof: return "bad_proof";
        case RejectReason::StaleProof: return "stale_proof";
        case RejectReason::Timeout: return "timeout";
        case RejectReason::Injected: return "injected";
    }
    return "unknown";
}

LockOutcome acquire_locks(ShardState& state, const std::vector<AccountId>& accounts,
                          TxId holder, Tick now, Tick ttl, LockMode mode) {
    for (AccountId a : accounts) {
        if (!state.owns(a)) throw std::logic_error("acquire_locks: account outside shard range");
    }
    if (mode == LockMode::FullShard && state.shard_lock && state.shard_lock->holder != holder)
        return {false, state.shard_lock->holder};
    for (AccountId a : accounts) {
        auto it = state.lock_table.find(a);
        if (it != state.lock_table.end() && it->second.holder != holder)
            return {false, it->second.holder};
    }
    for (AccountId a : accounts)
        state.lock_table[a] = LockRecord{a, holder, now, now + ttl, mode};
    if (mode == LockMode::FullShard)
        state.shard_lock = LockRecord{0, holder, now, now + ttl, mode};
    return {true, 0};
}

void release_locks(ShardState& state, TxId holder) {
    for (auto it = state.lock_table.begin(); it != state.lock_table.end();) {
        if (it->second.holder == holder)
            it = state.lock_table.erase(it);
        else
            ++it;
    }
    if (state.shard_lock && state.shard_lock->holder == holder) state.shard_lock.reset();
}

std::variant<CrossShardMsg, RejectReason> initiate(const Transaction& tx, ShardState& source,
                                                   Tick now, Tick ttl, LockMode mode) {
    if (tx.kind != TxKind::CrossShard) throw std::logic_error("initiate: not a cross-shard tx");
    auto bal = source.balances.find(tx.sender);
    if (bal == source.balances.end() || bal->second < tx.amount + tx.fee)
        return RejectReason::InsufficientBalance;
    LockOutcome lock = acquire_locks(source, {tx.sender}, tx.id, now, ttl, mode);
    if (!lock.acquired) return RejectReason::LockConflict;
    auto ap = source.prove_account(tx.sender);
    CrossShardMsg msg;
    msg.tx = tx;
    msg.proof = std::move(ap.proof);
    msg.leaf = std::move(ap.leaf);
    msg.root = ap.root;
    msg.source_height = source.next_height();
    return msg;
}

Ack validate_and_execute(const CrossShardMsg& msg, ShardState& dest, Tick now, Tick ttl,
                         LockMode mode) {
    Ack ack;
    ack.tx = msg.tx.id;
    ack.shard = dest.shard;
    // The leaf must be the sender's entry with the lock flag set and a
    // sufficient balance, proven under the carried root.
    bool leaf_ok = msg.leaf.size() == 17;
    uint64_t leaf_account = 0, leaf_balance = 0;
    if (leaf_ok) {
        for (int i = 0; i < 8; ++i) leaf_account = (leaf_account << 8) | msg.leaf[static_cast<size_t>(i)];
        for (int i = 8; i < 16; ++i) leaf_balance = (leaf_balance << 8) | msg.leaf[static_cast<size_t>(i)];
        leaf_ok = leaf_account == msg.tx.sender && msg.leaf[16] == 1 &&
                  leaf_balance >= msg.tx.amount + msg.tx.fee;
    }
    if (!leaf_ok || !merkle_verify(msg.proof, msg.leaf, msg.root)) {
        ack.status = AckStatus::Rejected;
        ack.reason = RejectReason::BadProof;
        return ack;
    }
    if (!dest.balances.contains(msg.tx.receiver)) dest.balances[msg.tx.receiver] = 0;
    LockOutcome lock = acquire_locks(dest, {msg.tx.receiver}, msg.tx.id, now, ttl, mode);
    if (!lock.acquired) {
        ack.status = AckStatus::Rejected;
        ack.reason = RejectReason::LockConflict;
        return ack;
    }
    dest.staged_credits[msg.tx.id] = {msg.tx.receiver, msg.tx.amount};
    ack.status = AckStatus::Validated;
    return ack;
}

FinalizeOutcome finalize(CrossShardTx& ctx, ShardState& source, ShardState& dest) {
    bool all_validated = !ctx.acks.empty();
    for (const auto& [shard, ack] : ctx.acks)
        all_validated = all_validated && ack.status == AckStatus::Validated;

    if (all_validated) {
        const Transaction& tx = ctx.tx;
        auto bal = source.balances.find(tx.sender);
        if (bal == source.balances.end() || bal->second < tx.amount + tx.fee)
            throw std::logic_error("finalize: sender balance changed under lock");
        bal->second -= tx.amount + tx.fee;  // fee burned
        auto staged = dest.staged_credits.find(tx.id);
        if (staged == dest.staged_credits.end())
            throw std::logic_error("finalize: staged credit missing");
        dest.balances[staged->second.first] += staged->second.second;
        dest.staged_credits.erase(staged);
        release_locks(source, tx.id);
        release_locks(dest, tx.id);
        ctx.phase = CrossPhase::Finalized;
        return FinalizeOutcome::Finalized;
    }

    dest.staged_credits.erase(ctx.tx.id);
    release_locks(source, ctx.tx.id);
    release_locks(dest, ctx.tx.id);
    ctx.phase = CrossPhase::Aborted;
    if (!ctx.reject_reason) {
        for (const auto& [shard, ack] : ctx.acks)
            if (ack.status == AckStatus::Rejected) ctx.reject_reason = ack.reason;
    }
    return FinalizeOutcome::Aborted;
}

Tick retry_schedule(uint32_t attempt, uint64_t fee, const RetryParams& params, double jitter) {
    if (attempt == 0) throw std::invalid_argument("retry_schedule: attempt starts at 1");
    double norm_fee = static_cast<double>(fee) / (static_cast<double>(fee) + 16.0);
    double raw = static_cast<double>(params.base) *
                 std::pow(2.0, static_cast<double>(attempt - 1)) * jitter /
                 (1.0 + params.fee_weight * norm_fee);
    Tick delay = static_cast<Tick>(std::llround(raw));
    return std::clamp<Tick>(delay, 1, params.max_delay);
}

std::vector<LockRecord> expire_locks(ShardState& state, Tick now) {
    std::vector<LockRecord> released;
    for (auto it = state.lock_table.begin(); it != state.lock_table.end();) {
        if (it->second.expires_at <= now) {
            released.push_back(it->second);
            it = state.lock_table.erase(it);
        } else {
            ++it;
        }
    }
    if (state.shard_lock && state.shard_lock->expires_at <= now) {
        released.push_back(*state.shard_lock);
        state.shard_lock.reset();
    }
    return released;
}

}  // namespace rbs
