#include "rbs/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbs {

uint32_t max_faulty(uint32_t n) {
    if (n == 0) throw std::domain_error("max_faulty: n must be >= 1");
    return (n - 1) / 3;
}

uint32_t quorum_threshold(uint32_t n) { return n - max_faulty(n); }

double reputation(double performance, double trust, double w1, double w2) {
    if (performance < 0 || performance > 1 || trust < 0 || trust > 1)
        throw std::invalid_argument("reputation: scores must lie in [0,1]");
    if (w1 < 0 || w2 < 0 || std::abs(w1 + w2 - 1.0) > 1e-9)
        throw std::invalid_argument("reputation: weights must be non-negative and sum to 1");
    return w1 * performance + w2 * trust;
}

bool ValidatorSet::contains(NodeId v) const {
    return std::find(members.begin(), members.end(), v) != members.end();
}

std::vector<NodeId> weighted_select(const std::vector<NodeId>& candidates,
                                    const std::map<NodeId, double>& scores, size_t k,
                                    PrfStream& prf) {
    if (k > candidates.size())
        throw std::invalid_argument("weighted_select: k exceeds candidate count");
    std::vector<NodeId> pool = candidates;
    std::vector<NodeId> picked;
    picked.reserve(k);
    while (picked.size() < k) {
        double sum = 0;
        for (NodeId c : pool) {
            auto it = scores.find(c);
            sum += (it != scores.end()) ? std::max(0.0, it->second) : 0.0;
        }
        size_t idx;
        if (sum <= 0.0) {
            idx = static_cast<size_t>(prf.uniform(pool.size()));
        } else {
            double target = prf.next_double() * sum;
            double acc = 0;
            idx = pool.size() - 1;
            for (size_t i = 0; i < pool.size(); ++i) {
                auto it = scores.find(pool[i]);
                acc += (it != scores.end()) ? std::max(0.0, it->second) : 0.0;
                if (target < acc) {
                    idx = i;
                    break;
                }
            }
        }
        picked.push_back(pool[idx]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    return picked;
}

bool validate_block(const std::vector<Vote>& votes, uint32_t t_q) {
    std::set<NodeId> signers;
    for (const auto& v : votes) {
        if (v.block_hash != votes.front().block_hash)
            throw std::domain_error("validate_block: mixed block hashes in vote set");
        signers.insert(v.voter);
    }
    return signers.size() >= t_q;
}

IbftInstance::IbftInstance(ShardId shard, ValidatorSet validators, NodeId self,
                           Tick timeout_base, uint32_t r_max)
    : shard_(shard),
      validators_(std::move(validators)),
      self_(self),
      t_q_(quorum_threshold(static_cast<uint32_t>(validators_.members.size()))),
      f_(max_faulty(static_cast<uint32_t>(validators_.members.size()))),
      timeout_base_(timeout_base),
      r_max_(r_max) {}

void IbftInstance::begin_height(uint64_t height, Tick now) {
    height_ = height;
    round_ = 0;
    phase_ = ConsensusPhase::Idle;
    deadline_ = now + timeout_base_;
    proposed_ = false;
    failed_rounds_ = 0;
    proposal_.reset();
    proposal_hash_ = Hash256{};
    prepares_.clear();
    commits_.clear();
    round_changes_.clear();
    lock_round_ = -1;
    lock_block_.reset();
    best_rc_lock_round_ = -1;
    best_rc_lock_block_.reset();
    finalized_.reset();
}

void IbftInstance::enter_round(uint32_t round, Tick now) {
    round_ = round;
    if (phase_ != ConsensusPhase::Committed) phase_ = ConsensusPhase::Idle;
    proposal_.reset();
    proposal_hash_ = Hash256{};
    proposed_ = false;
    failed_rounds_ = round;
    Tick backoff = timeout_base_ << std::min<uint32_t>(round, 20);
    deadline_ = now + backoff;
}

bool IbftInstance::should_propose() const {
    return phase_ == ConsensusPhase::Idle && !proposed_ && !finalized_ &&
           current_leader() == self_;
}

ConsensusMsg IbftInstance::make_proposal(std::shared_ptr<const Block> candidate) {
    std::shared_ptr<const Block> block = std::move(candidate);
    // Lock-on-prepare: the best lock we hold or learned wins over a fresh block.
    if (best_rc_lock_round_ > lock_round_ && best_rc_lock_block_)
        block = best_rc_lock_block_;
    else if (lock_block_)
        block = lock_block_;
    proposed_ = true;
    ConsensusMsg msg;
    msg.kind = MsgKind::PrePrepare;
    msg.shard = shard_;
    msg.height = height_;
    msg.round = round_;
    msg.sender = self_;
    msg.block = block;
    msg.block_hash = block->hash();
    return msg;
}

std::optional<ConsensusMsg> IbftInstance::on_timeout(Tick now) {
    if (now < deadline_ || phase_ == ConsensusPhase::Committed) return std::nullopt;
    enter_round(round_ + 1, now);
    ConsensusMsg msg;
    msg.kind = MsgKind::RoundChange;
    msg.shard = shard_;
    msg.height = height_;
    msg.round = round_;
    msg.sender = self_;
    msg.prepared_round = lock_round_;
    msg.prepared_block = lock_block_;
    return msg;
}

void IbftInstance::check_quorums(StepResult& out) {
    if (!proposal_) return;
    SlotKey key{round_, proposal_hash_};
    if (phase_ == ConsensusPhase::PrePrepared && prepares_[key].size() >= t_q_) {
        phase_ = ConsensusPhase::Prepared;
        lock_round_ = round_;
        lock_block_ = proposal_;
        ConsensusMsg commit;
        commit.kind = MsgKind::Commit;
        commit.shard = shard_;
        commit.height = height_;
        commit.round = round_;
        commit.sender = self_;
        commit.block_hash = proposal_hash_;
        commits_[key].insert(self_);
        out.outbound.push_back(commit);
    }
    if (phase_ == ConsensusPhase::Prepared && commits_[key].size() >= t_q_) {
        phase_ = ConsensusPhase::Committed;
        finalized_ = *proposal_;
        out.finalized = *proposal_;
    }
}

StepResult IbftInstance::on_message(const ConsensusMsg& msg, Tick now,
                                    const BlockValidator& valid) {
    StepResult out = apply(msg, now, valid);
    drain_buffer(out, now, valid);
    return out;
}

void IbftInstance::drain_buffer(StepResult& out, Tick now, const BlockValidator& valid) {
    bool progressed = true;
    while (progressed) {
        progressed = false;
        std::vector<ConsensusMsg> pending;
        pending.swap(buffer_);
        for (const auto& m : pending) {
            if (m.height < height_) continue;  // stale, drop
            bool applicable =
                m.height == height_ && (m.round <= round_ || m.kind == MsgKind::RoundChange);
            if (!applicable) {
                buffer_.push_back(m);
                continue;
            }
            StepResult r = apply(m, now, valid);
            progressed = true;
            for (auto& o : r.outbound) out.outbound.push_back(std::move(o));
            if (r.finalized && !out.finalized) out.finalized = r.finalized;
            out.proposer_fault = out.proposer_fault || r.proposer_fault;
        }
    }
}

StepResult IbftInstance::apply(const ConsensusMsg& msg, Tick now, const BlockValidator& valid) {
    StepResult out;
    if (msg.shard != shard_ || !validators_.contains(msg.sender)) return out;
    if (msg.height != height_) {
        // Keep a bounded window of early messages for the next height.
        if (msg.height == height_ + 1 && buffer_.size() < 1024) buffer_.push_back(msg);
        return out;
    }
    if (msg.kind != MsgKind::RoundChange && msg.round > round_) {
        if (buffer_.size() < 1024) buffer_.push_back(msg);
        return out;
    }

    switch (msg.kind) {
        case MsgKind::PrePrepare: {
            if (msg.round != round_ || phase_ != ConsensusPhase::Idle) break;
            if (msg.sender != validators_.leader(height_, msg.round)) break;
            if (!msg.block || msg.block->hash() != msg.block_hash) break;
            if (msg.block->height != height_) break;
            if (valid && !valid(*msg.block)) {
                out.proposer_fault = true;
                break;
            }
            if (lock_block_ && !(msg.block_hash == lock_block_->hash())) break;
            proposal_ = msg.block;
            proposal_hash_ = msg.block_hash;
            phase_ = ConsensusPhase::PrePrepared;
            ConsensusMsg prep;
            prep.kind = MsgKind::Prepare;
            prep.shard = shard_;
            prep.height = height_;
            prep.round = round_;
            prep.sender = self_;
            prep.block_hash = proposal_hash_;
            prepares_[SlotKey{round_, proposal_hash_}].insert(self_);
            out.outbound.push_back(prep);
            check_quorums(out);
            break;
        }
        case MsgKind::Prepare: {
            if (msg.round != round_) break;
            prepares_[SlotKey{msg.round, msg.block_hash}].insert(msg.sender);
            check_quorums(out);
            break;
        }
        case MsgKind::Commit: {
            if (msg.round != round_) break;
            commits_[SlotKey{msg.round, msg.block_hash}].insert(msg.sender);
            check_quorums(out);
            break;
        }
        case MsgKind::RoundChange: {
            auto [it, inserted] = round_changes_.emplace(msg.sender, msg.round);
            if (!inserted) it->second = std::max(it->second, msg.round);
            if (msg.prepared_round > best_rc_lock_round_ && msg.prepared_block) {
                best_rc_lock_round_ = msg.prepared_round;
                best_rc_lock_block_ = msg.prepared_block;
            }
            // Catch up to the highest round that f+1 validators have reached.
            std::vector<uint32_t> rounds;
            for (const auto& [who, r] : round_changes_) rounds.push_back(r);
            std::sort(rounds.begin(), rounds.end(), std::greater<>());
            if (rounds.size() >= f_ + 1) {
                uint32_t target = rounds[f_];
                if (target > round_ && phase_ != ConsensusPhase::Committed)
                    enter_round(target, now);
            }
            break;
        }
    }
    return out;
}

}  // namespace rbs
