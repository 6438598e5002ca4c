#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "rbs/ledger.hpp"
#include "rbs/prf.hpp"

namespace rbs {

// f = floor((n-1)/3) and the quorum T_q = n - f.
uint32_t max_faulty(uint32_t n);
uint32_t quorum_threshold(uint32_t n);

// R_v = w1*P_v + w2*T_v. All inputs in [0,1]; throws std::invalid_argument
// when w1 + w2 != 1.
double reputation(double performance, double trust, double w1, double w2);

struct ValidatorSet {
    ShardId shard = 0;
    std::vector<NodeId> members;
    uint64_t epoch = 0;

    uint32_t size() const { return static_cast<uint32_t>(members.size()); }
    NodeId leader(uint64_t height, uint32_t round) const {
        return members[(height + round) % members.size()];
    }
    bool contains(NodeId v) const;
};

// k distinct draws without replacement, each proportional to its score among
// the remaining pool. All-zero scores fall back to uniform.
std::vector<NodeId> weighted_select(const std::vector<NodeId>& candidates,
                                    const std::map<NodeId, double>& scores, size_t k,
                                    PrfStream& prf);

struct Vote {
    NodeId voter = 0;
    Hash256 block_hash{};
    uint64_t height = 0;
    uint32_t round = 0;
};

// Quorum check over one block's vote set; distinct signers only. Throws
// std::domain_error if the set mixes block hashes.
bool validate_block(const std::vector<Vote>& votes, uint32_t t_q);

enum class MsgKind : uint8_t { PrePrepare = 0, Prepare = 1, Commit = 2, RoundChange = 3 };

struct ConsensusMsg {
    MsgKind kind = MsgKind::Prepare;
    ShardId shard = 0;
    uint64_t height = 0;
    uint32_t round = 0;
    NodeId sender = 0;
    Hash256 block_hash{};
    std::shared_ptr<const Block> block;  // PrePrepare payload
    // Lock carried on RoundChange: the highest round this sender saw Prepared.
    int64_t prepared_round = -1;
    std::shared_ptr<const Block> prepared_block;
};

enum class ConsensusPhase : uint8_t { Idle = 0, PrePrepared = 1, Prepared = 2, Committed = 3 };

struct StepResult {
    std::vector<ConsensusMsg> outbound;
    std::optional<Block> finalized;
    bool proposer_fault = false;  // leader's proposal failed validity checks
};

using BlockValidator = std::function<bool(const Block&)>;

// One validator's view of one shard's IBFT instance. Single-owner; the event
// loop feeds it messages and timeouts.
//
// Round-change safety: a validator that reached Prepared locks on that block
// and will neither prepare a different block in a later round nor let a new
// leader it informs propose one (RoundChange carries the lock; make_proposal
// must re-propose the highest lock it knows).
class IbftInstance {
public:
    IbftInstance(ShardId shard, ValidatorSet validators, NodeId self, Tick timeout_base,
                 uint32_t r_max = 8);

    void begin_height(uint64_t height, Tick now);

    StepResult on_message(const ConsensusMsg& msg, Tick now,
                          const BlockValidator& valid = {});

    // Fires iff now >= deadline and the height is not yet committed; advances
    // the round with exponential backoff and emits the RoundChange broadcast.
    std::optional<ConsensusMsg> on_timeout(Tick now);

    // True when this validator leads the current round and has not proposed.
    bool should_propose() const;
    // Builds the PrePrepare, substituting the best known lock for `candidate`.
    ConsensusMsg make_proposal(std::shared_ptr<const Block> candidate);

    ShardId shard() const { return shard_; }
    NodeId self() const { return self_; }
    uint64_t height() const { return height_; }
    uint32_t round() const { return round_; }
    ConsensusPhase phase() const { return phase_; }
    Tick deadline() const { return deadline_; }
    uint32_t t_q() const { return t_q_; }
    uint32_t failed_rounds() const { return failed_rounds_; }
    uint32_t r_max() const { return r_max_; }
    const ValidatorSet& validators() const { return validators_; }
    NodeId current_leader() const { return validators_.leader(height_, round_); }
    const std::optional<Block>& finalized_block() const { return finalized_; }

private:
    struct SlotKey {
        uint32_t round;
        Hash256 hash;
        auto operator<=>(const SlotKey&) const = default;
    };

    StepResult apply(const ConsensusMsg& msg, Tick now, const BlockValidator& valid);
    void enter_round(uint32_t round, Tick now);
    void drain_buffer(StepResult& out, Tick now, const BlockValidator& valid);
    void check_quorums(StepResult& out);

    ShardId shard_;
    ValidatorSet validators_;
    NodeId self_;
    uint32_t t_q_;
    uint32_t f_;
    Tick timeout_base_;
    uint32_t r_max_;

    uint64_t height_ = 0;
    uint32_t round_ = 0;
    ConsensusPhase phase_ = ConsensusPhase::Idle;
    Tick deadline_ = 0;
    bool proposed_ = false;
    uint32_t failed_rounds_ = 0;

    std::shared_ptr<const Block> proposal_;
    Hash256 proposal_hash_{};
    std::map<SlotKey, std::set<NodeId>> prepares_;
    std::map<SlotKey, std::set<NodeId>> commits_;
    std::map<NodeId, uint32_t> round_changes_;
    int64_t lock_round_ = -1;
    std::shared_ptr<const Block> lock_block_;
    int64_t best_rc_lock_round_ = -1;
    std::shared_ptr<const Block> best_rc_lock_block_;
    std::optional<Block> finalized_;
    std::vector<ConsensusMsg> buffer_;
};

}  // namespace rbs
