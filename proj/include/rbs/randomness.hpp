#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "rbs/prf.hpp"
#include "rbs/types.hpp"

namespace rbs {

using Nonce = std::array<uint8_t, 16>;

enum class AggregationMode : uint8_t { Xor = 0, Average = 1 };

// C = H(value || nonce), domain separated.
Hash256 commitment(uint64_t value, const Nonce& nonce);

bool verify_reveal(const Hash256& commit, uint64_t value, const Nonce& nonce);

// XOR fold or floor-average. Throws std::domain_error on an empty list.
uint64_t aggregate(const std::vector<uint64_t>& values, AggregationMode mode);

// Collectively generated randomness plus the participants whose reveals
// contributed to it.
struct Randomness {
    uint64_t value = 0;
    std::set<NodeId> contributors;
};

// Commit-reveal round state machine. Phases advance monotonically; a reveal is
// only accepted from a participant that committed in this round and matches
// its commitment.
class CommitRevealRound {
public:
    enum class Phase { Committing, Revealing, Complete };

    CommitRevealRound(uint64_t round_id, AggregationMode mode)
        : round_id_(round_id), mode_(mode) {}

    uint64_t round_id() const { return round_id_; }
    Phase phase() const { return phase_; }

    // Returns false if the phase is wrong or the participant already committed.
    bool submit_commit(NodeId who, const Hash256& c);
    void begin_reveal();
    // Returns false on phase mismatch, missing commitment, or mismatching
    // reveal; such reveals count as withheld.
    bool submit_reveal(NodeId who, uint64_t value, const Nonce& nonce);
    // Closes the round. Returns nullopt when no valid reveal arrived.
    std::optional<Randomness> complete();

    // Participants that committed but never produced a valid reveal.
    std::vector<NodeId> withholders() const;
    const std::map<NodeId, Hash256>& commitments() const { return commitments_; }

private:
    uint64_t round_id_;
    AggregationMode mode_;
    Phase phase_ = Phase::Committing;
    std::map<NodeId, Hash256> commitments_;
    std::map<NodeId, uint64_t> reveals_;
};

struct RoundParticipant {
    NodeId id = 0;
    bool withholds_reveal = false;  // commits, then never reveals
};

struct RoundResult {
    std::optional<Randomness> randomness;
    std::vector<NodeId> withholders;
};

// One end-to-end beacon round: everyone commits a PRF-drawn value, honest
// participants reveal, withholders are excluded from aggregation.
RoundResult run_round(const std::vector<RoundParticipant>& participants,
                      AggregationMode mode, PrfStream& rng, uint64_t round_id = 0);

// Deterministic committee selection: Fisher-Yates over the candidate pool with
// a PRF keyed by (seed, shard), taking the first max(v_min, committee_size).
// Throws std::invalid_argument when the pool is smaller than v_min.
std::vector<NodeId> random_beacon(const std::vector<NodeId>& candidates, ShardId shard,
                                  uint64_t seed, uint32_t v_min, uint32_t committee_size);

}  // namespace rbs
