#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rbs/epoch.hpp"
#include "rbs/scenario.hpp"

namespace rbs {

enum class NodeBehavior : uint8_t {
    Honest = 0,
    Silent,
    Equivocate,
    InvalidProposal,
    Staller,
    RevealWithholder,
    DoSFlooder,
};

const char* to_string(NodeBehavior b);

// End-to-end pairwise delivery: fixed or uniform latency, probabilistic drops,
// and hard partitions between severed pairs.
struct NetworkModel {
    Tick lat_lo = 2;
    Tick lat_hi = 2;
    double drop_rate = 0.0;
    std::set<std::pair<NodeId, NodeId>> severed;

    // nullopt = dropped. Consumes the PRF deterministically.
    std::optional<Tick> delivery(NodeId from, NodeId to, Tick now, PrfStream& prf) const;
};

// Strict (at, seq) priority queue; seq is assigned at scheduling time so equal
// ticks run in scheduling order.
template <typename P>
class EventQueue {
public:
    void schedule(Tick at, P payload) {
        if (at < now_) throw std::logic_error("schedule: event in the past");
        items_.push_back(Item{at, next_seq_++, std::move(payload)});
        std::push_heap(items_.begin(), items_.end(), Later{});
    }

    std::optional<std::pair<Tick, P>> pop() {
        if (items_.empty()) return std::nullopt;
        std::pop_heap(items_.begin(), items_.end(), Later{});
        Item it = std::move(items_.back());
        items_.pop_back();
        now_ = it.at;
        return std::make_pair(it.at, std::move(it.payload));
    }

    Tick now() const { return now_; }
    bool empty() const { return items_.empty(); }
    size_t size() const { return items_.size(); }

private:
    struct Item {
        Tick at;
        uint64_t seq;
        P payload;
    };
    struct Later {
        bool operator()(const Item& a, const Item& b) const {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };
    std::vector<Item> items_;
    Tick now_ = 0;
    uint64_t next_seq_ = 0;
};

struct TxOutcomeRec {
    TxId id = 0;
    AccountId sender = 0;
    AccountId receiver = 0;
    uint64_t amount = 0;
    uint64_t fee = 0;
    TxKind kind = TxKind::IntraShard;
    Tick submitted_at = 0;
    Tick finalized_at = -1;
    // "" while in flight; otherwise finalized | rejected | dropped.
    std::string outcome;
    std::string reason;
};

struct EpochStats {
    uint64_t epoch = 0;
    uint32_t n_shards = 0;
    uint64_t processed_cost = 0;
    double sigma = 1.0;
};

struct SimResult {
    ScenarioConfig config;
    std::map<ShardId, ShardState> shards;
    uint64_t genesis_total = 0;
    uint64_t burned_fees = 0;
    std::vector<TxOutcomeRec> txs;
    std::vector<EpochStats> epochs;
    uint64_t blocks = 0;
    uint64_t messages = 0;
    uint64_t rounds_total = 0;  // finalization rounds summed over blocks
    uint64_t round_changes = 0;
    uint64_t lock_wait_total = 0;  // ticks from submission to source lock, cross only
    uint64_t lock_wait_samples = 0;
    // Locks or staged credits still held after the final in-flight abort; any
    // nonzero value is a protocol leak.
    uint64_t live_locks_at_end = 0;
    std::vector<std::string> trace;
    Hash256 trace_digest{};
};

SimResult run_simulation(const ScenarioConfig& cfg);

// Reputation-gated committee rotation against Sybil identities: withheld
// beacon reveals cost trust each epoch, and only validators above the trust
// threshold stay eligible for selection.
struct SybilParams {
    uint32_t validators = 100;
    uint32_t shards = 10;
    uint32_t committee_size = 7;
    uint32_t v_min = 4;
    double sybil_fraction = 0.3;
    uint64_t epochs = 1000;
    uint64_t seed = 1;
    double trust_threshold = 0.5;
    double penalty = 0.1;
};

struct SybilResult {
    uint64_t epochs = 0;
    uint64_t breached_epochs = 0;  // any committee above its f-threshold
    double breach_fraction = 0.0;
    std::vector<std::string> rows;
    Hash256 digest{};
};

SybilResult run_sybil_experiment(const SybilParams& p);

}  // namespace rbs
