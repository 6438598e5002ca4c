#pragma once

#include <functional>
#include <map>
#include <vector>

#include "rbs/cross_shard.hpp"
#include "rbs/ledger.hpp"
#include "rbs/randomness.hpp"

namespace rbs {

struct EpochConfig {
    Tick epoch_length = 2000;
    // Self-scaling thresholds: W_hi/W_lo are these factors times the previous
    // epoch's mean per-shard workload.
    double w_hi_factor = 2.0;
    double w_lo_factor = 0.25;
    uint32_t v_min = 4;
    uint32_t committee_size = 4;
};

// Default transaction cost: one unit per intra-shard tx, two per cross-shard
// leg (a cross-shard tx runs consensus on both shards).
double tx_cost(const Transaction& tx);

double shard_workload(const std::vector<Transaction>& processed,
                      const std::function<double(const Transaction&)>& cost = tx_cost);

struct ReconfigPlan {
    struct Split {
        ShardId shard = 0;
        Key256 key;
        ShardId new_shard = 0;
    };
    struct Merge {
        ShardId left = 0;
        ShardId right = 0;
    };
    std::vector<Split> splits;
    std::vector<Merge> merges;
    bool empty() const { return splits.empty() && merges.empty(); }
};

// Overloaded shards split at their load-median key; adjacent cold pairs merge
// greedily left to right, each shard appearing in at most one action.
// Overloaded shards with fewer than two occupied keys are skipped.
ReconfigPlan plan_reconfiguration(const std::map<ShardId, double>& workloads,
                                  const RangeTable& table, double w_hi, double w_lo,
                                  const std::map<ShardId, std::vector<Key256>>& histograms,
                                  ShardId next_shard_id);

struct EpochTransition {
    RangeTable table;
    std::map<ShardId, ShardState> shards;
    std::map<ShardId, std::vector<NodeId>> committees;
};

// Applies the plan (migrating balances to their new owning shards) and rotates
// every committee from the beacon seed. Requires quiescence: no live locks or
// staged credits. Throws std::invalid_argument when the validator pool cannot
// cover committee_size validators per shard.
EpochTransition transition_epoch(const RangeTable& table,
                                 const std::map<ShardId, ShardState>& shards,
                                 const ReconfigPlan& plan,
                                 const std::vector<NodeId>& validator_pool, uint64_t seed,
                                 uint32_t v_min, uint32_t committee_size, uint64_t new_epoch);

}  // namespace rbs
