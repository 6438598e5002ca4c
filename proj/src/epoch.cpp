#include "rbs/epoch.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace rbs {

double tx_cost(const Transaction& tx) { return tx.kind == TxKind::IntraShard ? 1.0 : 2.0; }

double shard_workload(const std::vector<Transaction>& processed,
                      const std::function<double(const Transaction&)>& cost) {
    double w = 0;
    for (const auto& tx : processed) w += cost(tx);
    return w;
}

ReconfigPlan plan_reconfiguration(const std::map<ShardId, double>& workloads,
                                  const RangeTable& table, double w_hi, double w_lo,
                                  const std::map<ShardId, std::vector<Key256>>& histograms,
                                  ShardId next_shard_id) {
    ReconfigPlan plan;
    std::set<ShardId> used;
    for (const auto& [sid, range] : table.ranges) {
        double w = workloads.contains(sid) ? workloads.at(sid) : 0.0;
        if (w <= w_hi) continue;
        auto hist = histograms.find(sid);
        if (hist == histograms.end() || hist->second.size() < 2) continue;  // cannot split
        auto halves = split_range(range, hist->second);
        if (!halves) continue;
        plan.splits.push_back({sid, halves->second.lo, next_shard_id++});
        used.insert(sid);
    }
    // Greedy leftmost-adjacent merges of cold pairs, each shard used once.
    for (size_t i = 0; i + 1 < table.ranges.size(); ++i) {
        ShardId left = table.ranges[i].first;
        ShardId right = table.ranges[i + 1].first;
        if (used.contains(left) || used.contains(right)) continue;
        double wl = workloads.contains(left) ? workloads.at(left) : 0.0;
        double wr = workloads.contains(right) ? workloads.at(right) : 0.0;
        if (wl < w_lo && wr < w_lo && wl + wr < w_hi) {
            plan.merges.push_back({left, right});
            used.insert(left);
            used.insert(right);
        }
    }
    return plan;
}

EpochTransition transition_epoch(const RangeTable& table,
                                 const std::map<ShardId, ShardState>& shards,
                                 const ReconfigPlan& plan,
                                 const std::vector<NodeId>& validator_pool, uint64_t seed,
                                 uint32_t v_min, uint32_t committee_size, uint64_t new_epoch) {
    for (const auto& [sid, st] : shards) {
        if (!st.lock_table.empty() || !st.staged_credits.empty() || st.shard_lock)
            throw std::logic_error("transition_epoch: shard not quiescent");
    }

    EpochTransition out;
    out.table = table;
    out.shards = shards;

    for (const auto& split : plan.splits) {
        out.table = out.table.with_split(split.shard, split.key, split.new_shard);
        ShardState& old_state = out.shards.at(split.shard);
        ShardState fresh;
        fresh.shard = split.new_shard;
        fresh.range = out.table.range_of(split.new_shard);
        old_state.range = out.table.range_of(split.shard);
        for (auto it = old_state.balances.begin(); it != old_state.balances.end();) {
            if (fresh.range.contains(key_of_account(it->first))) {
                fresh.balances[it->first] = it->second;
                it = old_state.balances.erase(it);
            } else {
                ++it;
            }
        }
        out.shards.emplace(split.new_shard, std::move(fresh));
    }

    for (const auto& merge : plan.merges) {
        out.table = out.table.with_merge(merge.left, merge.right);
        ShardState& left = out.shards.at(merge.left);
        ShardState& right = out.shards.at(merge.right);
        left.range = out.table.range_of(merge.left);
        for (const auto& [a, b] : right.balances) left.balances[a] = b;
        out.shards.erase(merge.right);
    }

    // Post-migration invariant: every account's key lies in its shard's range.
    for (const auto& [sid, st] : out.shards) {
        for (const auto& [a, b] : st.balances) {
            if (!st.range.contains(key_of_account(a)))
                throw std::logic_error("transition_epoch: account migrated outside range");
        }
    }

    size_t n_shards = out.table.ranges.size();
    if (validator_pool.size() < n_shards * committee_size)
        throw std::invalid_argument("transition_epoch: validator pool too small");

    // One global shuffle into disjoint per-shard candidate slices, then the
    // beacon selection per shard.
    std::vector<NodeId> pool = validator_pool;
    PrfStream shuffler(seed, "epoch-committees");
    shuffler.shuffle(pool);
    size_t offset = 0;
    for (const auto& [sid, range] : out.table.ranges) {
        std::vector<NodeId> slice(pool.begin() + static_cast<std::ptrdiff_t>(offset),
                                  pool.begin() + static_cast<std::ptrdiff_t>(offset + committee_size));
        offset += committee_size;
        out.committees[sid] = random_beacon(slice, sid, seed, v_min, committee_size);
    }
    (void)new_epoch;
    return out;
}

}  // namespace rbs
