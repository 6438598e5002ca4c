#pragma once

#include <map>
#include <optional>
#include <vector>

#include "rbs/types.hpp"

namespace rbs {

// Half-open key interval [lo, hi). The top range of the full 256-bit space
// cannot represent its upper bound as a Key256, so it carries an unbounded
// flag instead.
struct Range {
    Key256 lo;
    Key256 hi;
    bool hi_unbounded = false;

    bool contains(const Key256& k) const {
        return k >= lo && (hi_unbounded || k < hi);
    }
    friend bool operator==(const Range&, const Range&) = default;
};

// The global partition of the key space: disjoint, abutting, covering ranges
// sorted ascending by lo. Immutable snapshot; reconfiguration builds a new one.
struct RangeTable {
    std::vector<std::pair<ShardId, Range>> ranges;

    bool valid() const;
    ShardId shard_of(const Key256& key) const;
    const Range& range_of(ShardId shard) const;
    std::vector<ShardId> shard_ids() const;

    // Replace `shard`'s range with [lo, k) and insert a new shard owning [k, hi).
    RangeTable with_split(ShardId shard, const Key256& split_key, ShardId new_shard) const;
    // Merge `right` into `left`; their ranges must abut.
    RangeTable with_merge(ShardId left, ShardId right) const;
};

// Equal-width contiguous partition of a 2^bits key space into n_shards ranges,
// widths differing by at most one unit. bits < 256 is a test-scaled space.
RangeTable init_ranges(uint32_t n_shards, unsigned bits = 256);

ShardId find_shard(const Key256& key, const RangeTable& table);

struct ShardAssignment {
    std::map<ShardId, std::vector<NodeId>> node_map;
    std::map<ShardId, std::vector<Transaction>> tx_map;
    std::map<ShardId, std::vector<uint64_t>> data_map;
};

// Range-based distribution: nodes by hash of node id, (tx, data) pairs by hash
// of the transaction id so a transaction and its payload land together.
// `data` must be empty or the same length as `txs`.
ShardAssignment distribute(const std::vector<NodeId>& nodes,
                           const std::vector<Transaction>& txs,
                           const std::vector<uint64_t>& data, const RangeTable& table);

// sigma = max count / (total / n). Throws std::domain_error when total is 0.
double skew_ratio(const std::vector<uint64_t>& row_counts);

// Load-median split: the split key is the smallest occupied key with at least
// half the occupied keys below it. Returns nullopt when fewer than two
// occupied keys exist. `occupied` must be sorted ascending and inside `range`.
std::optional<std::pair<Range, Range>> split_range(const Range& range,
                                                   const std::vector<Key256>& occupied);

// Throws std::invalid_argument unless a.hi == b.lo.
Range merge_ranges(const Range& a, const Range& b);

}  // namespace rbs
