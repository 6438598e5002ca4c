#include "rbs/partitioning.hpp"

#include <algorithm>
#include <stdexcept>

namespace rbs {

static Key256 pow2_key(unsigned bits) {
    // 2^bits for bits < 256.
    Key256 k;
    k.limb[bits / 64] = 1ull << (bits % 64);
    return k;
}

bool RangeTable::valid() const {
    if (ranges.empty()) return false;
    if (!ranges.front().second.lo.is_zero()) return false;
    for (size_t i = 0; i < ranges.size(); ++i) {
        const Range& r = ranges[i].second;
        bool last = i + 1 == ranges.size();
        if (r.hi_unbounded != last && !last) return false;
        if (!r.hi_unbounded && !(r.lo < r.hi)) return false;
        if (!last) {
            if (r.hi_unbounded) return false;
            if (!(r.hi == ranges[i + 1].second.lo)) return false;
        }
    }
    return true;
}

ShardId RangeTable::shard_of(const Key256& key) const {
    // Binary search for the last range whose lo <= key.
    auto it = std::upper_bound(ranges.begin(), ranges.end(), key,
                               [](const Key256& k, const auto& e) { return k < e.second.lo; });
    if (it == ranges.begin()) throw std::logic_error("key below table");
    --it;
    if (!it->second.contains(key)) throw std::logic_error("key outside table");
    return it->first;
}

const Range& RangeTable::range_of(ShardId shard) const {
    for (const auto& [sid, r] : ranges)
        if (sid == shard) return r;
    throw std::out_of_range("unknown shard id");
}

std::vector<ShardId> RangeTable::shard_ids() const {
    std::vector<ShardId> out;
    out.reserve(ranges.size());
    for (const auto& [sid, r] : ranges) out.push_back(sid);
    return out;
}

RangeTable RangeTable::with_split(ShardId shard, const Key256& split_key,
                                  ShardId new_shard) const {
    RangeTable out;
    for (const auto& [sid, r] : ranges) {
        if (sid == shard) {
            if (!r.contains(split_key) || split_key == r.lo)
                throw std::invalid_argument("split key not interior to range");
            out.ranges.emplace_back(sid, Range{r.lo, split_key, false});
            out.ranges.emplace_back(new_shard, Range{split_key, r.hi, r.hi_unbounded});
        } else {
            out.ranges.emplace_back(sid, r);
        }
    }
    return out;
}

RangeTable RangeTable::with_merge(ShardId left, ShardId right) const {
    RangeTable out;
    for (size_t i = 0; i < ranges.size(); ++i) {
        if (ranges[i].first == left) {
            if (i + 1 >= ranges.size() || ranges[i + 1].first != right)
                throw std::invalid_argument("merge shards not adjacent");
            Range merged{ranges[i].second.lo, ranges[i + 1].second.hi,
                         ranges[i + 1].second.hi_unbounded};
            out.ranges.emplace_back(left, merged);
            ++i;  // skip right
        } else {
            out.ranges.emplace_back(ranges[i].first, ranges[i].second);
        }
    }
    return out;
}

RangeTable init_ranges(uint32_t n_shards, unsigned bits) {
    if (n_shards == 0) throw std::domain_error("init_ranges: n_shards must be >= 1");
    if (n_shards == 1) {
        bool unbounded = bits == 256;
        Key256 hi;
        if (!unbounded) hi = Key256::from_u64(0).add(pow2_key(bits));
        RangeTable table;
        table.ranges.emplace_back(0, Range{Key256{}, hi, unbounded});
        return table;
    }
    Key256 width;
    uint64_t rem = 0;
    Key256::div_pow2(bits, n_shards, width, rem);
    RangeTable table;
    Key256 lo;  // zero
    for (uint32_t i = 0; i < n_shards; ++i) {
        Key256 w = (i < rem) ? width.add_u64(1) : width;
        Key256 hi = lo.add(w);
        bool last = (i + 1 == n_shards);
        bool unbounded = last && bits == 256;
        table.ranges.emplace_back(i, Range{lo, unbounded ? Key256{} : hi, unbounded});
        lo = hi;
    }
    return table;
}

ShardId find_shard(const Key256& key, const RangeTable& table) { return table.shard_of(key); }

ShardAssignment distribute(const std::vector<NodeId>& nodes,
                           const std::vector<Transaction>& txs,
                           const std::vector<uint64_t>& data, const RangeTable& table) {
    if (!data.empty() && data.size() != txs.size())
        throw std::invalid_argument("distribute: data must pair 1:1 with txs");
    ShardAssignment out;
    for (const auto& [sid, r] : table.ranges) {
        out.node_map[sid];
        out.tx_map[sid];
        out.data_map[sid];
    }
    for (NodeId n : nodes) out.node_map[table.shard_of(key_of_node(n))].push_back(n);
    for (size_t i = 0; i < txs.size(); ++i) {
        ShardId sid = table.shard_of(key_of_tx(txs[i].id));
        out.tx_map[sid].push_back(txs[i]);
        if (!data.empty()) out.data_map[sid].push_back(data[i]);
    }
    return out;
}

double skew_ratio(const std::vector<uint64_t>& row_counts) {
    if (row_counts.empty()) throw std::domain_error("skew_ratio: no shards");
    uint64_t total = 0, max = 0;
    for (uint64_t c : row_counts) {
        total += c;
        max = std::max(max, c);
    }
    if (total == 0) throw std::domain_error("skew_ratio: zero total");
    return static_cast<double>(max) * static_cast<double>(row_counts.size()) /
           static_cast<double>(total);
}

std::optional<std::pair<Range, Range>> split_range(const Range& range,
                                                   const std::vector<Key256>& occupied) {
    if (occupied.size() < 2) return std::nullopt;
    // Smallest occupied key with >= half the occupied keys strictly below it.
    size_t idx = (occupied.size() + 1) / 2;
    const Key256& k = occupied[idx];
    if (!range.contains(k) || k == range.lo)
        throw std::invalid_argument("split_range: occupied keys not interior to range");
    return std::make_pair(Range{range.lo, k, false}, Range{k, range.hi, range.hi_unbounded});
}

Range merge_ranges(const Range& a, const Range& b) {
    if (a.hi_unbounded || !(a.hi == b.lo))
        throw std::invalid_argument("merge_ranges: ranges not adjacent");
    return Range{a.lo, b.hi, b.hi_unbounded};
}

}  // namespace rbs
