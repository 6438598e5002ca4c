#include "rbs/randomness.hpp"

#include <cmath>
#include <stdexcept>

namespace rbs {

// ---- PrfStream ----

PrfStream::PrfStream(uint64_t seed, std::string_view label) {
    Bytes b;
    put_u64(b, seed);
    put_str(b, label);
    key_ = hash_domain(HashDomain::Prf, b);
}

PrfStream PrfStream::fork(std::string_view label) const {
    Bytes b;
    b.insert(b.end(), key_.begin(), key_.end());
    put_str(b, label);
    return PrfStream(hash_domain(HashDomain::Prf, b));
}

void PrfStream::refill() {
    Bytes b;
    b.insert(b.end(), key_.begin(), key_.end());
    put_u64(b, counter_++);
    block_ = hash_domain(HashDomain::Prf, b);
    used_ = 0;
}

uint64_t PrfStream::next_u64() {
    if (used_ >= 4) refill();
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | block_[used_ * 8 + static_cast<unsigned>(i)];
    ++used_;
    return v;
}

uint64_t PrfStream::uniform(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform: n must be > 0");
    // Rejection sampling to avoid modulo bias.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

double PrfStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double PrfStream::exponential(double mean) {
    double u;
    do {
        u = next_double();
    } while (u <= 0.0);
    return -mean * std::log(u);
}

// ---- commit-reveal ----

Hash256 commitment(uint64_t value, const Nonce& nonce) {
    Bytes b;
    put_u64(b, value);
    b.insert(b.end(), nonce.begin(), nonce.end());
    return hash_domain(HashDomain::Commitment, b);
}

bool verify_reveal(const Hash256& commit, uint64_t value, const Nonce& nonce) {
    return commitment(value, nonce) == commit;
}

uint64_t aggregate(const std::vector<uint64_t>& values, AggregationMode mode) {
    if (values.empty()) throw std::domain_error("aggregate: no contributors");
    if (mode == AggregationMode::Xor) {
        uint64_t acc = 0;
        for (uint64_t v : values) acc ^= v;
        return acc;
    }
    unsigned __int128 sum = 0;
    for (uint64_t v : values) sum += v;
    return static_cast<uint64_t>(sum / values.size());
}

bool CommitRevealRound::submit_commit(NodeId who, const Hash256& c) {
    if (phase_ != Phase::Committing) return false;
    return commitments_.emplace(who, c).second;
}

void CommitRevealRound::begin_reveal() {
    if (phase_ == Phase::Committing) phase_ = Phase::Revealing;
}

bool CommitRevealRound::submit_reveal(NodeId who, uint64_t value, const Nonce& nonce) {
    if (phase_ != Phase::Revealing) return false;
    auto it = commitments_.find(who);
    if (it == commitments_.end()) return false;
    if (!verify_reveal(it->second, value, nonce)) return false;
    reveals_[who] = value;
    return true;
}

std::optional<Randomness> CommitRevealRound::complete() {
    phase_ = Phase::Complete;
    if (reveals_.empty()) return std::nullopt;
    std::vector<uint64_t> values;
    Randomness r;
    for (const auto& [who, v] : reveals_) {
        values.push_back(v);
        r.contributors.insert(who);
    }
    r.value = aggregate(values, mode_);
    return r;
}

std::vector<NodeId> CommitRevealRound::withholders() const {
    std::vector<NodeId> out;
    for (const auto& [who, c] : commitments_)
        if (!reveals_.contains(who)) out.push_back(who);
    return out;
}

RoundResult run_round(const std::vector<RoundParticipant>& participants,
                      AggregationMode mode, PrfStream& rng, uint64_t round_id) {
    CommitRevealRound round(round_id, mode);
    std::map<NodeId, std::pair<uint64_t, Nonce>> secrets;
    for (const auto& p : participants) {
        uint64_t v = rng.next_u64();
        Nonce nonce;
        for (size_t i = 0; i < nonce.size(); i += 8) {
            uint64_t w = rng.next_u64();
            for (int j = 0; j < 8; ++j)
                nonce[i + static_cast<size_t>(j)] = static_cast<uint8_t>(w >> (8 * (7 - j)));
        }
        secrets[p.id] = {v, nonce};
        round.submit_commit(p.id, commitment(v, nonce));
    }
    round.begin_reveal();
    for (const auto& p : participants) {
        if (p.withholds_reveal) continue;
        const auto& [v, nonce] = secrets[p.id];
        round.submit_reveal(p.id, v, nonce);
    }
    RoundResult result;
    result.withholders = round.withholders();
    result.randomness = round.complete();
    return result;
}

std::vector<NodeId> random_beacon(const std::vector<NodeId>& candidates, ShardId shard,
                                  uint64_t seed, uint32_t v_min, uint32_t committee_size) {
    if (candidates.size() < v_min)
        throw std::invalid_argument("random_beacon: candidate pool below V_min");
    Bytes b;
    put_u64(b, seed);
    put_u32(b, shard);
    put_str(b, "beacon");
    PrfStream prf(hash_domain(HashDomain::Prf, b));
    std::vector<NodeId> pool = candidates;
    prf.shuffle(pool);
    size_t take = std::max<size_t>(v_min, committee_size);
    take = std::min(take, pool.size());
    pool.resize(take);
    return pool;
}

}  // namespace rbs
