#include "rbs/sim.hpp"

#include <cinttypes>
#include <cstdio>
#include <functional>

#include "rbs/consensus.hpp"
#include "rbs/cross_shard.hpp"
#include "rbs/randomness.hpp"

namespace rbs {

const char* to_string(NodeBehavior b) {
    switch (b) {
        case NodeBehavior::Honest: return "honest";
        case NodeBehavior::Silent: return "silent";
        case NodeBehavior::Equivocate: return "equivocate";
        case NodeBehavior::InvalidProposal: return "invalid";
        case NodeBehavior::Staller: return "staller";
        case NodeBehavior::RevealWithholder: return "withholder";
        case NodeBehavior::DoSFlooder: return "dos";
    }
    return "unknown";
}

std::optional<Tick> NetworkModel::delivery(NodeId from, NodeId to, Tick now,
                                           PrfStream& prf) const {
    if (severed.contains({from, to}) || severed.contains({to, from})) return std::nullopt;
    bool dropped = prf.next_double() < drop_rate;
    Tick lat = lat_lo;
    if (lat_hi > lat_lo)
        lat += static_cast<Tick>(prf.uniform(static_cast<uint64_t>(lat_hi - lat_lo) + 1));
    if (dropped) return std::nullopt;
    return now + lat;
}

namespace {

constexpr size_t kMempoolCap = 10000;
constexpr Tick kRateWindow = 50;
constexpr uint32_t kRateLimit = 20;
constexpr Tick kRatePenaltyBase = 100;
constexpr double kTrustThreshold = 0.5;
constexpr double kTrustPenalty = 0.1;

struct RateState {
    Tick window_start = 0;
    uint32_t count = 0;
    Tick penalty_until = 0;
    uint32_t violations = 0;
};

struct Group {
    ValidatorSet vs;
    std::map<NodeId, IbftInstance> inst;
    uint64_t height = 0;
    Tick height_started = 0;
};

class Sim {
public:
    explicit Sim(const ScenarioConfig& cfg)
        : cfg_(cfg),
          root_(cfg.seed, "scenario"),
          net_prf_(root_.fork("network")),
          jitter_prf_(root_.fork("retry-jitter")),
          inject_prf_(root_.fork("inject")),
          beacon_prf_(root_.fork("beacon")) {
        net_.lat_lo = cfg.net_latency - cfg.net_jitter;
        net_.lat_hi = cfg.net_latency + cfg.net_jitter;
        net_.drop_rate = cfg.drop_rate;
    }

    SimResult run();

private:
    using Ev = std::function<void()>;

    void install_genesis();
    void assign_behaviors();
    std::vector<NodeId> eligible_pool(size_t need) const;
    void adopt_committees(const std::map<ShardId, std::vector<NodeId>>& committees);
    void begin_shard_timers();

    void start_height(ShardId shard);
    void maybe_propose(ShardId shard, NodeId node);
    void propose_honest(ShardId shard, NodeId node);
    Block build_block(ShardId shard, NodeId proposer);
    void bcast(ShardId shard, const ConsensusMsg& msg, NodeId from);
    void deliver(ShardId shard, NodeId to, const ConsensusMsg& msg);
    void handle_step(ShardId shard, NodeId node, StepResult& r);
    void timeout_check(ShardId shard, NodeId node, uint64_t height, Tick expected);
    BlockValidator validator_for(ShardId shard);
    void on_finalize(ShardId shard, NodeId by, const Block& block);

    void apply_block(ShardId shard, const Block& block);
    void apply_intra(ShardId shard, const Transaction& tx);
    void apply_cross_source(ShardId shard, const Transaction& tx);
    void process_inbox(ShardId shard);
    void ack_deliver(Ack ack);
    void retry_tx(const Transaction& tx);
    void rollback_dest(TxId id, AccountId receiver);
    void abort_inflight(TxId id, RejectReason reason);
    void expiry_sweep(ShardId shard);

    void schedule_epoch_events();
    void epoch_boundary();
    void record_epoch_stats();
    void rebucket_pending();
    void finish();

    TxOutcomeRec& rec(TxId id) { return res_.txs[rec_index_.at(id)]; }
    void settle(TxId id, const char* outcome, const char* reason, Tick finalized_at = -1);
    bool admitted(const Transaction& tx);
    void trace(const std::string& row);
    ShardId shard_of_account(AccountId a) const { return table_.shard_of(key_of_account(a)); }
    Tick now() const { return q_.now(); }

    ScenarioConfig cfg_;
    PrfStream root_, net_prf_, jitter_prf_, inject_prf_, beacon_prf_;
    NetworkModel net_;
    EventQueue<Ev> q_;
    bool stopped_ = false;
    uint64_t gen_ = 0;  // bumped per epoch; stale consensus closures die

    RangeTable table_;
    std::map<ShardId, ShardState> shards_;
    std::map<ShardId, Group> groups_;
    std::map<NodeId, NodeBehavior> behavior_;
    std::map<NodeId, double> trust_;

    std::map<ShardId, std::vector<Transaction>> pending_;
    std::map<ShardId, std::vector<CrossShardMsg>> inbox_;
    std::vector<Transaction> deferred_cross_;
    std::map<TxId, CrossShardTx> inflight_;
    std::map<TxId, uint32_t> attempts_;
    std::map<TxId, size_t> rec_index_;
    std::map<AccountId, RateState> limiter_;
    std::set<ShardId> sweeping_;
    RetryParams retry_params_;

    uint64_t epoch_index_ = 0;
    Tick epoch_start_ = 0;
    bool cross_barrier_ = false;
    std::map<ShardId, uint64_t> epoch_cost_;
    ShardId next_shard_id_ = 0;

    SimResult res_;
    HashWriter digest_;
};

void Sim::trace(const std::string& row) {
    digest_.update(reinterpret_cast<const uint8_t*>(row.data()), row.size());
    digest_.update(reinterpret_cast<const uint8_t*>("\n"), 1);
    res_.trace.push_back(row);
}

void Sim::settle(TxId id, const char* outcome, const char* reason, Tick finalized_at) {
    TxOutcomeRec& r = rec(id);
    if (!r.outcome.empty()) return;
    r.outcome = outcome;
    r.reason = reason;
    r.finalized_at = finalized_at;
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "tx %" PRId64 " %" PRIu64 " %s %" PRIu64 " %" PRIu64 " %" PRIu64 " %" PRIu64
                  " %s%s%s",
                  static_cast<int64_t>(now()), r.id,
                  r.kind == TxKind::CrossShard ? "cross" : "intra", r.sender, r.receiver,
                  r.amount, r.fee, outcome, *reason ? " " : "", reason);
    trace(buf);
}

void Sim::assign_behaviors() {
    std::vector<NodeId> ids;
    for (NodeId n = 0; n < cfg_.n_nodes; ++n) {
        ids.push_back(n);
        behavior_[n] = NodeBehavior::Honest;
        trust_[n] = 1.0;
    }
    PrfStream prf = root_.fork("behaviors");
    prf.shuffle(ids);
    auto n_mal = static_cast<size_t>(cfg_.malicious_fraction * cfg_.n_nodes + 0.5);
    for (size_t i = 0; i < n_mal; ++i) {
        NodeBehavior b = NodeBehavior::Silent;
        if (cfg_.malicious_behavior == "equivocate") b = NodeBehavior::Equivocate;
        else if (cfg_.malicious_behavior == "invalid") b = NodeBehavior::InvalidProposal;
        else if (cfg_.malicious_behavior == "staller") b = NodeBehavior::Staller;
        else if (cfg_.malicious_behavior == "withholder") b = NodeBehavior::RevealWithholder;
        else if (cfg_.malicious_behavior == "mix")
            b = i % 2 == 0 ? NodeBehavior::Silent : NodeBehavior::Equivocate;
        behavior_[ids[i]] = b;
    }
}

std::vector<NodeId> Sim::eligible_pool(size_t need) const {
    std::vector<NodeId> pool;
    for (const auto& [n, t] : trust_)
        if (t >= kTrustThreshold) pool.push_back(n);
    if (pool.size() < need) {
        std::vector<std::pair<double, NodeId>> rest;
        for (const auto& [n, t] : trust_)
            if (t < kTrustThreshold) rest.emplace_back(-t, n);
        std::sort(rest.begin(), rest.end());
        for (const auto& [negt, n] : rest) {
            if (pool.size() >= need) break;
            pool.push_back(n);
        }
        std::sort(pool.begin(), pool.end());
    }
    return pool;
}

void Sim::install_genesis() {
    table_ = init_ranges(cfg_.n_shards);
    next_shard_id_ = cfg_.n_shards;
    for (const auto& [sid, range] : table_.ranges) {
        ShardState st;
        st.shard = sid;
        st.range = range;
        shards_[sid] = st;
    }
    std::vector<AccountId> all_accounts;
    for (AccountId a = 0; a < cfg_.accounts; ++a) all_accounts.push_back(a);
    if (cfg_.dos_attack)
        for (AccountId a : dos_attacker_accounts(cfg_)) all_accounts.push_back(a);
    for (AccountId a : all_accounts) {
        ShardId sid = shard_of_account(a);
        shards_[sid].balances[a] = cfg_.initial_balance;
        res_.genesis_total += cfg_.initial_balance;
        char buf[96];
        std::snprintf(buf, sizeof buf, "acct %" PRIu64 " %u %" PRIu64, a, sid,
                      cfg_.initial_balance);
        trace(buf);
    }
    assign_behaviors();
    auto genesis =
        transition_epoch(table_, shards_, {}, eligible_pool(0), cfg_.seed, cfg_.v_min,
                         cfg_.committee_size, 0);
    adopt_committees(genesis.committees);
}

void Sim::adopt_committees(const std::map<ShardId, std::vector<NodeId>>& committees) {
    groups_.clear();
    for (const auto& [sid, members] : committees) {
        Group g;
        g.vs.shard = sid;
        g.vs.members = members;
        g.vs.epoch = epoch_index_;
        groups_.emplace(sid, std::move(g));
    }
}

void Sim::begin_shard_timers() {
    uint64_t gen = gen_;
    for (const auto& [sid, g] : groups_) {
        ShardId shard = sid;
        q_.schedule(now() + 1, [this, gen, shard] {
            if (!stopped_ && gen_ == gen) start_height(shard);
        });
        if (sweeping_.insert(shard).second)
            q_.schedule(now() + cfg_.lock_ttl, [this, shard] { expiry_sweep(shard); });
    }
}

void Sim::start_height(ShardId shard) {
    if (stopped_) return;
    Group& g = groups_.at(shard);
    uint64_t h = shards_.at(shard).next_height();
    g.height = h;
    g.height_started = now();
    g.inst.clear();
    for (NodeId m : g.vs.members)
        g.inst.emplace(m, IbftInstance(shard, g.vs, m, cfg_.timeout_base));
    uint64_t gen = gen_;
    for (NodeId m : g.vs.members) {
        IbftInstance& inst = g.inst.at(m);
        inst.begin_height(h, now());
        if (behavior_.at(m) == NodeBehavior::Silent) continue;
        Tick dl = inst.deadline();
        q_.schedule(dl, [this, gen, shard, m, h, dl] {
            if (!stopped_ && gen_ == gen) timeout_check(shard, m, h, dl);
        });
    }
    maybe_propose(shard, g.vs.leader(h, 0));
}

void Sim::timeout_check(ShardId shard, NodeId node, uint64_t height, Tick expected) {
    Group& g = groups_.at(shard);
    if (g.height != height) return;
    IbftInstance& inst = g.inst.at(node);
    if (inst.finalized_block()) return;
    uint64_t gen = gen_;
    if (inst.deadline() != expected) {  // round moved via catch-up; follow the new deadline
        Tick dl = inst.deadline();
        if (dl > now())
            q_.schedule(dl, [this, gen, shard, node, height, dl] {
                if (!stopped_ && gen_ == gen) timeout_check(shard, node, height, dl);
            });
        return;
    }
    auto rc = inst.on_timeout(now());
    if (rc) {
        ++res_.round_changes;
        bcast(shard, *rc, node);
    }
    Tick dl = inst.deadline();
    q_.schedule(dl, [this, gen, shard, node, height, dl] {
        if (!stopped_ && gen_ == gen) timeout_check(shard, node, height, dl);
    });
    maybe_propose(shard, node);
}

BlockValidator Sim::validator_for(ShardId shard) {
    return [this, shard](const Block& b) {
        const ShardState& st = shards_.at(shard);
        return b.shard == shard && b.height == st.next_height() &&
               b.parent_hash == st.head_hash() && b.size_bytes <= cfg_.block_limit;
    };
}

Block Sim::build_block(ShardId shard, NodeId proposer) {
    std::vector<Transaction>& pending = pending_[shard];
    if (pending.size() > kMempoolCap) {
        std::sort(pending.begin(), pending.end(),
                  [](const Transaction& a, const Transaction& b) {
                      return a.fee != b.fee ? a.fee > b.fee : a.id < b.id;
                  });
        for (size_t i = kMempoolCap; i < pending.size(); ++i)
            settle(pending[i].id, "dropped", "mempool_full");
        pending.resize(kMempoolCap);
    }
    const ShardState& st = shards_.at(shard);
    return form_block(pending, cfg_.block_limit, st.head_hash(), st.next_height(), shard,
                      proposer);
}

void Sim::maybe_propose(ShardId shard, NodeId node) {
    if (stopped_) return;
    Group& g = groups_.at(shard);
    auto it = g.inst.find(node);
    if (it == g.inst.end() || !it->second.should_propose()) return;
    switch (behavior_.at(node)) {
        case NodeBehavior::Silent:
            return;
        case NodeBehavior::InvalidProposal: {
            auto bad = std::make_shared<Block>(build_block(shard, node));
            bad->parent_hash = hash_domain(HashDomain::Object, from_string("invalid"));
            bcast(shard, it->second.make_proposal(bad), node);
            return;
        }
        case NodeBehavior::Equivocate: {
            Block a = build_block(shard, node);
            Block alt = a;
            if (!alt.txs.empty()) {
                alt.txs.pop_back();
                alt.size_bytes -= kTxWireSize;
            } else {
                alt.state_root = hash_domain(HashDomain::Object, from_string("equiv"));
            }
            ConsensusMsg ma = it->second.make_proposal(std::make_shared<Block>(a));
            ConsensusMsg mb = ma;
            mb.block = std::make_shared<Block>(alt);
            mb.block_hash = mb.block->hash();
            // Conflicting proposals to the two halves of the committee.
            const auto& members = g.vs.members;
            uint64_t gen = gen_;
            for (size_t i = 0; i < members.size(); ++i) {
                NodeId to = members[i];
                if (to == node) continue;
                const ConsensusMsg& msg = i < members.size() / 2 ? ma : mb;
                ++res_.messages;
                auto at = net_.delivery(node, to, now(), net_prf_);
                if (!at) continue;
                q_.schedule(*at, [this, gen, shard, to, msg] {
                    if (!stopped_ && gen_ == gen) deliver(shard, to, msg);
                });
            }
            return;
        }
        case NodeBehavior::Staller: {
            Tick at = std::max<Tick>(now(), it->second.deadline() - 2);
            uint64_t gen = gen_;
            uint64_t h = g.height;
            uint32_t round = it->second.round();
            q_.schedule(at, [this, gen, shard, node, h, round] {
                if (stopped_ || gen_ != gen) return;
                Group& gg = groups_.at(shard);
                if (gg.height != h) return;
                auto iit = gg.inst.find(node);
                if (iit == gg.inst.end() || iit->second.round() != round ||
                    !iit->second.should_propose())
                    return;
                propose_honest(shard, node);
            });
            return;
        }
        default:
            propose_honest(shard, node);
            return;
    }
}

void Sim::propose_honest(ShardId shard, NodeId node) {
    Group& g = groups_.at(shard);
    IbftInstance& inst = g.inst.at(node);
    auto block = std::make_shared<Block>(build_block(shard, node));
    bcast(shard, inst.make_proposal(block), node);
}

void Sim::bcast(ShardId shard, const ConsensusMsg& msg, NodeId from) {
    Group& g = groups_.at(shard);
    uint64_t gen = gen_;
    for (NodeId to : g.vs.members) {
        ++res_.messages;
        auto at = to == from ? std::optional<Tick>(now())
                             : net_.delivery(from, to, now(), net_prf_);
        if (!at) continue;
        q_.schedule(*at, [this, gen, shard, to, msg] {
            if (!stopped_ && gen_ == gen) deliver(shard, to, msg);
        });
    }
}

void Sim::deliver(ShardId shard, NodeId to, const ConsensusMsg& msg) {
    if (behavior_.at(to) == NodeBehavior::Silent) return;
    Group& g = groups_.at(shard);
    auto it = g.inst.find(to);
    if (it == g.inst.end()) return;
    StepResult r = it->second.on_message(msg, now(), validator_for(shard));
    handle_step(shard, to, r);
    maybe_propose(shard, to);
}

void Sim::handle_step(ShardId shard, NodeId node, StepResult& r) {
    for (const ConsensusMsg& out : r.outbound) bcast(shard, out, node);
    if (r.finalized) on_finalize(shard, node, *r.finalized);
}

void Sim::on_finalize(ShardId shard, NodeId by, const Block& block) {
    if (stopped_) return;
    ShardState& st = shards_.at(shard);
    if (block.height != st.next_height()) return;  // someone already applied it
    Group& g = groups_.at(shard);
    ++res_.blocks;
    res_.rounds_total += g.inst.at(by).round() + 1;
    char buf[128];
    std::snprintf(buf, sizeof buf, "block %" PRId64 " %u %" PRIu64 " %u %zu %s",
                  static_cast<int64_t>(now()), shard, block.height, block.proposer,
                  block.txs.size(), hash_hex(block.hash()).substr(0, 16).c_str());
    trace(buf);
    apply_block(shard, block);
    Tick next_at = std::max<Tick>(g.height_started + cfg_.block_interval, now() + 1);
    uint64_t gen = gen_;
    q_.schedule(next_at, [this, gen, shard] {
        if (!stopped_ && gen_ == gen) start_height(shard);
    });
}

void Sim::apply_block(ShardId shard, const Block& block) {
    ShardState& st = shards_.at(shard);
    st.chain.push_back(block);

    std::set<TxId> included;
    for (const Transaction& tx : block.txs) included.insert(tx.id);
    auto& pending = pending_[shard];
    std::erase_if(pending, [&](const Transaction& t) { return included.contains(t.id); });

    for (const Transaction& tx : block.txs) {
        if (!st.owns(tx.sender)) {  // range moved since the tx entered this mempool
            pending_[shard_of_account(tx.sender)].push_back(tx);
            continue;
        }
        ShardId dshard = shard_of_account(tx.receiver);
        if (dshard == shard) {
            apply_intra(shard, tx);
        } else {
            Transaction cross = tx;
            cross.kind = TxKind::CrossShard;
            cross.source_shard = shard;
            cross.dest_shard = dshard;
            rec(tx.id).kind = TxKind::CrossShard;
            apply_cross_source(shard, cross);
        }
    }
    process_inbox(shard);
}

void Sim::apply_intra(ShardId shard, const Transaction& tx) {
    ShardState& st = shards_.at(shard);
    rec(tx.id).kind = TxKind::IntraShard;
    if (st.is_locked(tx.sender) || st.is_locked(tx.receiver)) {
        retry_tx(tx);
        return;
    }
    auto bal = st.balances.find(tx.sender);
    if (bal == st.balances.end() || bal->second < tx.amount + tx.fee) {
        settle(tx.id, "rejected", "insufficient_balance");
        return;
    }
    bal->second -= tx.amount + tx.fee;
    st.balances[tx.receiver] += tx.amount;
    res_.burned_fees += tx.fee;
    epoch_cost_[shard] += 1;
    settle(tx.id, "finalized", "", now());
}

void Sim::apply_cross_source(ShardId shard, const Transaction& tx) {
    if (cross_barrier_) {
        deferred_cross_.push_back(tx);
        return;
    }
    ShardState& st = shards_.at(shard);
    auto out = initiate(tx, st, now(), cfg_.lock_ttl, cfg_.lock_mode);
    if (std::holds_alternative<RejectReason>(out)) {
        RejectReason r = std::get<RejectReason>(out);
        if (r == RejectReason::LockConflict) retry_tx(tx);
        else settle(tx.id, "rejected", to_string(r));
        return;
    }
    res_.lock_wait_total += static_cast<uint64_t>(now() - tx.submitted_at);
    ++res_.lock_wait_samples;
    epoch_cost_[shard] += 2;

    CrossShardTx ctx;
    ctx.tx = tx;
    ctx.phase = CrossPhase::Validating;
    ctx.initiated_at = now();
    inflight_[tx.id] = ctx;

    CrossShardMsg msg = std::get<CrossShardMsg>(std::move(out));
    auto at = net_.delivery(0, 1, now(), net_prf_);
    Tick arrive = at ? *at : now() + net_.lat_hi;  // the shard channel is reliable
    q_.schedule(arrive, [this, msg = std::move(msg)] {
        if (stopped_) return;
        inbox_[shard_of_account(msg.tx.receiver)].push_back(msg);
    });
}

void Sim::process_inbox(ShardId shard) {
    auto it = inbox_.find(shard);
    if (it == inbox_.end() || it->second.empty()) return;
    std::vector<CrossShardMsg> batch = std::move(it->second);
    it->second.clear();
    ShardState& st = shards_.at(shard);
    for (const CrossShardMsg& msg : batch) {
        ShardId d = shard_of_account(msg.tx.receiver);
        if (d != shard) {  // the table moved underneath the message
            inbox_[d].push_back(msg);
            continue;
        }
        Ack ack;
        if (inject_prf_.next_double() < cfg_.inject_reject_rate) {
            ack.tx = msg.tx.id;
            ack.shard = shard;
            ack.status = AckStatus::Rejected;
            ack.reason = RejectReason::Injected;
        } else {
            ack = validate_and_execute(msg, st, now(), cfg_.lock_ttl, cfg_.lock_mode);
        }
        auto at = net_.delivery(1, 0, now(), net_prf_);
        Tick arrive = at ? *at : now() + net_.lat_hi;
        if (inject_prf_.next_double() < cfg_.inject_delay_rate)
            arrive += cfg_.lock_ttl * 2;  // ack outlives the lock: expiry fault
        q_.schedule(arrive, [this, ack] {
            if (!stopped_) ack_deliver(ack);
        });
    }
}

void Sim::rollback_dest(TxId id, AccountId receiver) {
    ShardState& dest = shards_.at(shard_of_account(receiver));
    dest.staged_credits.erase(id);
    release_locks(dest, id);
}

void Sim::abort_inflight(TxId id, RejectReason reason) {
    auto it = inflight_.find(id);
    if (it == inflight_.end()) return;
    Transaction tx = it->second.tx;
    release_locks(shards_.at(shard_of_account(tx.sender)), id);
    rollback_dest(id, tx.receiver);
    inflight_.erase(it);
    if (reason == RejectReason::LockConflict) retry_tx(tx);
    else settle(id, "rejected", to_string(reason));
}

void Sim::ack_deliver(Ack ack) {
    auto it = inflight_.find(ack.tx);
    if (it == inflight_.end()) return;  // late ack; expiry already cleaned up
    CrossShardTx& ctx = it->second;
    if (ctx.phase != CrossPhase::Validating) return;
    ctx.acks[ack.shard] = ack;
    ShardState& src = shards_.at(shard_of_account(ctx.tx.sender));
    ShardState& dest = shards_.at(shard_of_account(ctx.tx.receiver));
    if (ack.status == AckStatus::Validated) {
        auto lock = src.lock_table.find(ctx.tx.sender);
        bool held = lock != src.lock_table.end() && lock->second.holder == ctx.tx.id;
        if (!held || !dest.staged_credits.contains(ctx.tx.id)) {
            ctx.acks[ack.shard].status = AckStatus::Rejected;
            ctx.acks[ack.shard].reason = RejectReason::Timeout;
        }
    }
    ctx.phase = CrossPhase::Committing;
    FinalizeOutcome out = finalize(ctx, src, dest);
    if (out == FinalizeOutcome::Finalized) {
        res_.burned_fees += ctx.tx.fee;
        settle(ctx.tx.id, "finalized", "", now());
        inflight_.erase(it);
    } else {
        RejectReason r = ctx.reject_reason.value_or(RejectReason::Timeout);
        Transaction tx = ctx.tx;
        inflight_.erase(it);
        if (r == RejectReason::LockConflict) retry_tx(tx);
        else settle(tx.id, "rejected", to_string(r));
    }
}

void Sim::retry_tx(const Transaction& tx) {
    uint32_t a = ++attempts_[tx.id];
    if (retry_exhausted(a, retry_params_)) {
        settle(tx.id, "rejected", "lock_conflict");
        return;
    }
    double jitter = 0.75 + jitter_prf_.next_double() * 0.5;
    Tick delay = retry_schedule(a, tx.fee, retry_params_, jitter);
    q_.schedule(now() + delay, [this, tx] {
        if (stopped_) return;
        pending_[shard_of_account(tx.sender)].push_back(tx);
    });
}

void Sim::expiry_sweep(ShardId shard) {
    if (stopped_) return;
    if (!shards_.contains(shard)) {
        sweeping_.erase(shard);
        return;
    }
    ShardState& st = shards_.at(shard);
    for (const LockRecord& rel : expire_locks(st, now())) {
        TxId holder = rel.holder;
        st.staged_credits.erase(holder);  // dest-side rollback if staged here
        auto it = inflight_.find(holder);
        if (it != inflight_.end() && shard_of_account(it->second.tx.sender) == shard)
            abort_inflight(holder, RejectReason::Timeout);
    }
    Tick next = now() + std::max<Tick>(1, cfg_.lock_ttl / 2);
    q_.schedule(next, [this, shard] { expiry_sweep(shard); });
}

bool Sim::admitted(const Transaction& tx) {
    if (!(cfg_.dos_attack && cfg_.dos_adaptive)) return true;
    RateState& rs = limiter_[tx.sender];
    if (now() < rs.penalty_until) return false;
    if (now() - rs.window_start >= kRateWindow) {
        rs.window_start = now();
        rs.count = 0;
    }
    if (++rs.count > kRateLimit) {
        rs.penalty_until = now() + (kRatePenaltyBase << std::min<uint32_t>(rs.violations, 10));
        ++rs.violations;
        rs.count = 0;
        rs.window_start = now();
        return false;
    }
    return true;
}

void Sim::rebucket_pending() {
    std::vector<Transaction> all;
    for (auto& [sid, vec] : pending_)
        for (Transaction& t : vec) all.push_back(std::move(t));
    pending_.clear();
    for (Transaction& t : all) pending_[shard_of_account(t.sender)].push_back(std::move(t));

    std::map<ShardId, std::vector<CrossShardMsg>> inbox = std::move(inbox_);
    inbox_.clear();
    for (auto& [sid, msgs] : inbox)
        for (CrossShardMsg& m : msgs)
            inbox_[shard_of_account(m.tx.receiver)].push_back(std::move(m));
}

void Sim::record_epoch_stats() {
    EpochStats es;
    es.epoch = epoch_index_;
    es.n_shards = static_cast<uint32_t>(table_.ranges.size());
    std::vector<uint64_t> counts;
    for (const auto& [sid, range] : table_.ranges) {
        uint64_t c = epoch_cost_.contains(sid) ? epoch_cost_.at(sid) : 0;
        counts.push_back(c);
        es.processed_cost += c;
    }
    es.sigma = es.processed_cost == 0 ? 1.0 : skew_ratio(counts);
    res_.epochs.push_back(es);
    char buf[96];
    std::snprintf(buf, sizeof buf, "epoch %" PRId64 " %" PRIu64 " %u %.6f",
                  static_cast<int64_t>(now()), es.epoch, es.n_shards, es.sigma);
    trace(buf);
    epoch_cost_.clear();
}

void Sim::schedule_epoch_events() {
    if (cfg_.epoch_length <= 0) return;
    Tick boundary = epoch_start_ + cfg_.epoch_length;
    if (boundary >= cfg_.duration) return;
    Tick barrier = boundary - std::min(cfg_.lock_ttl, cfg_.epoch_length / 2);
    if (barrier > now())
        q_.schedule(barrier, [this] {
            if (!stopped_) cross_barrier_ = true;
        });
    q_.schedule(boundary, [this] {
        if (!stopped_) epoch_boundary();
    });
}

void Sim::epoch_boundary() {
    // Quiescence: whatever the barrier did not settle rolls back here.
    std::vector<TxId> live;
    for (const auto& [id, ctx] : inflight_) live.push_back(id);
    for (TxId id : live) abort_inflight(id, RejectReason::Timeout);
    for (auto& [sid, st] : shards_) {
        st.staged_credits.clear();
        st.lock_table.clear();
        st.shard_lock.reset();
    }

    std::map<ShardId, double> workloads;
    double total = 0;
    size_t n_cur = table_.ranges.size();
    for (const auto& [sid, range] : table_.ranges) {
        double c = epoch_cost_.contains(sid) ? static_cast<double>(epoch_cost_.at(sid)) : 0.0;
        workloads[sid] = c;
        total += c;
    }
    record_epoch_stats();

    // Beacon round over the full validator set; withholders pay trust.
    std::vector<RoundParticipant> ps;
    for (const auto& [n, b] : behavior_)
        ps.push_back({n, b == NodeBehavior::RevealWithholder});
    RoundResult rr = run_round(ps, AggregationMode::Xor, beacon_prf_, epoch_index_);
    for (NodeId w : rr.withholders) trust_[w] = std::max(0.0, trust_[w] - kTrustPenalty);
    uint64_t epoch_seed =
        cfg_.seed ^ (rr.randomness ? rr.randomness->value : 0) ^ (epoch_index_ + 1);

    ReconfigPlan plan;
    if (cfg_.reconfigure && total > 0) {
        double mean = total / static_cast<double>(n_cur);
        std::map<ShardId, std::vector<Key256>> hist;
        for (const auto& [sid, st] : shards_) {
            auto& keys = hist[sid];
            for (const auto& [a, bal] : st.balances) keys.push_back(key_of_account(a));
            std::sort(keys.begin(), keys.end());
        }
        EpochConfig ec;
        plan = plan_reconfiguration(workloads, table_, mean * ec.w_hi_factor,
                                    mean * ec.w_lo_factor, hist, next_shard_id_);
        while (!plan.splits.empty() &&
               (n_cur + plan.splits.size() - plan.merges.size()) * cfg_.committee_size >
                   cfg_.n_nodes)
            plan.splits.pop_back();
        next_shard_id_ += static_cast<ShardId>(plan.splits.size());
    }

    ++epoch_index_;
    size_t n_after = n_cur + plan.splits.size() - plan.merges.size();
    auto trans = transition_epoch(table_, shards_, plan,
                                  eligible_pool(n_after * cfg_.committee_size), epoch_seed,
                                  cfg_.v_min, cfg_.committee_size, epoch_index_);
    table_ = trans.table;
    shards_ = trans.shards;
    ++gen_;
    adopt_committees(trans.committees);

    cross_barrier_ = false;
    rebucket_pending();
    for (Transaction& t : deferred_cross_)
        pending_[shard_of_account(t.sender)].push_back(std::move(t));
    deferred_cross_.clear();

    epoch_start_ = now();
    begin_shard_timers();
    schedule_epoch_events();
}

void Sim::finish() {
    std::vector<TxId> live;
    for (const auto& [id, ctx] : inflight_) live.push_back(id);
    for (TxId id : live) abort_inflight(id, RejectReason::Timeout);
    for (auto& [sid, st] : shards_) {
        expire_locks(st, now());
        res_.live_locks_at_end += st.lock_table.size() + st.staged_credits.size() +
                                  (st.shard_lock ? 1 : 0);
        st.staged_credits.clear();
        st.lock_table.clear();
        st.shard_lock.reset();
    }
    record_epoch_stats();
    for (const TxOutcomeRec& r : res_.txs)
        if (r.outcome.empty()) settle(r.id, "dropped", "end_of_run");

    std::map<AccountId, uint64_t> final_bal;
    for (const auto& [sid, st] : shards_)
        for (const auto& [a, b] : st.balances) final_bal[a] += b;
    for (const auto& [a, b] : final_bal) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "end %" PRIu64 " %" PRIu64, a, b);
        trace(buf);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "burned %" PRIu64, res_.burned_fees);
    trace(buf);
    stopped_ = true;
}

SimResult Sim::run() {
    trace("trace v1 config=" + hash_hex(sha256(from_string(cfg_.canonical()))).substr(0, 16));
    install_genesis();
    retry_params_ = RetryParams{};

    PrfStream wl = root_.fork("workload");
    std::vector<Transaction> txs = generate_workload(cfg_, wl);
    res_.txs.reserve(txs.size());
    for (const Transaction& tx : txs) {
        TxOutcomeRec r;
        r.id = tx.id;
        r.sender = tx.sender;
        r.receiver = tx.receiver;
        r.amount = tx.amount;
        r.fee = tx.fee;
        r.kind = tx.kind;
        r.submitted_at = tx.submitted_at;
        rec_index_[tx.id] = res_.txs.size();
        res_.txs.push_back(r);
        q_.schedule(tx.submitted_at, [this, tx] {
            if (stopped_) return;
            if (!admitted(tx)) {
                settle(tx.id, "dropped", "rate_limited");
                return;
            }
            pending_[shard_of_account(tx.sender)].push_back(tx);
        });
    }

    begin_shard_timers();
    schedule_epoch_events();
    q_.schedule(cfg_.duration, [this] {
        if (!stopped_) finish();
    });

    while (auto ev = q_.pop()) ev->second();

    res_.config = cfg_;
    res_.shards = shards_;
    res_.trace_digest = digest_.finish();
    return res_;
}

}  // namespace

SimResult run_simulation(const ScenarioConfig& cfg) {
    cfg.validate();
    Sim sim(cfg);
    return sim.run();
}

SybilResult run_sybil_experiment(const SybilParams& p) {
    SybilResult out;
    out.epochs = p.epochs;
    uint32_t f_committee = max_faulty(p.committee_size);
    size_t need = static_cast<size_t>(p.shards) * p.committee_size;
    if (need > p.validators)
        throw std::invalid_argument("sybil experiment: committees exceed validator pool");

    std::vector<NodeId> ids;
    for (NodeId n = 0; n < p.validators; ++n) ids.push_back(n);
    PrfStream roles(p.seed, "sybil-roles");
    roles.shuffle(ids);
    std::set<NodeId> sybil;
    auto n_sybil = static_cast<size_t>(p.sybil_fraction * p.validators + 0.5);
    for (size_t i = 0; i < n_sybil; ++i) sybil.insert(ids[i]);

    std::map<NodeId, double> trust;
    for (NodeId n = 0; n < p.validators; ++n) trust[n] = 1.0;

    HashWriter digest;
    auto row = [&](const std::string& s) {
        digest.update(reinterpret_cast<const uint8_t*>(s.data()), s.size());
        digest.update(reinterpret_cast<const uint8_t*>("\n"), 1);
        out.rows.push_back(s);
    };

    for (uint64_t e = 0; e < p.epochs; ++e) {
        std::vector<RoundParticipant> ps;
        for (NodeId n = 0; n < p.validators; ++n) ps.push_back({n, sybil.contains(n)});
        PrfStream rng(p.seed ^ e, "beacon");
        RoundResult rr = run_round(ps, AggregationMode::Xor, rng, e);
        for (NodeId w : rr.withholders) trust[w] = std::max(0.0, trust[w] - p.penalty);
        uint64_t beacon = rr.randomness ? rr.randomness->value : 0;

        std::vector<NodeId> eligible;
        for (const auto& [n, t] : trust)
            if (t >= p.trust_threshold) eligible.push_back(n);
        if (eligible.size() < need) {
            std::vector<std::pair<double, NodeId>> rest;
            for (const auto& [n, t] : trust)
                if (t < p.trust_threshold) rest.emplace_back(-t, n);
            std::sort(rest.begin(), rest.end());
            for (const auto& [negt, n] : rest) {
                if (eligible.size() >= need) break;
                eligible.push_back(n);
            }
            std::sort(eligible.begin(), eligible.end());
        }

        PrfStream shuffler(beacon ^ p.seed ^ e, "committees");
        shuffler.shuffle(eligible);
        bool breach = false;
        uint32_t worst = 0;
        for (uint32_t s = 0; s < p.shards; ++s) {
            uint32_t adv = 0;
            for (uint32_t i = 0; i < p.committee_size; ++i)
                if (sybil.contains(eligible[s * p.committee_size + i])) ++adv;
            worst = std::max(worst, adv);
            breach = breach || adv > f_committee;
        }
        if (breach) ++out.breached_epochs;
        char buf[96];
        std::snprintf(buf, sizeof buf, "epoch %" PRIu64 " worst=%u breach=%d eligible=%zu", e,
                      worst, breach ? 1 : 0, eligible.size());
        row(buf);
    }
    out.breach_fraction =
        static_cast<double>(out.breached_epochs) / static_cast<double>(p.epochs);
    char buf[96];
    std::snprintf(buf, sizeof buf, "summary breached=%" PRIu64 " fraction=%.6f",
                  out.breached_epochs, out.breach_fraction);
    row(buf);
    out.digest = digest.finish();
    return out;
}

}  // namespace rbs
