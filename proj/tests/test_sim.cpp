#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "rbs/metrics.hpp"
#include "rbs/sim.hpp"

using namespace rbs;

TEST_CASE("event queue pops in (tick, insertion) order") {
    // Oracle: stable sort of the schedule requests by tick.
    PrfStream prf(3, "evq");
    std::vector<std::pair<Tick, uint64_t>> want;
    EventQueue<uint64_t> q;
    for (uint64_t i = 0; i < 100000; ++i) {
        Tick at = static_cast<Tick>(prf.uniform(5000));
        want.emplace_back(at, i);
        q.schedule(at, i);
    }
    std::stable_sort(want.begin(), want.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [at, id] : want) {
        auto got = q.pop();
        REQUIRE(got.has_value());
        CHECK(got->first == at);
        CHECK(got->second == id);
    }
    CHECK(!q.pop().has_value());
}

TEST_CASE("scheduling into the past throws") {
    EventQueue<int> q;
    q.schedule(10, 1);
    q.pop();
    CHECK(q.now() == 10);
    CHECK_THROWS_AS(q.schedule(9, 2), std::logic_error);
    CHECK_NOTHROW(q.schedule(10, 3));
}

TEST_CASE("network model: fixed latency, certain drop, and uniform jitter mean") {
    PrfStream prf(17, "net");
    NetworkModel fixed{5, 5, 0.0, {}};
    for (int i = 0; i < 100; ++i) {
        auto at = fixed.delivery(0, 1, 100, prf);
        REQUIRE(at.has_value());
        CHECK(*at == 105);
    }
    NetworkModel drops{5, 5, 1.0, {}};
    for (int i = 0; i < 100; ++i) CHECK(!drops.delivery(0, 1, 0, prf).has_value());

    NetworkModel severed{5, 5, 0.0, {{2, 3}}};
    CHECK(!severed.delivery(2, 3, 0, prf).has_value());
    CHECK(!severed.delivery(3, 2, 0, prf).has_value());
    CHECK(severed.delivery(2, 4, 0, prf).has_value());

    // Uniform(4,12) has mean 8; 10^4 samples land within +-0.2.
    NetworkModel jitter{4, 12, 0.0, {}};
    double sum = 0;
    for (int i = 0; i < 10000; ++i) sum += static_cast<double>(*jitter.delivery(0, 1, 0, prf));
    double mean = sum / 10000.0;
    CHECK(mean > 7.8);
    CHECK(mean < 8.2);
}

namespace {
ScenarioConfig small_cfg() {
    ScenarioConfig cfg;
    cfg.seed = 5;
    cfg.n_nodes = 12;
    cfg.n_shards = 3;
    cfg.committee_size = 4;
    cfg.accounts = 150;
    cfg.duration = 300;
    cfg.tx_rate = 1.0;
    cfg.cross_fraction = 0.25;
    return cfg;
}
}  // namespace

TEST_CASE("same config and seed give identical digests; different seeds differ") {
    ScenarioConfig cfg = small_cfg();
    SimResult a = run_simulation(cfg);
    SimResult b = run_simulation(cfg);
    CHECK(a.trace_digest == b.trace_digest);
    CHECK(a.trace == b.trace);
    cfg.seed = 6;
    SimResult c = run_simulation(cfg);
    CHECK(a.trace_digest != c.trace_digest);
}

TEST_CASE("zero workload reaches quiescence with empty blocks and full conservation") {
    ScenarioConfig cfg = small_cfg();
    cfg.tx_rate = 0.0;
    SimResult r = run_simulation(cfg);
    CHECK(r.txs.empty());
    CHECK(r.blocks > 0);  // consensus keeps producing empty blocks
    uint64_t total = 0;
    for (const auto& [sid, st] : r.shards) {
        total += st.total_balance();
        CHECK(st.lock_table.empty());
        CHECK(st.staged_credits.empty());
    }
    CHECK(total == r.genesis_total);
    CHECK(r.burned_fees == 0);
    CHECK(r.live_locks_at_end == 0);
}

TEST_CASE("finalized transactions replayed over genesis reproduce final balances") {
    // Independent oracle: apply the finalized tx list (from the result records)
    // to the genesis balances and compare against the simulator's end state.
    ScenarioConfig cfg = small_cfg();
    cfg.duration = 500;
    cfg.tx_rate = 2.0;
    SimResult r = run_simulation(cfg);

    std::map<AccountId, uint64_t> bal;
    for (AccountId a = 0; a < cfg.accounts; ++a) bal[a] = cfg.initial_balance;
    uint64_t burned = 0;
    for (const TxOutcomeRec& t : r.txs) {
        if (t.outcome != "finalized") continue;
        REQUIRE(bal.at(t.sender) >= t.amount + t.fee);
        bal[t.sender] -= t.amount + t.fee;
        bal[t.receiver] += t.amount;
        burned += t.fee;
    }
    CHECK(burned == r.burned_fees);
    std::map<AccountId, uint64_t> got;
    for (const auto& [sid, st] : r.shards)
        for (const auto& [a, b] : st.balances) got[a] += b;
    CHECK(got == bal);
}

TEST_CASE("every transaction reaches a terminal outcome") {
    ScenarioConfig cfg = small_cfg();
    cfg.inject_reject_rate = 0.1;
    cfg.inject_delay_rate = 0.1;
    cfg.lock_ttl = 40;
    SimResult r = run_simulation(cfg);
    CHECK(!r.txs.empty());
    for (const TxOutcomeRec& t : r.txs) {
        CHECK(!t.outcome.empty());
        if (t.outcome == "finalized") CHECK(t.finalized_at >= t.submitted_at);
    }
    CHECK(r.live_locks_at_end == 0);
}

TEST_CASE("epoch boundaries rotate committees and keep balances intact") {
    ScenarioConfig cfg = small_cfg();
    cfg.epoch_length = 80;
    cfg.tx_rate = 1.5;
    SimResult r = run_simulation(cfg);
    CHECK(r.epochs.size() >= 3);
    uint64_t total = 0;
    for (const auto& [sid, st] : r.shards) total += st.total_balance();
    CHECK(total + r.burned_fees == r.genesis_total);
}

TEST_CASE("sybil experiment is deterministic and bounded") {
    SybilParams p;
    p.epochs = 50;
    SybilResult a = run_sybil_experiment(p);
    SybilResult b = run_sybil_experiment(p);
    CHECK(a.digest == b.digest);
    CHECK(a.rows.size() == 51);  // one per epoch plus the summary
    CHECK(a.breached_epochs <= a.epochs);

    SybilParams bad;
    bad.validators = 10;
    bad.shards = 10;
    bad.committee_size = 7;
    CHECK_THROWS_AS(run_sybil_experiment(bad), std::invalid_argument);
}
