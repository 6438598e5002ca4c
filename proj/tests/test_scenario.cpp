#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "rbs/scenario.hpp"

using namespace rbs;

TEST_CASE("parse_config reads key=value lines with comments and blanks") {
    ScenarioConfig cfg = parse_config(
        "# comment\n"
        "seed=42\n"
        "\n"
        "n_shards=3\n"
        "n_nodes=12\n"
        "committee_size=4\n"
        "tx_rate=1.5\n"
        "lock_mode=full\n");
    CHECK(cfg.seed == 42);
    CHECK(cfg.n_shards == 3);
    CHECK(cfg.tx_rate == doctest::Approx(1.5));
    CHECK(cfg.lock_mode == LockMode::FullShard);
}

TEST_CASE("unknown keys and malformed values are hard errors") {
    CHECK_THROWS_AS(parse_config("no_such_key=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed=abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed=12x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("tx_rate=\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lock_mode=sharded\n"), ConfigError);
}

TEST_CASE("validate rejects inconsistent configurations") {
    ScenarioConfig cfg;
    cfg.n_nodes = 10;
    cfg.n_shards = 5;
    cfg.committee_size = 4;  // 20 > 10 nodes
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    ScenarioConfig c2;
    c2.v_min = 10;
    c2.committee_size = 5;
    CHECK_THROWS_AS(c2.validate(), ConfigError);

    ScenarioConfig c3;
    c3.drop_rate = 1.0;
    CHECK_THROWS_AS(c3.validate(), ConfigError);

    ScenarioConfig c4;
    c4.net_jitter = c4.net_latency + 1;
    CHECK_THROWS_AS(c4.validate(), ConfigError);

    ScenarioConfig c5;
    c5.malicious_behavior = "sneaky";
    CHECK_THROWS_AS(c5.validate(), ConfigError);
}

TEST_CASE("canonical dump is stable and round-trips") {
    ScenarioConfig cfg;
    cfg.seed = 9;
    cfg.zipf = 1.25;
    std::string a = cfg.canonical();
    CHECK(a == cfg.canonical());
    ScenarioConfig back = parse_config(a);
    CHECK(back.canonical() == a);
}

TEST_CASE("cross fraction 0 yields only intra-shard transactions") {
    ScenarioConfig cfg;
    cfg.cross_fraction = 0.0;
    cfg.duration = 500;
    cfg.tx_rate = 2.0;
    PrfStream prf(7, "wl");
    for (const Transaction& t : generate_workload(cfg, prf)) {
        CHECK(t.kind == TxKind::IntraShard);
        CHECK(t.source_shard == t.dest_shard);
    }
}

TEST_CASE("arrival count obeys the Poisson 3-sigma bound") {
    // Oracle: for rate r over duration D the count is within r*D +- 3*sqrt(r*D).
    ScenarioConfig cfg;
    cfg.tx_rate = 4.0;
    cfg.duration = 2000;
    PrfStream prf(11, "wl");
    auto txs = generate_workload(cfg, prf);
    double expect = cfg.tx_rate * static_cast<double>(cfg.duration);
    double slack = 3.0 * std::sqrt(expect);
    CHECK(static_cast<double>(txs.size()) > expect - slack);
    CHECK(static_cast<double>(txs.size()) < expect + slack);
    for (size_t i = 1; i < txs.size(); ++i)
        CHECK(txs[i - 1].submitted_at <= txs[i].submitted_at);
}

TEST_CASE("zero rate yields an empty stream") {
    ScenarioConfig cfg;
    cfg.tx_rate = 0.0;
    PrfStream prf(1, "wl");
    CHECK(generate_workload(cfg, prf).empty());
}

TEST_CASE("Zipf 1.0 senders concentrate on the head of the rank order") {
    ScenarioConfig cfg;
    cfg.zipf = 1.0;
    cfg.accounts = 1000;
    cfg.tx_rate = 5.0;
    cfg.duration = 2000;
    PrfStream prf(13, "wl");
    auto txs = generate_workload(cfg, prf);
    REQUIRE(txs.size() > 1000);
    std::map<AccountId, uint64_t> by_sender;
    for (const Transaction& t : txs) ++by_sender[t.sender];
    std::vector<uint64_t> counts;
    for (const auto& [a, c] : by_sender) counts.push_back(c);
    std::sort(counts.rbegin(), counts.rend());
    uint64_t top = 0;
    size_t top_n = cfg.accounts / 100;  // top 1%
    for (size_t i = 0; i < std::min(top_n, counts.size()); ++i) top += counts[i];
    CHECK(static_cast<double>(top) >= 0.15 * static_cast<double>(txs.size()));
}

TEST_CASE("workload generation is deterministic per seed") {
    ScenarioConfig cfg;
    cfg.duration = 300;
    PrfStream a(5, "wl"), b(5, "wl"), c(6, "wl");
    auto ta = generate_workload(cfg, a);
    auto tb = generate_workload(cfg, b);
    auto tc = generate_workload(cfg, c);
    CHECK(ta == tb);
    CHECK(ta != tc);
}

TEST_CASE("every preset variant validates") {
    for (const std::string& name : preset_names()) {
        auto variants = preset_variants(name);
        CHECK(!variants.empty());
        std::set<std::string> labels;
        for (const PresetVariant& v : variants) {
            CHECK_NOTHROW(v.config.validate());
            CHECK(labels.insert(v.label).second);  // labels unique
        }
    }
    CHECK_THROWS_AS(preset_variants("nope"), ConfigError);
}

TEST_CASE("dos attacker accounts land in shard 0 of the initial table") {
    ScenarioConfig cfg;
    cfg.n_shards = 4;
    cfg.dos_attack = true;
    RangeTable table = init_ranges(cfg.n_shards);
    auto atk = dos_attacker_accounts(cfg);
    CHECK(!atk.empty());
    for (AccountId a : atk) {
        CHECK(a >= cfg.accounts);
        CHECK(table.shard_of(key_of_account(a)) == 0);
    }
}
