#include "rbs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "rbs/partitioning.hpp"

namespace rbs {

namespace {

uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        uint64_t out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for '" + key + "': " + v);
    }
}

int64_t parse_i64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int64_t out = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for '" + key + "': " + v);
    }
}

double parse_f64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad number for '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw ConfigError("bad boolean for '" + key + "': " + v);
}

std::string fmt_f64(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void config_set(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "n_nodes") cfg.n_nodes = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "n_shards") cfg.n_shards = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "committee_size") cfg.committee_size = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "v_min") cfg.v_min = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "block_limit") cfg.block_limit = parse_u64(key, value);
    else if (key == "block_interval") cfg.block_interval = parse_i64(key, value);
    else if (key == "epoch_length") cfg.epoch_length = parse_i64(key, value);
    else if (key == "duration") cfg.duration = parse_i64(key, value);
    else if (key == "tx_rate") cfg.tx_rate = parse_f64(key, value);
    else if (key == "cross_fraction") cfg.cross_fraction = parse_f64(key, value);
    else if (key == "accounts") cfg.accounts = parse_u64(key, value);
    else if (key == "initial_balance") cfg.initial_balance = parse_u64(key, value);
    else if (key == "max_fee") cfg.max_fee = parse_u64(key, value);
    else if (key == "zipf") cfg.zipf = parse_f64(key, value);
    else if (key == "malicious_fraction") cfg.malicious_fraction = parse_f64(key, value);
    else if (key == "malicious_behavior") cfg.malicious_behavior = value;
    else if (key == "lock_mode") {
        if (value == "fine") cfg.lock_mode = LockMode::FineGrained;
        else if (value == "full") cfg.lock_mode = LockMode::FullShard;
        else throw ConfigError("bad lock_mode (fine|full): " + value);
    } else if (key == "lock_ttl") cfg.lock_ttl = parse_i64(key, value);
    else if (key == "net_latency") cfg.net_latency = parse_i64(key, value);
    else if (key == "net_jitter") cfg.net_jitter = parse_i64(key, value);
    else if (key == "drop_rate") cfg.drop_rate = parse_f64(key, value);
    else if (key == "timeout_base") cfg.timeout_base = parse_i64(key, value);
    else if (key == "ticks_per_second") cfg.ticks_per_second = parse_f64(key, value);
    else if (key == "inject_reject_rate") cfg.inject_reject_rate = parse_f64(key, value);
    else if (key == "inject_delay_rate") cfg.inject_delay_rate = parse_f64(key, value);
    else if (key == "reconfigure") cfg.reconfigure = parse_bool(key, value);
    else if (key == "dos_attack") cfg.dos_attack = parse_bool(key, value);
    else if (key == "dos_adaptive") cfg.dos_adaptive = parse_bool(key, value);
    else if (key == "dos_rate_mult") cfg.dos_rate_mult = parse_f64(key, value);
    else throw ConfigError("unknown config key: " + key);
}

ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto strip = [](std::string& s) {
            size_t x = s.find_first_not_of(" \t");
            size_t y = s.find_last_not_of(" \t");
            s = x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        strip(key);
        strip(value);
        config_set(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

void ScenarioConfig::validate() const {
    if (n_nodes == 0) throw ConfigError("n_nodes must be positive");
    if (n_shards == 0) throw ConfigError("n_shards must be positive");
    if (committee_size == 0) throw ConfigError("committee_size must be positive");
    if (static_cast<uint64_t>(committee_size) * n_shards > n_nodes)
        throw ConfigError("committee_size * n_shards exceeds n_nodes");
    if (v_min > committee_size) throw ConfigError("v_min exceeds committee_size");
    if (block_limit < kBlockHeaderSize + kTxWireSize)
        throw ConfigError("block_limit below one transaction");
    if (block_interval <= 0) throw ConfigError("block_interval must be positive");
    if (duration <= 0) throw ConfigError("duration must be positive");
    if (epoch_length < 0) throw ConfigError("epoch_length must be non-negative");
    if (cross_fraction < 0 || cross_fraction > 1)
        throw ConfigError("cross_fraction outside [0,1]");
    if (malicious_fraction < 0 || malicious_fraction >= 1)
        throw ConfigError("malicious_fraction outside [0,1)");
    if (accounts < 4ull * n_shards) throw ConfigError("need at least 4 accounts per shard");
    if (lock_ttl <= 0) throw ConfigError("lock_ttl must be positive");
    if (net_latency < 0 || net_jitter < 0 || net_jitter > net_latency)
        throw ConfigError("net_jitter must lie in [0, net_latency]");
    if (drop_rate < 0 || drop_rate >= 1) throw ConfigError("drop_rate outside [0,1)");
    if (timeout_base <= 0) throw ConfigError("timeout_base must be positive");
    if (ticks_per_second <= 0) throw ConfigError("ticks_per_second must be positive");
    if (inject_reject_rate < 0 || inject_reject_rate > 1 || inject_delay_rate < 0 ||
        inject_delay_rate > 1)
        throw ConfigError("injection rates outside [0,1]");
    static const char* behaviors[] = {"silent", "equivocate", "invalid",
                                      "staller", "withholder", "mix"};
    bool known = false;
    for (const char* b : behaviors) known = known || malicious_behavior == b;
    if (!known) throw ConfigError("unknown malicious_behavior: " + malicious_behavior);
}

std::string ScenarioConfig::canonical() const {
    std::ostringstream out;
    out << "accounts=" << accounts << '\n'
        << "block_interval=" << block_interval << '\n'
        << "block_limit=" << block_limit << '\n'
        << "committee_size=" << committee_size << '\n'
        << "cross_fraction=" << fmt_f64(cross_fraction) << '\n'
        << "dos_adaptive=" << (dos_adaptive ? 1 : 0) << '\n'
        << "dos_attack=" << (dos_attack ? 1 : 0) << '\n'
        << "dos_rate_mult=" << fmt_f64(dos_rate_mult) << '\n'
        << "drop_rate=" << fmt_f64(drop_rate) << '\n'
        << "duration=" << duration << '\n'
        << "epoch_length=" << epoch_length << '\n'
        << "initial_balance=" << initial_balance << '\n'
        << "inject_delay_rate=" << fmt_f64(inject_delay_rate) << '\n'
        << "inject_reject_rate=" << fmt_f64(inject_reject_rate) << '\n'
        << "lock_mode=" << (lock_mode == LockMode::FineGrained ? "fine" : "full") << '\n'
        << "lock_ttl=" << lock_ttl << '\n'
        << "malicious_behavior=" << malicious_behavior << '\n'
        << "malicious_fraction=" << fmt_f64(malicious_fraction) << '\n'
        << "max_fee=" << max_fee << '\n'
        << "n_nodes=" << n_nodes << '\n'
        << "n_shards=" << n_shards << '\n'
        << "net_jitter=" << net_jitter << '\n'
        << "net_latency=" << net_latency << '\n'
        << "reconfigure=" << (reconfigure ? 1 : 0) << '\n'
        << "seed=" << seed << '\n'
        << "ticks_per_second=" << fmt_f64(ticks_per_second) << '\n'
        << "timeout_base=" << timeout_base << '\n'
        << "tx_rate=" << fmt_f64(tx_rate) << '\n'
        << "v_min=" << v_min << '\n'
        << "zipf=" << fmt_f64(zipf) << '\n';
    return out.str();
}

std::vector<std::string> preset_names() {
    return {"scaling", "blocksize", "malicious", "latency", "locking", "sybil", "dos"};
}

std::vector<PresetVariant> preset_variants(const std::string& name) {
    std::vector<PresetVariant> out;
    if (name == "scaling") {
        for (uint32_t shards : {2u, 4u, 8u, 14u}) {
            ScenarioConfig c;
            c.preset = name;
            c.n_nodes = 100;
            c.n_shards = shards;
            c.committee_size = 7;
            c.accounts = 2000;
            c.tx_rate = 80.0;
            c.cross_fraction = 0.1;
            c.duration = 800;
            out.push_back({"shards" + std::to_string(shards), c});
        }
    } else if (name == "blocksize") {
        for (uint64_t txs : {8u, 16u, 32u, 64u}) {
            ScenarioConfig c;
            c.preset = name;
            c.block_limit = kBlockHeaderSize + txs * kTxWireSize;
            c.tx_rate = 30.0;
            c.duration = 600;
            out.push_back({"txcap" + std::to_string(txs), c});
        }
    } else if (name == "malicious") {
        for (uint32_t pct : {0u, 6u, 10u}) {
            ScenarioConfig c;
            c.preset = name;
            c.n_nodes = 100;
            c.n_shards = 10;
            c.committee_size = 7;
            c.accounts = 2000;
            c.tx_rate = 100.0;
            c.duration = 600;
            c.malicious_fraction = pct / 100.0;
            c.malicious_behavior = "mix";
            out.push_back({"f" + std::to_string(pct), c});
        }
    } else if (name == "latency") {
        for (Tick lat : {1, 5, 10, 20}) {
            ScenarioConfig c;
            c.preset = name;
            c.tx_rate = 10.0;
            c.duration = 600;
            c.net_latency = lat;
            c.net_jitter = lat > 1 ? 1 : 0;
            out.push_back({"lat" + std::to_string(lat), c});
        }
    } else if (name == "locking") {
        for (LockMode mode : {LockMode::FineGrained, LockMode::FullShard}) {
            ScenarioConfig c;
            c.preset = name;
            c.accounts = 500;
            c.tx_rate = 2.0;
            c.cross_fraction = 0.3;
            c.zipf = 1.0;
            c.duration = 1500;
            c.lock_ttl = 60;
            c.lock_mode = mode;
            out.push_back({mode == LockMode::FineGrained ? "fine" : "full", c});
        }
    } else if (name == "sybil") {
        ScenarioConfig c;
        c.preset = name;
        c.n_nodes = 100;
        c.n_shards = 10;
        c.committee_size = 7;
        c.malicious_fraction = 0.3;
        c.malicious_behavior = "withholder";
        c.duration = 1000;  // epochs for the rotation experiment
        out.push_back({"sybil", c});
    } else if (name == "dos") {
        struct V { const char* label; bool attack; bool adaptive; };
        for (V v : {V{"base", false, true}, V{"static", true, false}, V{"adaptive", true, true}}) {
            ScenarioConfig c;
            c.preset = name;
            c.n_nodes = 24;
            c.n_shards = 4;
            c.committee_size = 5;
            c.tx_rate = 8.0;
            c.duration = 600;
            c.dos_attack = v.attack;
            c.dos_adaptive = v.adaptive;
            out.push_back({v.label, c});
        }
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    for (auto& v : out) v.config.validate();
    return out;
}

std::vector<AccountId> dos_attacker_accounts(const ScenarioConfig& cfg) {
    RangeTable table = init_ranges(cfg.n_shards);
    std::vector<AccountId> out;
    AccountId a = cfg.accounts;
    while (out.size() < 4) {
        if (table.shard_of(key_of_account(a)) == 0) out.push_back(a);
        ++a;
    }
    return out;
}

namespace {

// Accounts grouped by their initial shard; the Zipf rank order walks the
// groups shard by shard with a per-group shuffle, so rank skew concentrates
// traffic on shard 0 while spreading it across that shard's key range.
struct Population {
    std::vector<ShardId> shard_of;
    std::vector<std::vector<AccountId>> by_shard;
    std::vector<AccountId> rank_order;
};

Population build_population(const ScenarioConfig& cfg, PrfStream& prf) {
    Population pop;
    RangeTable table = init_ranges(cfg.n_shards);
    pop.shard_of.resize(cfg.accounts);
    pop.by_shard.resize(cfg.n_shards);
    for (AccountId a = 0; a < cfg.accounts; ++a) {
        ShardId s = table.shard_of(key_of_account(a));
        pop.shard_of[a] = s;
        pop.by_shard[s].push_back(a);
    }
    PrfStream shuffler = prf.fork("zipf-perm");
    for (auto group : pop.by_shard) {
        shuffler.shuffle(group);
        for (AccountId a : group) pop.rank_order.push_back(a);
    }
    return pop;
}

}  // namespace

std::vector<Transaction> generate_workload(const ScenarioConfig& cfg, PrfStream& prf) {
    std::vector<Transaction> out;
    if (cfg.tx_rate <= 0) return out;

    Population pop = build_population(cfg, prf);

    std::vector<double> zipf_cdf;
    if (cfg.zipf > 0) {
        zipf_cdf.resize(cfg.accounts);
        double sum = 0;
        for (uint64_t r = 0; r < cfg.accounts; ++r) {
            sum += 1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf);
            zipf_cdf[r] = sum;
        }
    }

    PrfStream arrivals = prf.fork("arrivals");
    PrfStream pick = prf.fork("pick");
    double t = 0;
    TxId next_id = 1;
    while (true) {
        t += arrivals.exponential(1.0 / cfg.tx_rate);
        Tick tick = static_cast<Tick>(t);
        if (tick >= cfg.duration) break;

        AccountId sender;
        if (cfg.zipf > 0) {
            double u = pick.next_double() * zipf_cdf.back();
            size_t rank = static_cast<size_t>(
                std::lower_bound(zipf_cdf.begin(), zipf_cdf.end(), u) - zipf_cdf.begin());
            if (rank >= cfg.accounts) rank = cfg.accounts - 1;
            sender = pop.rank_order[rank];
        } else {
            sender = pick.uniform(cfg.accounts);
        }
        ShardId src = pop.shard_of[sender];

        Transaction tx;
        tx.id = next_id++;
        tx.sender = sender;
        tx.amount = 1 + pick.uniform(100);
        tx.fee = pick.uniform(cfg.max_fee + 1);
        tx.submitted_at = tick;
        bool cross = cfg.n_shards > 1 && pick.next_double() < cfg.cross_fraction;
        if (cross) {
            ShardId other = static_cast<ShardId>(pick.uniform(cfg.n_shards - 1));
            if (other >= src) ++other;
            const auto& group = pop.by_shard[other];
            tx.receiver = group[pick.uniform(group.size())];
            tx.kind = TxKind::CrossShard;
            tx.source_shard = src;
            tx.dest_shard = other;
        } else {
            const auto& group = pop.by_shard[src];
            tx.receiver = group[pick.uniform(group.size())];
            if (tx.receiver == sender) tx.receiver = group[pick.uniform(group.size())];
            tx.kind = TxKind::IntraShard;
            tx.source_shard = src;
            tx.dest_shard = src;
        }
        out.push_back(tx);
    }

    if (cfg.dos_attack) {
        std::vector<AccountId> attackers = dos_attacker_accounts(cfg);
        PrfStream spam_arrivals = prf.fork("spam-arrivals");
        PrfStream spam_pick = prf.fork("spam-pick");
        double rate = cfg.dos_rate_mult * cfg.tx_rate / cfg.n_shards;
        double ts = 0;
        TxId spam_id = TxId{1} << 40;
        while (true) {
            ts += spam_arrivals.exponential(1.0 / rate);
            Tick tick = static_cast<Tick>(ts);
            if (tick >= cfg.duration) break;
            Transaction tx;
            tx.id = spam_id++;
            size_t i = spam_pick.uniform(attackers.size());
            tx.sender = attackers[i];
            tx.receiver = attackers[(i + 1) % attackers.size()];
            tx.amount = 1;
            tx.fee = spam_pick.uniform(cfg.max_fee + 1);
            tx.kind = TxKind::IntraShard;
            tx.source_shard = 0;
            tx.dest_shard = 0;
            tx.submitted_at = tick;
            out.push_back(tx);
        }
        std::stable_sort(out.begin(), out.end(), [](const Transaction& a, const Transaction& b) {
            return a.submitted_at != b.submitted_at ? a.submitted_at < b.submitted_at
                                                    : a.id < b.id;
        });
    }
    return out;
}

}  // namespace rbs
