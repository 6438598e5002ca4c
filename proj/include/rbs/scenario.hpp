#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbs/ledger.hpp"
#include "rbs/prf.hpp"

namespace rbs {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value scenario description. Every knob the simulator reads lives
// here; unknown keys in a config file are hard errors.
struct ScenarioConfig {
    uint64_t seed = 1;
    uint32_t n_nodes = 25;
    uint32_t n_shards = 5;
    uint32_t committee_size = 5;
    uint32_t v_min = 4;
    uint64_t block_limit = kBlockHeaderSize + 64 * kTxWireSize;
    Tick block_interval = 8;
    Tick epoch_length = 0;  // 0 = no epoch boundaries
    Tick duration = 1000;
    double tx_rate = 2.0;  // expected arrivals per tick
    double cross_fraction = 0.1;
    uint64_t accounts = 1000;
    uint64_t initial_balance = 1000000;
    uint64_t max_fee = 8;
    double zipf = 0.0;  // 0 = uniform sender choice
    double malicious_fraction = 0.0;
    std::string malicious_behavior = "silent";  // silent|equivocate|invalid|staller|withholder|mix
    LockMode lock_mode = LockMode::FineGrained;
    Tick lock_ttl = 200;
    Tick net_latency = 2;
    Tick net_jitter = 0;
    double drop_rate = 0.0;
    Tick timeout_base = 8;
    double ticks_per_second = 100.0;
    double inject_reject_rate = 0.0;
    double inject_delay_rate = 0.0;
    bool reconfigure = false;
    bool dos_attack = false;
    bool dos_adaptive = true;
    double dos_rate_mult = 50.0;
    std::string preset;

    void validate() const;            // throws ConfigError
    std::string canonical() const;    // stable key=value dump, one per line
};

// Applies one key=value assignment; throws ConfigError on unknown keys or
// unparseable values.
void config_set(ScenarioConfig& cfg, const std::string& key, const std::string& value);

ScenarioConfig parse_config(const std::string& text);

struct PresetVariant {
    std::string label;
    ScenarioConfig config;
};

std::vector<std::string> preset_names();
std::vector<PresetVariant> preset_variants(const std::string& name);

// Accounts the DoS flooder controls: the first few ids above the legit range
// whose keys land in shard 0 of the initial table.
std::vector<AccountId> dos_attacker_accounts(const ScenarioConfig& cfg);

// Poisson-timed transaction stream over the configured account population,
// sorted by submitted_at. Shard fields reflect the initial range table; the
// simulator re-derives them against the live table at arrival.
std::vector<Transaction> generate_workload(const ScenarioConfig& cfg, PrfStream& prf);

}  // namespace rbs
