#include "rbs/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace rbs {

namespace {

double need(const std::map<std::string, double>& params, const std::string& key,
            const std::string& model) {
    auto it = params.find(key);
    if (it == params.end())
        throw ModelError(model + ": missing parameter '" + key + "'");
    return it->second;
}

void positive(double v, const std::string& key, const std::string& model) {
    if (!(v > 0)) throw ModelError(model + ": parameter '" + key + "' must be > 0");
}

void nonneg(double v, const std::string& key, const std::string& model) {
    if (!(v >= 0)) throw ModelError(model + ": parameter '" + key + "' must be >= 0");
}

}  // namespace

std::vector<std::string> model_names() {
    return {"HonestQuorumProb",   "ShardedThroughput", "BlockThroughputPaper",
            "BlockThroughputConsistent", "MaliciousThroughput", "NetLatency",
            "CommitteeLatency",   "AdversaryTakeover", "FaultProb",
            "LockOverhead",       "DoSProb"};
}

std::vector<std::string> model_params(const std::string& model) {
    if (model == "HonestQuorumProb") return {"n_h", "N", "k"};
    if (model == "ShardedThroughput") return {"n_s", "t_s"};
    if (model == "BlockThroughputPaper") return {"B", "t_avg", "t_block"};
    if (model == "BlockThroughputConsistent") return {"B", "t_avg", "t_block"};
    if (model == "MaliciousThroughput") return {"T_ideal", "f", "N"};
    if (model == "NetLatency") return {"T_process", "T_comm", "N_shards"};
    if (model == "CommitteeLatency") return {"N_nodes", "C_range", "delta_comm"};
    if (model == "AdversaryTakeover") return {"f", "n", "s"};
    if (model == "FaultProb") return {"m", "t"};
    if (model == "LockOverhead") return {"T_cross", "L_account", "T_intra"};
    if (model == "DoSProb") return {"T_attack", "T_threshold", "M_malicious", "N"};
    throw ModelError("unknown model '" + model + "'");
}

double evaluate_model(const std::string& model,
                      const std::map<std::string, double>& params) {
    if (model == "HonestQuorumProb") {
        double n_h = need(params, "n_h", model);
        double N = need(params, "N", model);
        double k = need(params, "k", model);
        positive(N, "N", model);
        nonneg(n_h, "n_h", model);
        nonneg(k, "k", model);
        if (n_h > N) throw ModelError(model + ": parameter 'n_h' must be <= N");
        return 1.0 - std::pow(n_h / N, k);
    }
    if (model == "ShardedThroughput") {
        double n_s = need(params, "n_s", model);
        double t_s = need(params, "t_s", model);
        nonneg(n_s, "n_s", model);
        nonneg(t_s, "t_s", model);
        return n_s * t_s;
    }
    if (model == "BlockThroughputPaper") {
        double B = need(params, "B", model);
        double t_avg = need(params, "t_avg", model);
        double t_block = need(params, "t_block", model);
        positive(t_block, "t_block", model);
        return B * t_avg / t_block;
    }
    if (model == "BlockThroughputConsistent") {
        double B = need(params, "B", model);
        double t_avg = need(params, "t_avg", model);
        double t_block = need(params, "t_block", model);
        positive(t_avg, "t_avg", model);
        positive(t_block, "t_block", model);
        return B / (t_avg * t_block);
    }
    if (model == "MaliciousThroughput") {
        double t_ideal = need(params, "T_ideal", model);
        double f = need(params, "f", model);
        double N = need(params, "N", model);
        positive(N, "N", model);
        nonneg(f, "f", model);
        return t_ideal * (1.0 - f / N);
    }
    if (model == "NetLatency") {
        double t_process = need(params, "T_process", model);
        double t_comm = need(params, "T_comm", model);
        double n_shards = need(params, "N_shards", model);
        positive(n_shards, "N_shards", model);
        return (t_process + t_comm) / n_shards;
    }
    if (model == "CommitteeLatency") {
        double n_nodes = need(params, "N_nodes", model);
        double c_range = need(params, "C_range", model);
        double delta = need(params, "delta_comm", model);
        positive(c_range, "C_range", model);
        return n_nodes / c_range + delta;
    }
    if (model == "AdversaryTakeover") {
        double f = need(params, "f", model);
        double n = need(params, "n", model);
        double s = need(params, "s", model);
        positive(s, "s", model);
        nonneg(f, "f", model);
        return (f * n / s) * std::exp(-n);
    }
    if (model == "FaultProb") {
        double m = need(params, "m", model);
        double t = need(params, "t", model);
        positive(t, "t", model);
        nonneg(m, "m", model);
        if (m > (t - 1.0) / 3.0)
            throw ModelError(model + ": parameter 'm' must be <= (t-1)/3");
        return m / t;
    }
    if (model == "LockOverhead") {
        double t_cross = need(params, "T_cross", model);
        double l_account = need(params, "L_account", model);
        double t_intra = need(params, "T_intra", model);
        positive(t_intra, "T_intra", model);
        nonneg(t_cross, "T_cross", model);
        return t_cross * l_account / t_intra;
    }
    if (model == "DoSProb") {
        double t_attack = need(params, "T_attack", model);
        double t_threshold = need(params, "T_threshold", model);
        double m_mal = need(params, "M_malicious", model);
        double N = need(params, "N", model);
        positive(t_threshold, "T_threshold", model);
        positive(N, "N", model);
        nonneg(t_attack, "T_attack", model);
        return (1.0 - std::exp(-t_attack / t_threshold)) * m_mal / N;
    }
    throw ModelError("unknown model '" + model + "'");
}

namespace {

LatencyStats lat_stats(std::vector<double>& samples) {
    LatencyStats s;
    s.count = samples.size();
    if (samples.empty()) return s;
    std::sort(samples.begin(), samples.end());
    double sum = 0;
    for (double v : samples) sum += v;
    s.mean = sum / static_cast<double>(samples.size());
    auto pct = [&](double p) {
        size_t i = static_cast<size_t>(p * static_cast<double>(samples.size() - 1) + 0.5);
        return samples[std::min(i, samples.size() - 1)];
    };
    s.p50 = pct(0.50);
    s.p99 = pct(0.99);
    return s;
}

}  // namespace

MetricsReport build_report(const SimResult& r, const std::string& label) {
    MetricsReport rep;
    rep.label = label;
    rep.config = r.config;
    rep.epochs = r.epochs;
    rep.blocks = r.blocks;
    rep.messages = r.messages;
    rep.round_changes = r.round_changes;
    rep.rounds_per_block =
        r.blocks == 0 ? 0.0
                      : static_cast<double>(r.rounds_total) / static_cast<double>(r.blocks);
    rep.lock_wait_mean = r.lock_wait_samples == 0
                             ? 0.0
                             : static_cast<double>(r.lock_wait_total) /
                                   static_cast<double>(r.lock_wait_samples);
    rep.genesis_total = r.genesis_total;
    rep.burned_fees = r.burned_fees;
    rep.live_locks_at_end = r.live_locks_at_end;
    for (const auto& [sid, st] : r.shards) rep.final_total += st.total_balance();
    rep.trace_digest = hash_hex(r.trace_digest);

    rep.series_window =
        r.config.epoch_length > 0 ? r.config.epoch_length : r.config.duration;
    size_t n_windows = static_cast<size_t>(
        (r.config.duration + rep.series_window - 1) / rep.series_window);
    rep.tput_series.assign(std::max<size_t>(n_windows, 1), 0);

    std::vector<double> all, intra, cross;
    for (const TxOutcomeRec& t : r.txs) {
        ++rep.offered;
        if (t.outcome == "finalized") {
            ++rep.finalized;
            double d = static_cast<double>(t.finalized_at - t.submitted_at);
            all.push_back(d);
            (t.kind == TxKind::CrossShard ? cross : intra).push_back(d);
            size_t w = static_cast<size_t>(t.finalized_at / rep.series_window);
            if (w >= rep.tput_series.size()) w = rep.tput_series.size() - 1;
            ++rep.tput_series[w];
        } else if (t.outcome == "rejected") {
            ++rep.rejected;
        } else {
            ++rep.dropped;
        }
    }
    rep.lat_all = lat_stats(all);
    rep.lat_intra = lat_stats(intra);
    rep.lat_cross = lat_stats(cross);

    double dur = static_cast<double>(r.config.duration);
    rep.tput_per_tick = dur > 0 ? static_cast<double>(rep.finalized) / dur : 0.0;
    rep.tput_per_sec = rep.tput_per_tick * r.config.ticks_per_second;
    uint64_t decided = rep.finalized + rep.rejected;
    rep.abort_rate =
        decided == 0 ? 0.0 : static_cast<double>(rep.rejected) / static_cast<double>(decided);

    const ScenarioConfig& c = r.config;
    double cap_txs = static_cast<double>((c.block_limit - kBlockHeaderSize) / kTxWireSize);
    double t_s = cap_txs / static_cast<double>(c.block_interval);  // tx/tick per shard
    double n_mal = c.malicious_fraction * c.n_nodes;
    rep.analytic["ShardedThroughput"] =
        evaluate_model("ShardedThroughput",
                       {{"n_s", static_cast<double>(c.n_shards)}, {"t_s", t_s}});
    rep.analytic["BlockThroughputPaper"] = evaluate_model(
        "BlockThroughputPaper", {{"B", static_cast<double>(c.block_limit)},
                                 {"t_avg", static_cast<double>(kTxWireSize)},
                                 {"t_block", static_cast<double>(c.block_interval)}});
    rep.analytic["BlockThroughputConsistent"] = evaluate_model(
        "BlockThroughputConsistent", {{"B", static_cast<double>(c.block_limit)},
                                      {"t_avg", static_cast<double>(kTxWireSize)},
                                      {"t_block", static_cast<double>(c.block_interval)}});
    rep.analytic["MaliciousThroughput"] = evaluate_model(
        "MaliciousThroughput",
        {{"T_ideal", rep.analytic["ShardedThroughput"]},
         {"f", n_mal},
         {"N", static_cast<double>(c.n_nodes)}});
    rep.analytic["HonestQuorumProb"] = evaluate_model(
        "HonestQuorumProb", {{"n_h", static_cast<double>(c.n_nodes) - n_mal},
                             {"N", static_cast<double>(c.n_nodes)},
                             {"k", static_cast<double>(c.committee_size)}});
    rep.analytic["NetLatency"] = evaluate_model(
        "NetLatency", {{"T_process", static_cast<double>(c.block_interval)},
                       {"T_comm", static_cast<double>(2 * c.net_latency)},
                       {"N_shards", static_cast<double>(c.n_shards)}});
    rep.analytic["CommitteeLatency"] = evaluate_model(
        "CommitteeLatency", {{"N_nodes", static_cast<double>(c.n_nodes)},
                             {"C_range", static_cast<double>(c.committee_size)},
                             {"delta_comm", static_cast<double>(2 * c.net_latency)}});
    rep.analytic["AdversaryTakeover"] = evaluate_model(
        "AdversaryTakeover", {{"f", c.malicious_fraction},
                              {"n", static_cast<double>(c.n_nodes)},
                              {"s", static_cast<double>(c.n_shards)}});
    return rep;
}

}  // namespace rbs
