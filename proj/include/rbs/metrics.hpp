#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbs/sim.hpp"

namespace rbs {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed-form reporting models. Pure functions of their parameters; never
// consulted by the simulator's control flow. Unknown model names, missing
// parameters, and domain violations throw ModelError naming the offender.
double evaluate_model(const std::string& model, const std::map<std::string, double>& params);

std::vector<std::string> model_names();
// The parameter names a model expects, in documentation order.
std::vector<std::string> model_params(const std::string& model);

struct LatencyStats {
    uint64_t count = 0;
    double mean = 0.0;
    double p50 = 0.0;
    double p99 = 0.0;
};

// Everything the report renderer needs, precomputed from one simulation run.
// Counts here are recomputable from the trace.
struct MetricsReport {
    std::string label;
    ScenarioConfig config;

    uint64_t offered = 0;
    uint64_t finalized = 0;
    uint64_t rejected = 0;
    uint64_t dropped = 0;

    double tput_per_tick = 0.0;
    double tput_per_sec = 0.0;

    LatencyStats lat_all, lat_intra, lat_cross;

    std::vector<EpochStats> epochs;
    // Finalized tx per window (epoch_length, or the whole run when epochs are
    // off); re-summing this series must reproduce `finalized`.
    std::vector<uint64_t> tput_series;
    Tick series_window = 0;

    uint64_t blocks = 0;
    uint64_t messages = 0;
    double rounds_per_block = 0.0;
    uint64_t round_changes = 0;
    double lock_wait_mean = 0.0;
    double abort_rate = 0.0;  // rejected / (finalized + rejected)

    uint64_t genesis_total = 0;
    uint64_t final_total = 0;
    uint64_t burned_fees = 0;
    uint64_t live_locks_at_end = 0;

    std::string trace_digest;

    // Analytic model values for this configuration, reported side by side with
    // the measurements above.
    std::map<std::string, double> analytic;
};

MetricsReport build_report(const SimResult& result, const std::string& label);

}  // namespace rbs
