#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rbs/report.hpp"

using namespace rbs;

static double eval(const std::string& m, std::map<std::string, double> p) {
    return evaluate_model(m, p);
}

TEST_CASE("model spot values against hand-computed arithmetic") {
    CHECK(eval("HonestQuorumProb", {{"n_h", 70}, {"N", 100}, {"k", 3}}) ==
          doctest::Approx(0.657).epsilon(1e-12));
    CHECK(eval("MaliciousThroughput", {{"T_ideal", 5000}, {"f", 10}, {"N", 100}}) ==
          doctest::Approx(4500).epsilon(1e-12));
    CHECK(eval("FaultProb", {{"m", 3}, {"t", 10}}) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(eval("ShardedThroughput", {{"n_s", 10}, {"t_s", 495}}) ==
          doctest::Approx(4950).epsilon(1e-12));
    CHECK(eval("LockOverhead", {{"T_cross", 30}, {"L_account", 4}, {"T_intra", 60}}) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eval("NetLatency", {{"T_process", 20}, {"T_comm", 10}, {"N_shards", 5}}) ==
          doctest::Approx(6.0).epsilon(1e-12));
    CHECK(eval("CommitteeLatency", {{"N_nodes", 100}, {"C_range", 10}, {"delta_comm", 3}}) ==
          doctest::Approx(13.0).epsilon(1e-12));
}

TEST_CASE("AdversaryTakeover matches independent evaluation") {
    double got = eval("AdversaryTakeover", {{"f", 0.3}, {"n", 100}, {"s", 10}});
    double want = (0.3 * 100 / 10) * std::exp(-100.0);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got == doctest::Approx(3.0 * std::exp(-100.0)).epsilon(1e-12));
}

TEST_CASE("BlockThroughput verbatim and dimensionally consistent variants differ") {
    auto p = std::map<std::string, double>{{"B", 1024}, {"t_avg", 256}, {"t_block", 8}};
    CHECK(eval("BlockThroughputPaper", p) == doctest::Approx(1024.0 * 256 / 8).epsilon(1e-12));
    CHECK(eval("BlockThroughputConsistent", p) ==
          doctest::Approx(1024.0 / (256 * 8)).epsilon(1e-12));
}

TEST_CASE("DoSProb spot value") {
    double got = eval("DoSProb",
                      {{"T_attack", 50}, {"T_threshold", 50}, {"M_malicious", 30}, {"N", 100}});
    CHECK(got == doctest::Approx((1.0 - std::exp(-1.0)) * 0.3).epsilon(1e-12));
}

TEST_CASE("domain violations raise structured errors naming the parameter") {
    CHECK_THROWS_WITH_AS(eval("FaultProb", {{"m", 4}, {"t", 10}}),
                         "FaultProb: parameter 'm' must be <= (t-1)/3", ModelError);
    CHECK_THROWS_AS(eval("FaultProb", {{"m", 1}}), ModelError);              // missing t
    CHECK_THROWS_AS(eval("NetLatency", {{"T_process", 1}, {"T_comm", 1}, {"N_shards", 0}}),
                    ModelError);
    CHECK_THROWS_AS(eval("HonestQuorumProb", {{"n_h", 101}, {"N", 100}, {"k", 3}}),
                    ModelError);
    CHECK_THROWS_AS(eval("NoSuchModel", {}), ModelError);
}

TEST_CASE("models are pure: repeated evaluation is identical") {
    auto p = std::map<std::string, double>{{"n_h", 66}, {"N", 99}, {"k", 4}};
    CHECK(eval("HonestQuorumProb", p) == eval("HonestQuorumProb", p));
    for (const std::string& name : model_names()) CHECK(!model_params(name).empty());
}

TEST_CASE("report rendering is byte-stable and self-consistent") {
    ScenarioConfig cfg;
    cfg.seed = 21;
    cfg.n_nodes = 12;
    cfg.n_shards = 3;
    cfg.committee_size = 4;
    cfg.accounts = 200;
    cfg.duration = 300;
    cfg.tx_rate = 1.0;
    SimResult r = run_simulation(cfg);
    MetricsReport rep = build_report(r, "t");

    for (ReportFormat f : {ReportFormat::Rows, ReportFormat::Table, ReportFormat::Plot})
        CHECK(render_report(rep, f) == render_report(rep, f));

    // Re-sum the throughput series out of the structured rows; it must equal
    // the report's finalized total.
    std::istringstream rows(render_report(rep, ReportFormat::Rows));
    std::string line;
    uint64_t series_sum = 0, finalized = 0;
    while (std::getline(rows, line)) {
        std::istringstream ls(line);
        std::string a, b;
        ls >> a >> b;
        if (a == "series" && b == "tput") {
            uint64_t idx, v;
            ls >> idx >> v;
            series_sum += v;
        } else if (a == "count" && b == "finalized") {
            ls >> finalized;
        }
    }
    CHECK(finalized == rep.finalized);
    CHECK(series_sum == rep.finalized);

    // Counts recomputable from the trace.
    uint64_t trace_finalized = 0;
    for (const std::string& row : r.trace)
        if (row.rfind("tx ", 0) == 0 && row.find(" finalized") != std::string::npos)
            ++trace_finalized;
    CHECK(trace_finalized == rep.finalized);

    // The analytic capacity model upper-bounds the measurement.
    CHECK(rep.tput_per_tick <= rep.analytic.at("ShardedThroughput"));
}

TEST_CASE("parse_format accepts the three formats and rejects others") {
    CHECK(parse_format("rows") == ReportFormat::Rows);
    CHECK(parse_format("table") == ReportFormat::Table);
    CHECK(parse_format("plot") == ReportFormat::Plot);
    CHECK_THROWS_AS(parse_format("csv"), ConfigError);
}
